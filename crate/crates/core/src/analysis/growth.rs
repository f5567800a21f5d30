use num_complex::Complex64;

use super::AnalysisError;
use crate::mesh::{DualMetrics, SimplicialSurface};
use crate::solver::{
    field_energy, FieldState, ImplicitStepper, MaterialParams, StepperOptions,
};

/// The per-face weight multiplying each edge term of `M`. It is left
/// undefined in the growth-factor derivation; 1 makes the expression match
/// the substitution it comes from.
pub const PHI: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GrowthFactor {
    pub m: f64,
    /// Roots of `(1+M)ξ² − 2ξ + 1 = 0`.
    pub roots: [Complex64; 2],
}

impl GrowthFactor {
    pub fn max_modulus(&self) -> f64 {
        self.roots[0].norm().max(self.roots[1].norm())
    }
}

/// Roots of `a ξ² + b ξ + c = 0` through the complex quadratic formula.
pub fn quadratic_roots(a: f64, b: f64, c: f64) -> [Complex64; 2] {
    let disc = Complex64::new(b * b - 4.0 * a * c, 0.0).sqrt();
    let two_a = 2.0 * a;
    [(-b + disc) / two_a, (-b - disc) / two_a]
}

/// Amplification of a single face for spatial frequency `k`:
///
/// `M = Δt² / (c_f |P|) · Σ_i φ (1 − cos(k|*e_i|)) |e_i| / (c_i |*e_i|)`
///
/// where `c_f`, `c_i` are the face and edge capacities, which reduces to
/// `(cΔt)²/|P| Σ …` for uniform media.
pub fn growth_factor(
    surface: &SimplicialSurface,
    face: usize,
    metrics: &DualMetrics,
    materials: &MaterialParams,
    dt: f64,
    k: f64,
) -> Result<GrowthFactor, AnalysisError> {
    if !(k >= 0.0 && k.is_finite()) {
        return Err(AnalysisError::InvalidFrequency(k));
    }
    if !(dt >= 0.0 && dt.is_finite()) {
        return Err(AnalysisError::InvalidTimeStep(dt));
    }
    let edge_cap = materials.edge_capacity();
    let face_cap = materials.face_capacity()[face];
    let mut sum = 0.0;
    for (e, _) in surface.face_edges(face) {
        let dual = metrics.dual_edge_len[e];
        if dual == 0.0 {
            return Err(AnalysisError::ZeroDualEdge { face, edge: e });
        }
        sum += PHI * (1.0 - (k * dual).cos()) * metrics.edge_len[e] / (edge_cap[e] * dual);
    }
    let m = dt * dt / (face_cap * metrics.face_area[face]) * sum;
    Ok(GrowthFactor {
        m,
        roots: quadratic_roots(1.0 + m, -2.0, 1.0),
    })
}

/// `samples` evenly spaced frequencies in `[0, π / min|*e|]`.
pub fn default_k_grid(metrics: &DualMetrics, samples: usize) -> Vec<f64> {
    let min_dual = metrics
        .dual_edge_len
        .iter()
        .copied()
        .filter(|&d| d > 0.0)
        .fold(f64::INFINITY, f64::min);
    let k_max = std::f64::consts::PI / min_dual;
    match samples {
        0 => Vec::new(),
        1 => vec![0.0],
        n => (0..n).map(|j| k_max * j as f64 / (n - 1) as f64).collect(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GrowthSample {
    pub face: usize,
    pub k: f64,
    pub m: f64,
    pub xi_mod: f64,
    pub dt: f64,
}

/// Energy behaviour of the actual stepper at one time step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EmpiricalCheck {
    pub dt: f64,
    pub steps: usize,
    pub initial_energy: f64,
    pub final_energy: f64,
    /// Largest `𝔈^{n+1} / 𝔈^n` seen.
    pub max_step_ratio: f64,
}

#[derive(Clone, Debug)]
pub struct GrowthFactorReport {
    pub samples: Vec<GrowthSample>,
    pub wave_speed: f64,
    pub dts: Vec<f64>,
    pub k_grid: Vec<f64>,
    pub phi: f64,
    pub max_xi: f64,
    pub min_m: f64,
    pub empirical: Option<EmpiricalCheck>,
}

impl GrowthFactorReport {
    pub fn is_stable(&self, tolerance: f64) -> bool {
        self.max_xi <= 1.0 + tolerance
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("face_id,k,M,xi_mod,dt\n");
        for s in &self.samples {
            out.push_str(&format!("{},{:.17e},{:.17e},{:.17e},{:.17e}\n", s.face, s.k, s.m, s.xi_mod, s.dt));
        }
        out
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("faces x k-samples x dts: {} samples\n", self.samples.len()));
        out.push_str(&format!("wave speed c: {:.6e}\n", self.wave_speed));
        out.push_str(&format!(
            "k grid: {} samples in [0, {:.6e}]\n",
            self.k_grid.len(),
            self.k_grid.last().copied().unwrap_or(0.0)
        ));
        out.push_str(&format!("phi (undefined edge weight) taken as {}\n", self.phi));
        for &dt in &self.dts {
            let worst = self
                .samples
                .iter()
                .filter(|s| s.dt == dt)
                .map(|s| s.xi_mod)
                .fold(0.0, f64::max);
            out.push_str(&format!("dt {dt:.6e}: max |xi| = {worst:.15}\n"));
        }
        out.push_str(&format!("min M: {:.6e}\n", self.min_m));
        out.push_str(&format!("max |xi|: {:.15}\n", self.max_xi));
        if let Some(e) = &self.empirical {
            out.push_str(&format!(
                "empirical run at dt {:.6e}: {} steps, energy {:.6e} -> {:.6e}, max step ratio {:.15}\n",
                e.dt, e.steps, e.initial_energy, e.final_energy, e.max_step_ratio
            ));
        }
        out.push_str(if self.is_stable(1e-12) {
            "verdict: stable (max |xi| <= 1)\n"
        } else {
            "verdict: UNSTABLE (max |xi| > 1)\n"
        });
        out
    }
}

/// Deterministic, divergence-free initial data for the empirical check: the
/// face field gets a fixed pseudo-random pattern, the edge field is the
/// scaled co-differential of another one so its Gauss residual vanishes.
fn probe_state(surface: &SimplicialSurface, metrics: &DualMetrics, materials: &MaterialParams) -> FieldState {
    let pattern = |i: usize, salt: f64| ((i as f64 + 1.0) * 12.9898 + salt).sin() * 43_758.545_3 % 1.0;
    let mut state = FieldState::zeros(materials.mode, surface);
    let nf = surface.n_faces();
    *state.face_field_mut() = (0..nf).map(|f| pattern(f, 78.233)).collect();
    let z: Vec<f64> = (0..nf).map(|f| pattern(f, 11.135)).collect();
    let curl = surface.d1().apply_transpose(&z);
    let cap = materials.edge_capacity();
    *state.edge_field_mut() = curl
        .iter()
        .enumerate()
        .map(|(e, v)| {
            let pinned = materials.mode == crate::solver::Mode::Te && surface.is_boundary_edge(e);
            if pinned {
                0.0
            } else {
                v * metrics.edge_len[e] / (cap[e] * metrics.dual_edge_len[e])
            }
        })
        .collect();
    state
}

/// Evaluates the growth factor on every face for every `(Δt, k)` pair and,
/// when `empirical_steps > 0`, runs the stepper at the largest `Δt` to
/// confirm the energy never grows.
pub fn stability_sweep(
    surface: &SimplicialSurface,
    metrics: &DualMetrics,
    materials: &MaterialParams,
    dts: &[f64],
    k_grid: &[f64],
    empirical_steps: usize,
) -> Result<GrowthFactorReport, AnalysisError> {
    let mut samples = Vec::with_capacity(dts.len() * k_grid.len() * surface.n_faces());
    let mut max_xi: f64 = 0.0;
    let mut min_m = f64::INFINITY;
    for &dt in dts {
        for face in 0..surface.n_faces() {
            for &k in k_grid {
                let g = growth_factor(surface, face, metrics, materials, dt, k)?;
                let xi_mod = g.max_modulus();
                max_xi = max_xi.max(xi_mod);
                min_m = min_m.min(g.m);
                samples.push(GrowthSample {
                    face,
                    k,
                    m: g.m,
                    xi_mod,
                    dt,
                });
            }
        }
    }

    let empirical = match dts.iter().copied().fold(None, |m: Option<f64>, d| Some(m.map_or(d, |m| m.max(d)))) {
        Some(dt) if empirical_steps > 0 && dt > 0.0 => {
            let stepper = ImplicitStepper::assemble(
                materials.mode,
                surface,
                metrics,
                materials,
                dt,
                StepperOptions::default(),
            )?;
            let mut state = probe_state(surface, metrics, materials);
            let initial_energy = field_energy(&state, materials, metrics);
            let mut prev = initial_energy;
            let mut max_step_ratio: f64 = 0.0;
            for _ in 0..empirical_steps {
                state = stepper.step(&state, &[])?;
                let e = field_energy(&state, materials, metrics);
                if prev > 0.0 {
                    max_step_ratio = max_step_ratio.max(e / prev);
                }
                prev = e;
            }
            Some(EmpiricalCheck {
                dt,
                steps: empirical_steps,
                initial_energy,
                final_energy: prev,
                max_step_ratio,
            })
        }
        _ => None,
    };

    Ok(GrowthFactorReport {
        samples,
        wave_speed: materials.max_wave_speed(surface),
        dts: dts.to_vec(),
        k_grid: k_grid.to_vec(),
        phi: PHI,
        max_xi,
        min_m: if min_m.is_finite() { min_m } else { 0.0 },
        empirical,
    })
}
