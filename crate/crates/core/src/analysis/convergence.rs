use std::f64::consts::PI;

use super::AnalysisError;
use crate::mesh::{compute_dual_metrics, DualMetrics, SimplicialSurface};
use crate::solver::{FieldState, ImplicitStepper, MaterialParams, Mode, StepperOptions};

/// Standing `(m, n)` mode of the PEC unit-square cavity.
///
/// TM: `E_z = sin(mπx) sin(nπy) cos(ωt)`.
/// TE: `H_z = cos(mπx) cos(nπy) cos(ωt)`.
/// In both `ω = cπ√(m² + n²)`; the in-plane partner field follows from the
/// curl equations and vanishes at `t = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CavityMode {
    pub mode: Mode,
    pub m: u32,
    pub n: u32,
    pub eps: f64,
    pub mu: f64,
}

impl CavityMode {
    pub fn new(mode: Mode, m: u32, n: u32) -> Self {
        Self {
            mode,
            m,
            n,
            eps: 1.0,
            mu: 1.0,
        }
    }

    pub fn omega(&self) -> f64 {
        let (m, n) = (f64::from(self.m), f64::from(self.n));
        PI * (m * m + n * n).sqrt() / (self.eps * self.mu).sqrt()
    }

    /// Out-of-plane component at `(x, y)`.
    pub fn normal_component(&self, x: f64, y: f64, t: f64) -> f64 {
        let (km, kn) = (PI * f64::from(self.m), PI * f64::from(self.n));
        let time = (self.omega() * t).cos();
        match self.mode {
            Mode::Tm => (km * x).sin() * (kn * y).sin() * time,
            Mode::Te => (km * x).cos() * (kn * y).cos() * time,
        }
    }

    /// In-plane component at `(x, y)`.
    pub fn tangential_field(&self, x: f64, y: f64, t: f64) -> [f64; 2] {
        let (km, kn) = (PI * f64::from(self.m), PI * f64::from(self.n));
        let w = self.omega();
        match self.mode {
            Mode::Tm => {
                let s = (w * t).sin() / (self.mu * w);
                [-kn * (km * x).sin() * (kn * y).cos() * s, km * (km * x).cos() * (kn * y).sin() * s]
            }
            Mode::Te => {
                let s = (w * t).sin() / (self.eps * w);
                [-kn * (km * x).cos() * (kn * y).sin() * s, km * (km * x).sin() * (kn * y).cos() * s]
            }
        }
    }

    /// Projects the exact mode onto cochains: edge values by midpoint-rule
    /// tangential integration, face values at the circumcenter.
    pub fn project(&self, surface: &SimplicialSurface, metrics: &DualMetrics, t: f64) -> FieldState {
        let mut state = FieldState::zeros(self.mode, surface);
        let verts = surface.vertices();
        *state.edge_field_mut() = surface
            .edges()
            .iter()
            .enumerate()
            .map(|(e, &[a, b])| {
                let mid = metrics.edge_midpoints[e];
                let [fx, fy] = self.tangential_field(mid.x, mid.y, t);
                let d = verts[b] - verts[a];
                fx * d.x + fy * d.y
            })
            .collect();
        *state.face_field_mut() = metrics
            .face_circumcenters
            .iter()
            .map(|c| self.normal_component(c.x, c.y, t))
            .collect();
        state.t = t;
        state
    }
}

/// Energy-weighted discrete L² distance between a state and the projected
/// mode: `√(Σ_e c_e star1 (x − x*)² + Σ_f c_f |P| (y − y*)²)`.
pub fn cavity_error(
    state: &FieldState,
    exact: &FieldState,
    metrics: &DualMetrics,
    materials: &MaterialParams,
) -> f64 {
    let edge_cap = materials.edge_capacity();
    let face_cap = materials.face_capacity();
    let edge: f64 = state
        .edge_field()
        .iter()
        .zip(exact.edge_field())
        .enumerate()
        .map(|(e, (a, b))| edge_cap[e] * metrics.dual_edge_len[e] / metrics.edge_len[e] * (a - b).powi(2))
        .sum();
    let face: f64 = state
        .face_field()
        .iter()
        .zip(exact.face_field())
        .enumerate()
        .map(|(f, (a, b))| face_cap[f] * metrics.face_area[f] * (a - b).powi(2))
        .sum();
    (edge + face).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorSample {
    pub h: f64,
    pub dt: f64,
    pub steps: usize,
    pub error: f64,
}

/// Nested cavity meshes (coarse to fine) plus the time-step schedule.
#[derive(Clone, Debug)]
pub struct ConvergenceStudy {
    pub meshes: Vec<SimplicialSurface>,
    pub cavity: CavityMode,
    pub final_time: f64,
    /// Joint refinement uses `Δt = dt_per_h · h` on every mesh.
    pub dt_per_h: f64,
    /// Time steps for the temporal study on the finest mesh.
    pub temporal_dts: Vec<f64>,
    pub options: StepperOptions,
}

#[derive(Clone, Debug)]
pub struct ConvergenceReport {
    pub joint: Vec<ErrorSample>,
    pub temporal: Vec<ErrorSample>,
    pub joint_order: f64,
    pub temporal_order: f64,
}

impl ConvergenceReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("study,h,dt,steps,error\n");
        for (name, rows) in [("joint", &self.joint), ("temporal", &self.temporal)] {
            for r in rows {
                out.push_str(&format!("{name},{:.17e},{:.17e},{},{:.17e}\n", r.h, r.dt, r.steps, r.error));
            }
        }
        out
    }

    pub fn summary(&self) -> String {
        format!(
            "joint refinement (dt ~ h) order: {:.4}\ntemporal refinement (fixed h) order: {:.4}\n",
            self.joint_order, self.temporal_order
        )
    }
}

/// Least-squares slope of `ln(error)` against `ln(x)`.
pub fn fit_order(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, e)| (x.ln(), e.ln())).collect();
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

fn check_nested(meshes: &[SimplicialSurface]) -> Result<(), AnalysisError> {
    for level in 1..meshes.len() {
        let coarse = &meshes[level - 1];
        let fine = &meshes[level];
        let scale = fine
            .vertices()
            .iter()
            .fold(0.0f64, |m, v| m.max(v.norm()))
            .max(1.0);
        let contained = coarse
            .vertices()
            .iter()
            .all(|v| fine.vertices().iter().any(|w| (v - w).norm() <= 1e-9 * scale));
        if !contained || fine.n_faces() <= coarse.n_faces() {
            return Err(AnalysisError::NotNested {
                level,
                coarser: level - 1,
            });
        }
    }
    Ok(())
}

fn run_to(
    surface: &SimplicialSurface,
    metrics: &DualMetrics,
    materials: &MaterialParams,
    cavity: &CavityMode,
    final_time: f64,
    dt_target: f64,
    options: StepperOptions,
) -> Result<ErrorSample, AnalysisError> {
    let steps = (final_time / dt_target).round().max(1.0) as usize;
    let dt = final_time / steps as f64;
    let stepper = ImplicitStepper::assemble(cavity.mode, surface, metrics, materials, dt, options)?;
    let mut state = cavity.project(surface, metrics, 0.0);
    state.t = 0.0;
    for _ in 0..steps {
        state = stepper.step(&state, &[])?;
    }
    let exact = cavity.project(surface, metrics, state.t);
    Ok(ErrorSample {
        h: metrics.max_edge_len(),
        dt,
        steps,
        error: cavity_error(&state, &exact, metrics, materials),
    })
}

/// Runs the cavity mode to `final_time` on each mesh with `Δt ∝ h`, then on
/// the finest mesh over the temporal schedule, and fits observed orders.
pub fn convergence_study(study: &ConvergenceStudy) -> Result<ConvergenceReport, AnalysisError> {
    if study.meshes.len() < 2 {
        return Err(AnalysisError::InvalidStudy("need at least two meshes".into()));
    }
    if study.temporal_dts.len() < 2 {
        return Err(AnalysisError::InvalidStudy("need at least two temporal time steps".into()));
    }
    if !(study.final_time > 0.0 && study.dt_per_h > 0.0) {
        return Err(AnalysisError::InvalidStudy("final_time and dt_per_h must be positive".into()));
    }
    check_nested(&study.meshes)?;

    let cav = &study.cavity;
    let mut joint = Vec::with_capacity(study.meshes.len());
    let mut finest = None;
    for surface in &study.meshes {
        let metrics = compute_dual_metrics(surface, false)?;
        let materials = MaterialParams::uniform(cav.mode, surface, cav.eps, cav.mu, 0.0, 0.0);
        let dt = study.dt_per_h * metrics.max_edge_len();
        joint.push(run_to(surface, &metrics, &materials, cav, study.final_time, dt, study.options)?);
        finest = Some((surface, metrics, materials));
    }
    let (surface, metrics, materials) = finest.expect("at least two meshes");
    let temporal = study
        .temporal_dts
        .iter()
        .map(|&dt| run_to(surface, &metrics, &materials, cav, study.final_time, dt, study.options))
        .collect::<Result<Vec<_>, _>>()?;

    let joint_order = fit_order(&joint.iter().map(|s| (s.h, s.error)).collect::<Vec<_>>());
    let temporal_order = fit_order(&temporal.iter().map(|s| (s.dt, s.error)).collect::<Vec<_>>());
    Ok(ConvergenceReport {
        joint,
        temporal,
        joint_order,
        temporal_order,
    })
}
