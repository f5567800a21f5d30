use nalgebra::{Cholesky, DMatrix, DVector, Dyn, LU};

use super::{FieldState, MaterialParams, Mode, SolverError, SourceSpec};
use crate::mesh::{DualMetrics, SimplicialSurface};
use crate::sparse::{conjugate_gradient, CgOptions, CsrMatrix, SolveStats};

/// Dense factorizations are only offered below this many face unknowns.
pub const DIRECT_LIMIT: usize = 2000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Boundary {
    /// Tangential E vanishes on the boundary. In TE the boundary edges are
    /// pinned to zero; in TM the missing neighbour across a boundary edge
    /// contributes a zero E value.
    Pec,
    /// Every edge evolves; a missing neighbour face contributes zero.
    Natural,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LinearSolver {
    /// Jacobi-preconditioned CG. `max_iters` defaults to `10·√n`.
    Iterative { tolerance: f64, max_iters: Option<usize> },
    /// Dense Cholesky (LU when indefinite systems are allowed), factored once.
    Direct,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepperOptions {
    pub solver: LinearSolver,
    pub boundary: Boundary,
    /// Accept negative Hodge star entries from signed dual metrics.
    pub allow_indefinite: bool,
    /// Sign applied to magnetic currents. `+1` puts `+J_m` on the left of
    /// the magnetic update.
    pub jm_sign: f64,
}

impl Default for StepperOptions {
    fn default() -> Self {
        Self {
            solver: LinearSolver::Iterative {
                tolerance: 1e-10,
                max_iters: None,
            },
            boundary: Boundary::Pec,
            allow_indefinite: false,
            jm_sign: 1.0,
        }
    }
}

enum DirectFactor {
    Cholesky(Cholesky<f64, Dyn>),
    Lu(LU<f64, Dyn, Dyn>),
}

/// Unknown in a pointwise stencil row.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Unknown {
    Edge(usize),
    Face(usize),
}

/// One row of the coupled update, divided through by the carrier measure so
/// that the coefficients act on pointwise values (edge value / |e|, face
/// value as stored):
///
/// `Σ new · u^{n+1} = Σ old · u^n + source · J^{n+½}`
#[derive(Clone, Debug, PartialEq)]
pub struct StencilRow {
    pub unknown: Unknown,
    pub new: Vec<(Unknown, f64)>,
    pub old: Vec<(Unknown, f64)>,
    pub source: f64,
}

/// Assembled implicit update for one mesh, material set, and time step.
///
/// Written on cochains, the update is
///
/// ```text
/// α ⊙ x' = γ ⊙ x + s·Cᵀ y' − |*e| ⊙ J_edge
/// β|P| ⊙ y' = δ|P| ⊙ y − s·C x' − |P| ⊙ J_face
/// ```
///
/// with `x` the edge cochain, `y` the pointwise face field, `C` the rows of
/// d1 restricted to evolving edges, `s = +1` (TE) or `−1` (TM),
/// `α = (c/Δt + σ/2)·star1`, `γ = (c/Δt − σ/2)·star1` and `β`, `δ` the face
/// counterparts. Eliminating `x'` leaves `S y' = rhs` with
/// `S = diag(β|P|) + C α⁻¹ Cᵀ`.
pub struct ImplicitStepper {
    mode: Mode,
    dt: f64,
    options: StepperOptions,
    n_edges: usize,
    active: Vec<usize>,
    alpha: Vec<f64>,
    gamma: Vec<f64>,
    dual_len: Vec<f64>,
    edge_len: Vec<f64>,
    beta_area: Vec<f64>,
    delta_area: Vec<f64>,
    area: Vec<f64>,
    curl: CsrMatrix,
    schur: CsrMatrix,
    factor: Option<DirectFactor>,
    indefinite: bool,
}

impl std::fmt::Debug for ImplicitStepper {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ImplicitStepper")
            .field("mode", &self.mode)
            .field("dt", &self.dt)
            .field("unknown_edges", &self.active.len())
            .field("unknown_faces", &self.area.len())
            .field("indefinite", &self.indefinite)
            .finish()
    }
}

impl ImplicitStepper {
    pub fn assemble(
        mode: Mode,
        surface: &SimplicialSurface,
        metrics: &DualMetrics,
        materials: &MaterialParams,
        dt: f64,
        options: StepperOptions,
    ) -> Result<Self, SolverError> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(SolverError::InvalidTimeStep(dt));
        }
        if materials.mode != mode {
            return Err(SolverError::MaterialMode {
                mode,
                materials: materials.mode,
            });
        }
        materials.validate(surface)?;

        let pin_boundary = mode == Mode::Te && options.boundary == Boundary::Pec;
        let active: Vec<usize> = (0..surface.n_edges())
            .filter(|&e| !(pin_boundary && surface.is_boundary_edge(e)))
            .collect();

        let edge_cap = materials.edge_capacity();
        let edge_loss = materials.edge_loss();
        let mut alpha = Vec::with_capacity(active.len());
        let mut gamma = Vec::with_capacity(active.len());
        let mut dual_len = Vec::with_capacity(active.len());
        let mut edge_len = Vec::with_capacity(active.len());
        let mut indefinite = false;
        for &e in &active {
            let star1 = metrics.dual_edge_len[e] / metrics.edge_len[e];
            let a = (edge_cap[e] / dt + 0.5 * edge_loss[e]) * star1;
            if !(a > 0.0) {
                let negative_star = star1 < 0.0;
                if !(negative_star && options.allow_indefinite) {
                    return Err(SolverError::Indefinite {
                        what: "alpha",
                        index: e,
                        value: a,
                    });
                }
                indefinite = true;
            }
            alpha.push(a);
            gamma.push((edge_cap[e] / dt - 0.5 * edge_loss[e]) * star1);
            dual_len.push(metrics.dual_edge_len[e]);
            edge_len.push(metrics.edge_len[e]);
        }

        let face_cap = materials.face_capacity();
        let face_loss = materials.face_loss();
        let area = metrics.face_area.clone();
        let mut beta_area = Vec::with_capacity(area.len());
        let mut delta_area = Vec::with_capacity(area.len());
        for (f, &a) in area.iter().enumerate() {
            let b = (face_cap[f] / dt + 0.5 * face_loss[f]) * a;
            if !(b > 0.0) {
                return Err(SolverError::Indefinite {
                    what: "beta",
                    index: f,
                    value: b,
                });
            }
            beta_area.push(b);
            delta_area.push((face_cap[f] / dt - 0.5 * face_loss[f]) * a);
        }

        let nf = surface.n_faces();
        let mut curl_t = Vec::with_capacity(3 * nf);
        let mut schur_t: Vec<(usize, usize, f64)> = beta_area.iter().enumerate().map(|(f, &b)| (f, f, b)).collect();
        for (slot, &e) in active.iter().enumerate() {
            let cf = surface.cofaces(e);
            for c in cf {
                curl_t.push((c.face, slot, f64::from(c.sign)));
            }
            for ci in cf {
                for cj in cf {
                    schur_t.push((ci.face, cj.face, f64::from(ci.sign * cj.sign) / alpha[slot]));
                }
            }
        }
        let curl = CsrMatrix::from_triplets(nf, active.len(), curl_t);
        let schur = CsrMatrix::from_triplets(nf, nf, schur_t);

        let factor = match options.solver {
            LinearSolver::Direct => {
                if nf >= DIRECT_LIMIT {
                    return Err(SolverError::DirectTooLarge {
                        n: nf,
                        limit: DIRECT_LIMIT,
                    });
                }
                let dense = schur.to_dense();
                match Cholesky::new(dense.clone()) {
                    Some(c) => Some(DirectFactor::Cholesky(c)),
                    None if indefinite => Some(DirectFactor::Lu(dense.lu())),
                    None => {
                        return Err(SolverError::Indefinite {
                            what: "schur pivot",
                            index: 0,
                            value: f64::NAN,
                        })
                    }
                }
            }
            LinearSolver::Iterative { .. } => None,
        };

        Ok(Self {
            mode,
            dt,
            options,
            n_edges: surface.n_edges(),
            active,
            alpha,
            gamma,
            dual_len,
            edge_len,
            beta_area,
            delta_area,
            area,
            curl,
            schur,
            factor,
            indefinite,
        })
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn options(&self) -> &StepperOptions {
        &self.options
    }

    /// Negative star entries were accepted; the system may be indefinite.
    pub fn is_indefinite(&self) -> bool {
        self.indefinite
    }

    /// Edges that evolve (the rest are pinned to zero).
    pub fn active_edges(&self) -> &[usize] {
        &self.active
    }

    /// The reduced face system `S`.
    pub fn schur(&self) -> &CsrMatrix {
        &self.schur
    }

    pub fn n_unknowns(&self) -> usize {
        self.area.len()
    }

    fn max_iters(&self) -> usize {
        match self.options.solver {
            LinearSolver::Iterative {
                max_iters: Some(m), ..
            } => m,
            _ => ((self.area.len() as f64).sqrt().ceil() as usize * 10).max(10),
        }
    }

    /// Pointwise current densities at time `t`, split by carrier.
    fn currents(&self, sources: &[SourceSpec], t: f64) -> (Vec<f64>, Vec<f64>) {
        let mut edge = vec![0.0; self.n_edges];
        let mut face = vec![0.0; self.area.len()];
        for s in sources {
            let mut w = s.waveform(t);
            if s.current == super::Current::Magnetic {
                w *= self.options.jm_sign;
            }
            if w == 0.0 {
                continue;
            }
            let target = if s.on_edges(self.mode) { &mut edge } else { &mut face };
            for &i in &s.support {
                target[i] += w;
            }
        }
        (edge, face)
    }

    fn check_state(&self, state: &FieldState) -> Result<(), SolverError> {
        if state.mode != self.mode {
            return Err(SolverError::ModeMismatch {
                stepper: self.mode,
                state: state.mode,
            });
        }
        let checks = [
            ("edge field", state.edge_field().len(), self.n_edges),
            ("face field", state.face_field().len(), self.area.len()),
        ];
        for (which, got, expected) in checks {
            if got != expected {
                return Err(SolverError::StateLength { which, expected, got });
            }
        }
        Ok(())
    }

    /// Advances `n → n+1`. Currents are sampled at `t + Δt/2`.
    pub fn step(&self, state: &FieldState, sources: &[SourceSpec]) -> Result<FieldState, SolverError> {
        self.step_with_stats(state, sources).map(|(s, _)| s)
    }

    pub fn step_with_stats(
        &self,
        state: &FieldState,
        sources: &[SourceSpec],
    ) -> Result<(FieldState, SolveStats), SolverError> {
        self.check_state(state)?;
        let s = self.mode.curl_sign();
        let (j_edge, j_face) = self.currents(sources, state.t + 0.5 * self.dt);
        let x = state.edge_field();
        let y = state.face_field();

        let g: Vec<f64> = self
            .active
            .iter()
            .enumerate()
            .map(|(k, &e)| self.gamma[k] * x[e] - self.dual_len[k] * j_edge[e])
            .collect();
        let w: Vec<f64> = g.iter().zip(&self.alpha).map(|(gi, a)| gi / a).collect();
        let cw = self.curl.mul_vec(&w);
        let rhs: Vec<f64> = (0..self.area.len())
            .map(|f| self.delta_area[f] * y[f] - self.area[f] * j_face[f] - s * cw[f])
            .collect();

        let mut y_new = y.to_vec();
        let stats = self.solve(&rhs, &mut y_new)?;

        let mut ct_y = vec![0.0; self.active.len()];
        for f in 0..self.area.len() {
            for (k, v) in self.curl.row(f) {
                ct_y[k] += v * y_new[f];
            }
        }
        let mut x_new = vec![0.0; self.n_edges];
        for (k, &e) in self.active.iter().enumerate() {
            x_new[e] = (g[k] + s * ct_y[k]) / self.alpha[k];
        }

        let mut next = FieldState {
            mode: self.mode,
            e: Vec::new(),
            h: Vec::new(),
            n: state.n + 1,
            t: (state.n + 1) as f64 * self.dt,
        };
        *next.edge_field_mut() = x_new;
        *next.face_field_mut() = y_new;
        Ok((next, stats))
    }

    fn solve(&self, rhs: &[f64], y: &mut [f64]) -> Result<SolveStats, SolverError> {
        match (&self.factor, self.options.solver) {
            (Some(factor), _) => {
                let b = DVector::from_column_slice(rhs);
                let sol = match factor {
                    DirectFactor::Cholesky(c) => c.solve(&b),
                    DirectFactor::Lu(lu) => lu.solve(&b).ok_or(SolverError::Indefinite {
                        what: "schur pivot",
                        index: 0,
                        value: 0.0,
                    })?,
                };
                y.copy_from_slice(sol.as_slice());
                let r = self.schur.mul_vec(y);
                let bn = rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
                let rn = r.iter().zip(rhs).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                Ok(SolveStats {
                    iterations: 1,
                    relative_residual: if bn > 0.0 { rn / bn } else { 0.0 },
                })
            }
            (None, LinearSolver::Iterative { tolerance, .. }) => Ok(conjugate_gradient(
                &self.schur,
                rhs,
                y,
                CgOptions {
                    tolerance,
                    max_iters: self.max_iters(),
                    // unscaled, with breakdown detection, when signs may flip
                    jacobi: !self.indefinite,
                    indefinite: self.indefinite,
                },
            )?),
            (None, LinearSolver::Direct) => unreachable!("direct solver always factors at assembly"),
        }
    }

    /// The coupled update written per unknown in pointwise variables, read
    /// back from the assembled coefficients.
    pub fn stencil_rows(&self) -> Vec<StencilRow> {
        let s = self.mode.curl_sign();
        let mut rows = Vec::with_capacity(self.active.len() + self.area.len());
        // edge rows, divided by |*e|; the edge unknown is x/|e|
        let mut edge_rows: Vec<Vec<(Unknown, f64)>> = vec![Vec::new(); self.active.len()];
        for f in 0..self.area.len() {
            for (k, v) in self.curl.row(f) {
                edge_rows[k].push((Unknown::Face(f), -s * v / self.dual_len[k]));
            }
        }
        for (k, &e) in self.active.iter().enumerate() {
            let scale = self.edge_len[k] / self.dual_len[k];
            let mut new = vec![(Unknown::Edge(e), self.alpha[k] * scale)];
            new.extend(edge_rows[k].iter().copied());
            rows.push(StencilRow {
                unknown: Unknown::Edge(e),
                new,
                old: vec![(Unknown::Edge(e), self.gamma[k] * scale)],
                source: -1.0,
            });
        }
        // face rows, divided by |P|
        for f in 0..self.area.len() {
            let mut new = vec![(Unknown::Face(f), self.beta_area[f] / self.area[f])];
            for (k, v) in self.curl.row(f) {
                new.push((Unknown::Edge(self.active[k]), s * v * self.edge_len[k] / self.area[f]));
            }
            rows.push(StencilRow {
                unknown: Unknown::Face(f),
                new,
                old: vec![(Unknown::Face(f), self.delta_area[f] / self.area[f])],
                source: -1.0,
            });
        }
        rows
    }

    /// Dense copy of `S` for inspection on small meshes.
    pub fn schur_dense(&self) -> DMatrix<f64> {
        self.schur.to_dense()
    }
}
