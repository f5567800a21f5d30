use super::{MaterialParams, Mode};
use crate::mesh::{DualMetrics, SimplicialSurface};

/// Field unknowns at time index `n`.
///
/// `e` and `h` are stored by role: in TE `e` is a primal 1-cochain on edges
/// (`E·t |e|`) and `h` is pointwise per face; in TM `e` is pointwise per face
/// and `h` is a primal 1-cochain on edges.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldState {
    pub mode: Mode,
    pub e: Vec<f64>,
    pub h: Vec<f64>,
    pub n: u64,
    pub t: f64,
}

impl FieldState {
    pub fn zeros(mode: Mode, surface: &SimplicialSurface) -> Self {
        let (ne, nh) = match mode {
            Mode::Te => (surface.n_edges(), surface.n_faces()),
            Mode::Tm => (surface.n_faces(), surface.n_edges()),
        };
        Self {
            mode,
            e: vec![0.0; ne],
            h: vec![0.0; nh],
            n: 0,
            t: 0.0,
        }
    }

    /// The field stored on edges.
    pub fn edge_field(&self) -> &[f64] {
        match self.mode {
            Mode::Te => &self.e,
            Mode::Tm => &self.h,
        }
    }

    /// The field stored on faces.
    pub fn face_field(&self) -> &[f64] {
        match self.mode {
            Mode::Te => &self.h,
            Mode::Tm => &self.e,
        }
    }

    pub fn edge_field_mut(&mut self) -> &mut Vec<f64> {
        match self.mode {
            Mode::Te => &mut self.e,
            Mode::Tm => &mut self.h,
        }
    }

    pub fn face_field_mut(&mut self) -> &mut Vec<f64> {
        match self.mode {
            Mode::Te => &mut self.h,
            Mode::Tm => &mut self.e,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.e.iter().chain(&self.h).all(|v| v.is_finite())
    }
}

/// `½ (xᵀ (c_e·star1) x + yᵀ (c_f·star2⁻¹) y)` for edge field `x`, face field `y`,
/// with `c_e`, `c_f` the matching capacities (ε, μ in TE).
pub fn field_energy(state: &FieldState, materials: &MaterialParams, metrics: &DualMetrics) -> f64 {
    let edge_cap = materials.edge_capacity();
    let face_cap = materials.face_capacity();
    let edge: f64 = state
        .edge_field()
        .iter()
        .enumerate()
        .map(|(e, &x)| edge_cap[e] * metrics.dual_edge_len[e] / metrics.edge_len[e] * x * x)
        .sum();
    let face: f64 = state
        .face_field()
        .iter()
        .enumerate()
        .map(|(f, &y)| face_cap[f] * metrics.face_area[f] * y * y)
        .sum();
    0.5 * (edge + face)
}
