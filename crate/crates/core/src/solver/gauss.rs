use super::{FieldState, MaterialParams, Mode};
use crate::mesh::{DualMetrics, SimplicialSurface};

/// Gauss-law residuals of a field state.
///
/// The constraint on the edge field (electric in TE, magnetic in TM) lives on
/// dual vertex cells: `d0ᵀ·star1·(c·x) − star0·ρ`. The face field is a top
/// form on the surface, so its divergence has no carriers; that residual is
/// reported as a structurally zero per-face vector.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussResiduals {
    pub mode: Mode,
    pub electric: Vec<f64>,
    pub magnetic: Vec<f64>,
}

impl GaussResiduals {
    /// The per-vertex constraint (electric in TE, magnetic in TM).
    pub fn vertex_residual(&self) -> &[f64] {
        match self.mode {
            Mode::Te => &self.electric,
            Mode::Tm => &self.magnetic,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.vertex_residual().iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest residual over vertices not touching the boundary.
    pub fn max_abs_interior(&self, surface: &SimplicialSurface) -> f64 {
        let on_boundary = surface.boundary_vertices();
        self.vertex_residual()
            .iter()
            .zip(on_boundary)
            .filter(|(_, b)| !b)
            .fold(0.0, |m, (v, _)| m.max(v.abs()))
    }
}

/// `charges` are pointwise densities per vertex for the constrained field
/// (ρ_e in TE, ρ_m in TM); `None` means zero.
pub fn gauss_residuals(
    state: &FieldState,
    surface: &SimplicialSurface,
    metrics: &DualMetrics,
    materials: &MaterialParams,
    charges: Option<&[f64]>,
) -> GaussResiduals {
    let cap = materials.edge_capacity();
    let flux: Vec<f64> = state
        .edge_field()
        .iter()
        .enumerate()
        .map(|(e, &x)| cap[e] * metrics.dual_edge_len[e] / metrics.edge_len[e] * x)
        .collect();
    let mut vertex = surface.d0().apply_transpose(&flux);
    if let Some(rho) = charges {
        for ((r, q), area) in vertex.iter_mut().zip(rho).zip(&metrics.dual_vertex_area) {
            *r -= area * q;
        }
    }
    let structural = vec![0.0; surface.n_faces()];
    match state.mode {
        Mode::Te => GaussResiduals {
            mode: Mode::Te,
            electric: vertex,
            magnetic: structural,
        },
        Mode::Tm => GaussResiduals {
            mode: Mode::Tm,
            electric: structural,
            magnetic: vertex,
        },
    }
}
