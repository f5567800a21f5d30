use super::{Mode, SolverError};
use crate::mesh::SimplicialSurface;

/// Vacuum permittivity (F/m).
pub const EPS0: f64 = 8.854_187_812_8e-12;
/// Vacuum permeability (H/m).
pub const MU0: f64 = 1.256_637_062_12e-6;

/// Piecewise-constant media. `eps`/`sigma` live on the electric carriers
/// (edges in TE, faces in TM); `mu`/`sigma_m` on the magnetic ones.
#[derive(Clone, Debug, PartialEq)]
pub struct MaterialParams {
    pub mode: Mode,
    pub eps: Vec<f64>,
    pub mu: Vec<f64>,
    pub sigma: Vec<f64>,
    pub sigma_m: Vec<f64>,
    pub eps0: f64,
    pub mu0: f64,
}

fn counts(mode: Mode, surface: &SimplicialSurface) -> (usize, usize) {
    match mode {
        Mode::Te => (surface.n_edges(), surface.n_faces()),
        Mode::Tm => (surface.n_faces(), surface.n_edges()),
    }
}

impl MaterialParams {
    pub fn uniform(mode: Mode, surface: &SimplicialSurface, eps: f64, mu: f64, sigma: f64, sigma_m: f64) -> Self {
        let (ne, nm) = counts(mode, surface);
        Self {
            mode,
            eps: vec![eps; ne],
            mu: vec![mu; nm],
            sigma: vec![sigma; ne],
            sigma_m: vec![sigma_m; nm],
            eps0: EPS0,
            mu0: MU0,
        }
    }

    pub fn vacuum(mode: Mode, surface: &SimplicialSurface) -> Self {
        Self::uniform(mode, surface, EPS0, MU0, 0.0, 0.0)
    }

    /// Builds from per-face values. Quantities that live on edges take the
    /// mean over the edge's incident faces.
    pub fn from_face_values(
        mode: Mode,
        surface: &SimplicialSurface,
        eps: &[f64],
        mu: &[f64],
        sigma: &[f64],
        sigma_m: &[f64],
    ) -> Self {
        let to_edges = |face: &[f64]| -> Vec<f64> {
            (0..surface.n_edges())
                .map(|e| {
                    let cf = surface.cofaces(e);
                    cf.iter().map(|c| face[c.face]).sum::<f64>() / cf.len() as f64
                })
                .collect()
        };
        let (eps, sigma, mu, sigma_m) = match mode {
            Mode::Te => (to_edges(eps), to_edges(sigma), mu.to_vec(), sigma_m.to_vec()),
            Mode::Tm => (eps.to_vec(), sigma.to_vec(), to_edges(mu), to_edges(sigma_m)),
        };
        Self {
            mode,
            eps,
            mu,
            sigma,
            sigma_m,
            eps0: EPS0,
            mu0: MU0,
        }
    }

    pub fn validate(&self, surface: &SimplicialSurface) -> Result<(), SolverError> {
        let (ne, nm) = counts(self.mode, surface);
        let checks: [(&'static str, &[f64], usize, bool); 4] = [
            ("eps", &self.eps, ne, true),
            ("mu", &self.mu, nm, true),
            ("sigma", &self.sigma, ne, false),
            ("sigma_m", &self.sigma_m, nm, false),
        ];
        for (which, values, expected, strictly_positive) in checks {
            if values.len() != expected {
                return Err(SolverError::MaterialLength {
                    which,
                    expected,
                    got: values.len(),
                });
            }
            for (index, &value) in values.iter().enumerate() {
                let ok = value.is_finite() && if strictly_positive { value > 0.0 } else { value >= 0.0 };
                if !ok {
                    return Err(SolverError::InvalidMaterial { which, index, value });
                }
            }
        }
        Ok(())
    }

    /// Time-derivative coefficient of the edge field (ε in TE, μ in TM).
    pub fn edge_capacity(&self) -> &[f64] {
        match self.mode {
            Mode::Te => &self.eps,
            Mode::Tm => &self.mu,
        }
    }

    pub fn edge_loss(&self) -> &[f64] {
        match self.mode {
            Mode::Te => &self.sigma,
            Mode::Tm => &self.sigma_m,
        }
    }

    /// Time-derivative coefficient of the face field (μ in TE, ε in TM).
    pub fn face_capacity(&self) -> &[f64] {
        match self.mode {
            Mode::Te => &self.mu,
            Mode::Tm => &self.eps,
        }
    }

    pub fn face_loss(&self) -> &[f64] {
        match self.mode {
            Mode::Te => &self.sigma_m,
            Mode::Tm => &self.sigma,
        }
    }

    /// Largest wave speed `1/√(εμ)` over the mesh, pairing each face with
    /// its edges.
    pub fn max_wave_speed(&self, surface: &SimplicialSurface) -> f64 {
        let edge = self.edge_capacity();
        let face = self.face_capacity();
        let mut fastest: f64 = 0.0;
        for f in 0..surface.n_faces() {
            for (e, _) in surface.face_edges(f) {
                fastest = fastest.max(1.0 / (edge[e] * face[f]).sqrt());
            }
        }
        fastest
    }
}
