use super::{Mode, SolverError};
use crate::mesh::SimplicialSurface;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SourceKind {
    None,
    GaussianPulse,
}

/// Which current a source drives.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Current {
    /// `J_e`: on edges in TE, on faces in TM.
    Electric,
    /// `J_m`: on faces in TE, on edges in TM.
    Magnetic,
}

/// A prescribed current density `amplitude · exp(−((t − t0)/width)²)`,
/// applied uniformly on `support`. Values are pointwise densities; the
/// stepper scales them by the carrier measures.
#[derive(Clone, Debug, PartialEq)]
pub struct SourceSpec {
    pub kind: SourceKind,
    pub current: Current,
    pub amplitude: f64,
    pub t0: f64,
    pub width: f64,
    pub support: Vec<usize>,
}

impl Default for SourceSpec {
    fn default() -> Self {
        Self {
            kind: SourceKind::None,
            current: Current::Magnetic,
            amplitude: 0.0,
            t0: 0.0,
            width: 1.0,
            support: Vec::new(),
        }
    }
}

impl SourceSpec {
    pub fn gaussian(current: Current, amplitude: f64, t0: f64, width: f64, support: Vec<usize>) -> Self {
        Self {
            kind: SourceKind::GaussianPulse,
            current,
            amplitude,
            t0,
            width,
            support,
        }
    }

    /// True when the source lives on edges for the given polarization.
    pub fn on_edges(&self, mode: Mode) -> bool {
        matches!(
            (mode, self.current),
            (Mode::Te, Current::Electric) | (Mode::Tm, Current::Magnetic)
        )
    }

    pub fn waveform(&self, t: f64) -> f64 {
        match self.kind {
            SourceKind::None => 0.0,
            SourceKind::GaussianPulse => {
                let s = (t - self.t0) / self.width;
                self.amplitude * (-s * s).exp()
            }
        }
    }

    pub fn validate(&self, mode: Mode, surface: &SimplicialSurface) -> Result<(), SolverError> {
        if self.kind == SourceKind::None {
            return Ok(());
        }
        if !(self.width > 0.0 && self.width.is_finite()) {
            return Err(SolverError::Source(format!("width must be positive, got {}", self.width)));
        }
        if !self.amplitude.is_finite() || !self.t0.is_finite() {
            return Err(SolverError::Source("amplitude and t0 must be finite".into()));
        }
        let (count, what) = if self.on_edges(mode) {
            (surface.n_edges(), "edge")
        } else {
            (surface.n_faces(), "face")
        };
        if let Some(&bad) = self.support.iter().find(|&&i| i >= count) {
            return Err(SolverError::Source(format!(
                "support {what} index {bad} out of range (mesh has {count})"
            )));
        }
        Ok(())
    }
}
