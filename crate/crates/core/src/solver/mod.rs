//! Implicit TE/TM time stepping on a triangulated surface.
//!
//! Both polarizations share one layout: an *edge field* stored as a primal
//! 1-cochain (integrated along edges) and a *face field* stored as a dual
//! 0-cochain (pointwise at circumcenters). In TE the edge field is E and the
//! face field is H; in TM the roles swap. Each step solves the coupled
//! backward-Euler system by eliminating the edge field, leaving one
//! symmetric positive-definite system on faces.

mod gauss;
mod materials;
mod source;
mod state;
mod stepper;

pub use gauss::{gauss_residuals, GaussResiduals};
pub use materials::{MaterialParams, EPS0, MU0};
pub use source::{Current, SourceKind, SourceSpec};
pub use state::{field_energy, FieldState};
pub use stepper::{Boundary, ImplicitStepper, LinearSolver, StencilRow, StepperOptions, Unknown};

use thiserror::Error;

use crate::sparse::SolveError;

/// Wave polarization.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    /// E on edges, H on faces.
    Te,
    /// H on edges, E on faces.
    Tm,
}

impl Mode {
    /// Sign of the curl coupling in the edge-field update.
    pub(crate) fn curl_sign(self) -> f64 {
        match self {
            Mode::Te => 1.0,
            Mode::Tm => -1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Mode::Te => "TE",
            Mode::Tm => "TM",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "TE" => Ok(Mode::Te),
            "TM" => Ok(Mode::Tm),
            other => Err(format!("unknown mode '{other}' (expected TE or TM)")),
        }
    }
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("time step must be positive and finite, got {0}")]
    InvalidTimeStep(f64),
    #[error("material {which}[{index}] = {value} is out of range")]
    InvalidMaterial {
        which: &'static str,
        index: usize,
        value: f64,
    },
    #[error("material {which} has {got} entries, expected {expected}")]
    MaterialLength {
        which: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("materials are for {materials:?} but the stepper runs {mode:?}")]
    MaterialMode { mode: Mode, materials: Mode },
    #[error("indefinite system: {what}[{index}] = {value:.3e}")]
    Indefinite {
        what: &'static str,
        index: usize,
        value: f64,
    },
    #[error("state is {state:?} but the stepper runs {stepper:?}")]
    ModeMismatch { stepper: Mode, state: Mode },
    #[error("state {which} has {got} values, expected {expected}")]
    StateLength {
        which: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("direct solver is limited to fewer than {limit} unknowns, system has {n}")]
    DirectTooLarge { n: usize, limit: usize },
    #[error("invalid source: {0}")]
    Source(String),
    #[error("initial data violates Gauss's law: max residual {max:.3e} exceeds {tolerance:.3e}")]
    GaussViolation { max: f64, tolerance: f64 },
    #[error("linear solve failed: {0}")]
    Solve(#[from] SolveError),
}
