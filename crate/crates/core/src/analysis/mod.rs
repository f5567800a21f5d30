//! Stability and accuracy diagnostics for the implicit scheme.

mod convergence;
mod growth;

pub use convergence::{
    cavity_error, convergence_study, fit_order, CavityMode, ConvergenceReport, ConvergenceStudy, ErrorSample,
};
pub use growth::{
    default_k_grid, growth_factor, quadratic_roots, stability_sweep, EmpiricalCheck, GrowthFactor,
    GrowthFactorReport, GrowthSample, PHI,
};

use thiserror::Error;

use crate::mesh::MeshError;
use crate::solver::SolverError;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("face {face}: dual edge {edge} has zero length")]
    ZeroDualEdge { face: usize, edge: usize },
    #[error("spatial frequency must be finite and non-negative, got {0}")]
    InvalidFrequency(f64),
    #[error("time step must be non-negative and finite, got {0}")]
    InvalidTimeStep(f64),
    #[error("mesh family is not nested: level {level} does not contain the vertices of level {coarser}")]
    NotNested { level: usize, coarser: usize },
    #[error("invalid study: {0}")]
    InvalidStudy(String),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}
