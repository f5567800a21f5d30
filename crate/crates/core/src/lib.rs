//! Implicit discrete-exterior-calculus Maxwell solver on triangulated surfaces.
//!
//! * [`mesh`]: OBJ loading, orientation, incidence matrices, circumcentric duals.
//! * [`dec`]: cochains, exterior derivative, diagonal Hodge stars, gauge operators.
//! * [`solver`]: the TE/TM implicit steppers and Gauss-law diagnostics.
//! * [`analysis`]: growth-factor stability analysis and convergence studies.
//! * [`cli`]: configuration, run orchestration, and file output.

pub mod analysis;
pub mod cli;
pub mod dec;
pub mod mesh;
pub mod solver;
pub mod sparse;
