//! Sparse approximation toolkit: asymmetric restricted-isometry (aRIP)
//! constants, greedy recovery algorithms (CoSaMP, Subspace Pursuit,
//! Iterative Hard Thresholding), per-algorithm convergence factors, and
//! the recovery phase-transition curves they induce for Gaussian matrices.
//!
//! Module map:
//! * [`asymptotic`] — Gaussian aRIP bounds `L(delta, rho)`, `U(delta,
//!   rho)` from entropy-weighted implicit equations.
//! * [`finite`] — exact (enumerated) and Monte-Carlo-estimated aRIP
//!   constants of concrete matrices, plus the isometry-implication audit.
//! * [`factors`] — convergence factor `mu`, stability factor `xi`, offset
//!   `kappa`, iteration caps, and the ROMP guarantee condition.
//! * [`transition`] — root-finding for `mu = target` and stability level
//!   curves; oversampling constants are `1 / rho_star`.
//! * [`greedy`] — the three solvers with exact and noisy stopping.
//! * [`experiment`] — seeded instance generation and success-rate grids.
//!
//! The `parallel` feature (default on) runs enumeration, sweeps, and grid
//! sampling on rayon; disabling it yields a fully sequential build with
//! identical results.

pub mod asymptotic;
pub mod error;
pub mod experiment;
pub mod factors;
pub mod finite;
pub mod greedy;
pub mod transition;

mod exec;
mod roots;

pub use error::{Error, Result};
