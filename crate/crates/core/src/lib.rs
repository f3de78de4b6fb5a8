//! Born-Infeld-Coulomb hydrogen ground state.
//!
//! The crate evaluates the Born-Infeld-Coulomb (BIC) screening function and
//! potential shape by singular quadrature, fits a four-parameter Morse-type
//! surrogate to it, quantizes the surrogate analytically through the first
//! zero of the Whittaker M function, and cross-checks the resulting energies
//! with an independent Numerov shooting solver.
//!
//! Units follow the usual relativistic atomic convention: `ħ = m_e = c = 1`,
//! lengths in electron Compton wavelengths, and the dimensionless radius
//! `ρ = r/β` where `β` is Born's parameter.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Quadrature nodes and reference constants keep their published digits.
#![allow(clippy::excessive_precision)]

pub mod analytic_solver;
pub mod bic_potential;
pub mod error;
pub mod morse_fit;
pub mod numerov_oracle;
pub mod quadrature;
pub mod roots;
pub mod specfun;
pub mod spline;

pub use analytic_solver::{AnalyticSolution, ModelConstants};
pub use bic_potential::{PotentialKind, PotentialTable, UnitsNote};
pub use error::{Error, Result};
pub use morse_fit::{FitConfig, FitObjective, FitReport, MorseParams};
pub use numerov_oracle::{OracleResult, RadialProblem};
pub use quadrature::{QuadResult, QuadSpec};
pub use specfun::SeriesControl;

/// Fine structure constant used throughout.
pub const ALPHA: f64 = 1.0 / 137.036;
