//! Ground-state phase diagram of the finite-size Dicke model with
//! counter-rotating and degenerate parametric terms.
//!
//! The crate diagonalizes `H = ω_f a†a + ω_a Jz + (λ/√N)(a + a†)(J+ + J−) +
//! κ(a + a†)²` in a truncated Fock ⊗ Dicke basis, evaluates field, spin and
//! entanglement statistics of the ground state, and compares them with
//! closed-form weak- and strong-coupling predictions.
//!
//! ```
//! use dicke_pdc::model::ModelParams;
//! use dicke_pdc::point::evaluate_point;
//! use dicke_pdc::spectral::TruncationConfig;
//!
//! let p = ModelParams::resonant(2, 0.0, 0.0).unwrap();
//! let eval = evaluate_point(&p, &TruncationConfig::default()).unwrap();
//! assert_eq!(eval.report.observables.mean_jz, -1.0);
//! ```

pub mod analytic;
pub mod entanglement;
pub mod error;
pub mod model;
pub mod observables;
pub mod operators;
pub mod point;
pub mod spectral;
pub mod sweep;
pub mod markers;

pub use error::{Error, Result};
