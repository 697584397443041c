//! Bayesian quantum circuits on a dense state-vector simulator.
//!
//! Ancilla qubits carry a latent variable λ whose distribution P(λ) is
//! prepared by prior blocks; ancilla-controlled blocks on the data register
//! shape the likelihood P(x | λ). Measuring the whole register gives the
//! joint P(x, λ), from which [`probability`] extracts priors, likelihoods
//! and posteriors. [`trainer`] fits either parameter family by minimizing
//! the squared maximum mean discrepancy in [`loss`].

pub mod circuits;
pub mod datasets;
pub mod error;
pub mod loss;
pub mod probability;
pub mod statevector;
pub mod trainer;

pub use error::{BqcError, Result};
