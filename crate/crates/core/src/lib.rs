//! Dynamic parameter prediction for variational quantum training.
//!
//! A small statevector simulator, circuit builders, gradient estimators, the
//! NaP/AdaP weight predictors and an experiment harness for QAOA MaxCut, VQE
//! and hybrid QNN classification.

pub mod circuits;
pub mod dypp;
pub mod error;
pub mod gradopt;
pub mod harness;
pub mod rng;
pub mod simcore;
pub mod workloads;

pub use error::{Error, Result};
pub use rng::{derive_seed, rng_from_seed, Rng};
