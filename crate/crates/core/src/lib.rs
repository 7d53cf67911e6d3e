//! Differential privacy for bootstrap resampling.
//!
//! * [`tradeoff`]: tradeoff curves, mixtures, the subsampling operator and
//!   conversion to and from `(eps, delta)` profiles.
//! * [`accountant`]: occupancy probabilities, the bootstrap privacy bound,
//!   budget planning and numeric composition.
//! * [`mechanisms`]: the Gaussian mechanism and the private bootstrap sampler.
//! * [`inference`]: deconvolution of noisy bootstrap estimates and confidence
//!   intervals.
//! * [`baselines`]: parametric-bootstrap intervals from noisy moments.
//! * [`diagnostics`]: reference computations for two counterexamples.

pub mod accountant;
pub mod baselines;
pub mod diagnostics;
pub mod error;
pub mod inference;
pub mod mechanisms;
pub mod normal;
pub mod tradeoff;

pub use error::{DpError, Result};
