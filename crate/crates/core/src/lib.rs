//! Random wavelet-series kernels on the dyadic half line.
//!
//! The crate evaluates kernels `K(x, y; omega) = sum_I a_I psi_I(x) psi_I(y)`
//! with independent subgaussian coefficients `a_I`, the operators they
//! define, and Monte Carlo experiments that check their size, regularity
//! and concentration bounds against certified analytic values.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dyadic;
pub mod error;
pub mod experiments;
pub mod operator;
pub mod randkernel;
pub mod stats;
pub mod subgauss;
pub mod wavelets;

pub use dyadic::{dyadic_distance, smallest_common, DyadicIndex, DyadicPoint};
pub use error::{Error, Result};
pub use experiments::{ExperimentConfig, ExperimentKind, Outcome, Summary};
pub use randkernel::{KernelJob, KernelValue, PreparedPair};
pub use stats::McEstimate;
pub use subgauss::{CoefficientModel, Distribution, MeanProfile, Realization, SeedPath};
pub use wavelets::{Quantity, WaveletFamily};
