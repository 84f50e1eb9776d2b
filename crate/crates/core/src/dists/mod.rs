//! Analytic distributions, samplers, copula simulation, and numerical
//! quadrature/convolution. This is the oracle layer the synthetic studies and
//! the closed-form tests build on.
//!
//! All randomness flows through seeded ChaCha8 generators so that every
//! simulated quantity in the crate is reproducible bit-for-bit.

mod convolve;
mod copula;
mod marginal;
pub mod quad;

pub use convolve::ConvolvedDensity;
pub use copula::{sample_copula, CopulaDraws, CopulaSpec};
pub use marginal::{kurtosis_of_independent_sum, Marginal, EULER_GAMMA};
pub use quad::{integrate, integrate_with_tails, QuadError, QuadratureSpec};

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum DistError {
    #[error("invalid marginal: {0}")]
    InvalidMarginal(&'static str),
    #[error("unsupported marginal: {0}")]
    UnsupportedMarginal(&'static str),
    #[error("quantile level {0} outside (0, 1)")]
    InvalidQuantileLevel(f64),
    #[error(transparent)]
    Quadrature(#[from] QuadError),
}
