//! Maximum-likelihood MIMO detection under unknown hardware impairments.
//!
//! The receiver never sees the transmit power-amplifier or the receive ADC
//! models. Instead it estimates the per-symbol likelihood functions (LFs)
//! from its own online received signals:
//!
//! 1. the first received data signals become *base samples*, which are
//!    expanded into `J` augmented datasets by injecting Gaussian, uniform
//!    and Laplace noise ([`augmentation`]);
//! 2. each dataset yields one set of LF estimates, either with a
//!    diagonal-covariance EM fit ([`lf_em`]) or a labeled kernel density
//!    estimate ([`lf_kde`]);
//! 3. the `J` estimates are combined with uniform, Dirichlet-probabilistic
//!    or max weights and used for ML detection ([`boosting`]).
//!
//! [`pipeline`] wires this together for time-invariant blocks and for
//! time-varying blocks split into sub-blocks, next to the CE-based,
//! oracle, and EM-without-augmentation baselines. [`harness`] runs Monte
//! Carlo sweeps and owns the CLI.

pub mod augmentation;
pub mod boosting;
pub mod channel;
pub mod harness;
pub mod impairments;
pub mod lf_em;
pub mod likelihood;
pub mod lf_kde;
pub mod modulation;
pub mod numeric;
pub mod pipeline;
pub mod selftest;

pub use num_complex::Complex64;

use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value violates a documented constraint.
    #[error("configuration error: {0}")]
    Config(String),

    /// Channel estimation could not be carried out.
    #[error("estimation error: {0}")]
    Estimation(String),

    /// An input value is outside the domain of the operation.
    #[error("input error: {0}")]
    Input(String),

    /// Reading or writing a file failed.
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
