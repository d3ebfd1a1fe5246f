//! Finite discrete distributions on the outcomes `{0, 1, …, M}` written as
//! polynomials in the outcome, and what happens to the variance of the sample
//! mean as the number of outcomes grows with the sample size held fixed.
//!
//! The crate is organised bottom-up:
//!
//! * [`exactnum`]: rationals, Bernoulli numbers, Faulhaber sums.
//! * [`vandermonde`]: the matrix `J_{j,n} = j^{n-1}` and three exact inverses.
//! * [`polydist`]: coefficient/probability conversion, moments, variance,
//!   the four-way divergence classifier.
//! * [`families`]: power-law, square-root power, exponential and the
//!   `j^{M²}` counterexample.
//! * [`family_solver`]: distributions whose high-order coefficients vanish.
//! * [`sampler`]: seeded Monte Carlo, deterministic sweeps, log-log fits.
//! * [`percentiles`]: exact sample-sum pmf, CDF and percentiles.
//! * [`identities`]: closed form versus brute force for the combinatorial
//!   identities the inversion rests on.
//! * [`manifest`]: run manifests and output writers.
//! * [`cli`]: the `outcomes` binary (subcommands and figure data).
//!
//! Every capability has a runnable program under `examples/`; start with
//! `cargo run --release --example invert_vandermonde`.

pub mod cli;
pub mod exactnum;
pub mod families;
pub mod family_solver;
pub mod identities;
pub mod manifest;
pub mod percentiles;
pub mod polydist;
pub mod sampler;
pub mod vandermonde;

pub use exactnum::{bernoulli, power_sum, Rational, Scalar};
pub use families::FamilySpec;
pub use polydist::{DivergenceCase, DivergenceReport, ExactDist, PolyDist, RealDist};
pub use vandermonde::ExactMatrix;

/// Errors raised at module boundaries.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("singular matrix")]
    Singular,
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("unsupported in this arithmetic mode: {0}")]
    Mode(String),
    #[error("size limit exceeded: {0}")]
    TooLarge(String),
    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
