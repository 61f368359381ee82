use std::fmt;

use crate::limits::BlockKernel;
use crate::scalar::Real;

/// Errors surfaced by the library.
#[derive(Debug, Clone)]
pub enum Error<F: Real> {
    /// A generative model failed validation.
    InvalidSpec(String),
    /// An argument fell outside its mathematical domain.
    Domain(String),
    /// An argument was structurally invalid for the requested operation.
    InvalidArgument(String),
    /// Two vectors that must share a length do not.
    DimensionMismatch { expected: usize, got: usize },
    /// The limiting-kernel formula degenerates at the queried point.
    SingularLimit { tilde_f1: F, tilde_f0: F },
    /// Training aborted on a non-finite gradient.
    NonFiniteGradient {
        iteration: usize,
        pair: (u32, u32),
        logit: F,
    },
    /// The constrained solver hit its iteration cap before converging.
    NoConvergence {
        iterations: usize,
        kkt_residual: F,
        last: BlockKernel<F>,
    },
}

impl<F: Real> fmt::Display for Error<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidSpec(msg) => write!(f, "invalid graphon spec: {msg}"),
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Error::SingularLimit { tilde_f1, tilde_f0 } => write!(
                f,
                "limiting kernel is singular here (tilde_f1 = {tilde_f1}, tilde_f0 = {tilde_f0})"
            ),
            Error::NonFiniteGradient {
                iteration,
                pair,
                logit,
            } => write!(
                f,
                "non-finite gradient at iteration {iteration}, pair ({}, {}), logit {logit}",
                pair.0, pair.1
            ),
            Error::NoConvergence {
                iterations,
                kkt_residual,
                ..
            } => write!(
                f,
                "solver did not converge within {iterations} iterations (KKT residual {kkt_residual})"
            ),
        }
    }
}

impl<F: Real> std::error::Error for Error<F> {}

pub type Result<T, F> = std::result::Result<T, Error<F>>;
