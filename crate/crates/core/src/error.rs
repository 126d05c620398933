//! Error types shared across the library.

use thiserror::Error;

/// Errors produced by the numerical routines.
#[derive(Debug, Error)]
pub enum CoreError {
    /// An input parameter violates a precondition (non-positive time,
    /// weights not summing to one, too few quadrature nodes, ...).
    #[error("invalid parameter `{name}`: {message}")]
    InvalidParameter { name: &'static str, message: String },

    /// A quadrature- or grid-dependent quantity did not stabilize under
    /// refinement doubling.
    #[error("refinement did not converge for {what}: change {change:e} exceeds {tolerance:e}")]
    NonConvergent {
        what: &'static str,
        change: f64,
        tolerance: f64,
    },

    /// A bracketing precondition failed (endpoints do not straddle the root,
    /// or a required basin is missing at an endpoint).
    #[error("bracket error: {0}")]
    Bracket(String),

    /// Two tracked basins merged during continuation (saddle-node collision).
    #[error("degenerate bifurcation: {0}")]
    DegenerateBifurcation(String),

    /// The requested equal-depth problem is symmetric and the depth
    /// difference vanishes identically; bisection is meaningless.
    #[error("symmetric case: {0}")]
    SymmetricCase(String),

    /// The limiting single-site kernel is not defined because the rate
    /// function has several global minimizers at this conditioning.
    #[error("kernel undefined at this conditioning: {0}")]
    KernelUndefined(String),

    /// A certificate hypothesis fails so the construction it gates cannot be
    /// evaluated (e.g. Neumann series divergence).
    #[error("certificate not applicable: {0}")]
    CertificateInapplicable(String),

    /// A transition kernel passed where strict positivity is required.
    #[error("invalid kernel: {0}")]
    InvalidKernel(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;

impl CoreError {
    pub fn invalid(name: &'static str, message: impl Into<String>) -> Self {
        CoreError::InvalidParameter {
            name,
            message: message.into(),
        }
    }
}
