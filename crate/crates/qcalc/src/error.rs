//! Crate-wide error type.

use num_bigint::BigUint;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors reported by every fallible operation in this crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A constructor or operation received a value outside its contract
    /// (e.g. q not in [0,1), non-positive shape, zero-length bracket).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The inputs are structurally valid but the requested point lies
    /// outside the operation's domain (e.g. x = 0 for the q-derivative,
    /// a point off the distribution's support).
    #[error("domain error: {0}")]
    Domain(String),

    /// A series, product, or lattice sum did not reach the requested
    /// relative tolerance. This is also reported when cancellation in an
    /// alternating sum makes the tolerance unreachable at working
    /// precision, and when the deformation parameter is too close to 1
    /// for the truncation caps to be meaningful.
    #[error("did not converge within {max_terms} terms: {reason}")]
    NonConvergence { max_terms: usize, reason: String },

    /// A brute-force tree enumeration would exceed the caller's budget.
    #[error("enumeration budget exceeded: {required} sequences > budget {budget}")]
    BudgetExceeded { required: BigUint, budget: u64 },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn no_convergence(max_terms: usize, reason: impl Into<String>) -> Self {
        Error::NonConvergence {
            max_terms,
            reason: reason.into(),
        }
    }
}
