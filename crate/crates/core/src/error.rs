//! Error type shared by all modules.

use crate::trace::RecoveryTrace;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A precondition on the arguments was violated.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The eigensolver did not reach its residual tolerance.
    #[error("eigensolver did not converge: best residual {residual:.3e} after {iterations} iterations")]
    ConvergenceFailure { residual: f64, iterations: usize },

    /// No usable pivot: the diagonal correlation estimate is nonpositive
    /// everywhere.
    #[error("degenerate instance: {0}")]
    DegenerateInstance(String),

    /// The support threshold retained no coordinate. Lowering the threshold
    /// constant or raising the sample count are the usual remedies.
    #[error("degenerate support: no coordinate above threshold {threshold:.3e}")]
    DegenerateSupport { threshold: f64 },

    /// An iteration produced the zero vector; the trace up to that point is
    /// attached.
    #[error("degenerate iterate at outer iteration {iteration}")]
    DegenerateIterate {
        iteration: usize,
        trace: Box<RecoveryTrace>,
    },

    /// The risk blew up past the divergence guard; the trace is attached.
    #[error("divergence: risk {risk:.3e} exceeded {bound:.3e}")]
    Divergence {
        risk: f64,
        bound: f64,
        trace: Box<RecoveryTrace>,
    },

    /// An enumeration would visit more candidates than the configured budget.
    #[error("enumeration budget exceeded: {required} candidates, budget {budget}")]
    BudgetExceeded { required: u128, budget: u128 },

    /// Malformed or unreadable instance file.
    #[error("instance file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
