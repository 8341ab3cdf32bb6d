use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("pole: {0}")]
    Pole(String),

    #[error("recurrence leading coefficient vanishes at step {step}")]
    DegenerateRecurrence { step: usize },

    #[error("convergence condition violated: {0}")]
    ConvergenceViolation(String),

    #[error("no convergence after {terms} terms (last term magnitude {last_term:e})")]
    NoConvergence { terms: usize, last_term: f64 },

    #[error("degenerate parameters: {0}")]
    DegenerateParameters(String),

    #[error("unsupported order p={0}")]
    UnsupportedOrder(usize),

    #[error("quadrature did not reach tolerance (error estimate {estimate:e})")]
    QuadratureFailure { estimate: f64 },

    #[error("invalid input: {0}")]
    Invalid(String),
}

impl Error {
    /// Short machine-readable tag used in skip reasons and CLI diagnostics.
    pub fn tag(&self) -> &'static str {
        match self {
            Error::Pole(_) => "pole",
            Error::DegenerateRecurrence { .. } => "degenerate_recurrence",
            Error::ConvergenceViolation(_) => "convergence_violation",
            Error::NoConvergence { .. } => "no_convergence",
            Error::DegenerateParameters(_) => "degenerate_parameters",
            Error::UnsupportedOrder(_) => "unsupported_order",
            Error::QuadratureFailure { .. } => "quadrature_failure",
            Error::Invalid(_) => "invalid",
        }
    }

    /// Precondition failures (as opposed to numerical breakdowns).
    pub fn is_precondition(&self) -> bool {
        matches!(
            self,
            Error::Pole(_)
                | Error::ConvergenceViolation(_)
                | Error::DegenerateParameters(_)
                | Error::UnsupportedOrder(_)
                | Error::Invalid(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
