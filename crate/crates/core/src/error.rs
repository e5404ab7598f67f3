use thiserror::Error;

/// Errors raised by the analytic and simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Input outside the domain where a formula is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// A problem or model description violates one of its invariants.
    #[error("invalid problem: {0}")]
    Validation(String),

    /// Adaptive quadrature did not reach the requested tolerance.
    #[error("quadrature failed to converge: estimate {estimate:e}, error {error:e} after {panels} panels")]
    Convergence {
        estimate: f64,
        error: f64,
        panels: usize,
    },

    /// The 2x2 boundary system for the two-sided Ornstein-Uhlenbeck transform is singular.
    #[error("singular boundary system (condition estimate {condition:e})")]
    Singular { condition: f64 },

    /// Resetting rate too small for the finite-difference derivative step.
    #[error("resetting rate {0:e} is below the derivative step floor; use the no-reset baseline")]
    DerivativeStep(f64),

    /// Monte Carlo configuration problem (bad settings, excessive censoring).
    #[error("simulation configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
