use thiserror::Error;

/// Errors produced anywhere in the library.
///
/// The variants fall into two families that the CLI maps onto distinct exit
/// codes: input errors (bad parameters, caps exceeded) and numerical failures
/// (degenerate fits, unmet quadrature tolerances, inadequate tail models).
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("size cap exceeded: {what} = {value} (limit {limit})")]
    CapExceeded {
        what: &'static str,
        value: u64,
        limit: u64,
    },

    #[error("least-squares fit is degenerate (condition estimate {condition:.3e} above cap {cap:.1e})")]
    FitDegenerate { condition: f64, cap: f64 },

    #[error("quadrature did not converge on [{a}, {b}]: error estimate {achieved:.3e}, requested {requested:.3e}")]
    QuadratureNotConverged {
        a: f64,
        b: f64,
        achieved: f64,
        requested: f64,
    },

    #[error("tail model inadequate at the {side} end: relative residual {residual:.3e} above {threshold:.1e}")]
    TailModelInadequate {
        side: &'static str,
        residual: f64,
        threshold: f64,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    /// True for failures of the numerical machinery rather than of the caller's input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::FitDegenerate { .. }
                | Error::QuadratureNotConverged { .. }
                | Error::TailModelInadequate { .. }
                | Error::Numerical(_)
        )
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
