use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("{what} = {value} is outside the supported domain ({domain})")]
    Domain {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("no interior minimum of the objective in [{lo}, {hi}]")]
    NoInteriorMinimum { lo: f64, hi: f64 },

    #[error("degenerate saddle at x = {x}: second derivative {second_derivative:e}")]
    DegenerateSaddle { x: f64, second_derivative: f64 },

    #[error(
        "quadrature budget of {max_evals} evaluations exhausted \
         (partial value {partial:e}, error estimate {estimate:e})"
    )]
    BudgetExhausted {
        max_evals: usize,
        partial: f64,
        estimate: f64,
    },

    #[error("no implied volatility: price {price:e} outside the no-arbitrage band ({lower:e}, {upper:e})")]
    Arbitrage { price: f64, lower: f64, upper: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

pub(crate) fn require_finite(name: &'static str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(invalid(name, format!("must be finite, got {v}")))
    }
}

pub(crate) fn require_positive(name: &'static str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(invalid(name, format!("must be positive and finite, got {v}")))
    }
}
