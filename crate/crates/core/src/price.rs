use serde::{Deserialize, Serialize};

/// How the final time integral of a saddle-point price is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Leading-order small-time expansion of the time integral.
    Asymptotic,
    /// Exact time integral of the leading-order integrand.
    UpsilonExact,
}

/// Which method produced a [`PriceResult`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Asymptotic,
    UpsilonExact,
    Oracle,
}

impl From<Mode> for Method {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Asymptotic => Method::Asymptotic,
            Mode::UpsilonExact => Method::UpsilonExact,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceResult {
    pub method: Method,
    pub value: f64,
    /// Natural log of `value`; finite even when `value` underflows.
    pub ln_value: f64,
    /// Quadrature error estimate (oracle only).
    pub error_estimate: Option<f64>,
    /// Integrand evaluations (oracle only).
    pub evaluations: usize,
    /// Non-fatal warnings, e.g. proximity to the degenerate strike.
    pub warnings: Vec<String>,
}

impl PriceResult {
    pub(crate) fn from_ln(method: Method, ln_value: f64) -> Self {
        PriceResult {
            method,
            value: ln_value.exp(),
            ln_value,
            error_estimate: None,
            evaluations: 0,
            warnings: Vec::new(),
        }
    }
}
