use thiserror::Error;

use crate::families::ParamPair;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GofError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{family}: argument {value} outside support {support}")]
    Domain {
        family: &'static str,
        value: f64,
        support: &'static str,
    },

    #[error("empty sample")]
    EmptySample,

    #[error("estimation failed: {0}")]
    Estimation(String),

    #[error("estimation did not converge after {iterations} iterations (best iterate c={}, kappa={})", best.c(), best.kappa())]
    NotConverged { iterations: usize, best: ParamPair },

    #[error("fit did not converge; refusing to standardize")]
    UnconvergedFit,

    #[error("critical-value table has no cell for {statistic} n={n} alpha={alpha}")]
    MissingCell {
        statistic: String,
        n: usize,
        alpha: f64,
    },

    #[error("simulation aborted: {redraws} failed fits in {iterations} iterations exceeds the redraw cap")]
    TooManyRedraws { redraws: usize, iterations: usize },

    #[error("table format: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, GofError>;
