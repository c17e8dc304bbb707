use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("target {target} outside bracket image [{lo}, {hi}]")]
    Bracket { target: f64, lo: f64, hi: f64 },

    #[error("derivative is unbounded at v = {v} for the power-law model with p = {p}")]
    Degenerate { v: f64, p: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("iteration did not converge after {iterations} steps: {what}")]
    Convergence { what: String, iterations: usize },

    #[error("spatial window captured only {captured:.3e} of the fan mass")]
    Window { captured: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("solution blew up at t = {t}: {reason}")]
    Blowup { t: f64, reason: String },

    #[error("negative weight {value:e} at node {index}")]
    NegativeWeight { index: usize, value: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("fit error: {0}")]
    Fit(String),
}
