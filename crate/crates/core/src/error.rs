use thiserror::Error;

/// Errors produced by model construction, evaluation, and solvers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("row for state {state}, action {action} sums to {sum} (expected 1 within {tol})")]
    NonStochasticRow {
        state: usize,
        action: usize,
        sum: f64,
        tol: f64,
    },

    #[error("policy row for state {state} sums to {sum} (expected 1)")]
    NonStochasticPolicy { state: usize, sum: f64 },

    #[error("invalid model: {0}")]
    Validation(String),

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("deterministic policy space has {count} members, above the cap of {cap}")]
    EnumerationCap { count: u128, cap: u128 },

    #[error("chain has {classes} recurrent classes; this operation requires a unichain input")]
    Multichain { classes: usize },

    #[error("total reward diverges: state {state} is recurrent with nonzero reward {reward}")]
    DivergentTotal { state: usize, reward: f64 },

    #[error("linear system is ill-conditioned (estimated condition {cond:.3e})")]
    IllConditioned { cond: f64 },

    #[error("singular linear system")]
    Singular,

    #[error("no convergence after {iters} iterations: {hint}")]
    NoConvergence { iters: usize, hint: String },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
