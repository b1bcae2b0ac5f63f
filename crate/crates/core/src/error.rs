use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("state space has {states} configurations, the dense oracle accepts at most {limit}")]
    StateSpaceTooLarge { states: u128, limit: usize },

    #[error("time step {dt:e} violates the stability bound {bound:e}")]
    Stability { dt: f64, bound: f64 },

    #[error("rate {rate} exceeds the rejection bound {bound} ({kind})")]
    RateBound {
        kind: &'static str,
        rate: f64,
        bound: f64,
    },

    #[error("stationary solver did not converge after {steps} steps, last residual {last:e}")]
    NonConvergence { steps: usize, last: f64, history: Vec<f64> },

    #[error("elliptic solve did not converge: {iterations} iterations, residual {residual:e}")]
    Elliptic { iterations: usize, residual: f64 },

    #[error("density left the admissible range at step {step}: value {value} outside [{lo}, {hi}]")]
    MaxPrinciple { step: usize, value: f64, lo: f64, hi: f64 },

    #[error("conservation violated at site {site} at time {time}: occupancy change {change}, ledger divergence {divergence}")]
    Conservation {
        site: usize,
        time: f64,
        change: i64,
        divergence: i64,
    },

    #[error("event log required but not recorded")]
    MissingEventLog,

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("degenerate basis: {0}")]
    DegenerateBasis(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
