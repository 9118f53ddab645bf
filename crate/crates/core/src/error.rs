use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid ensemble ({b},{d}): {reason}")]
    InvalidEnsemble { b: u32, d: u32, reason: &'static str },

    #[error("{name} = {value} is outside its domain {domain}")]
    Domain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("index {index} out of range {lo}..={hi}")]
    Index { index: u32, lo: u32, hi: u32 },

    #[error("threshold point is degenerate for b = 2; {what} is undefined")]
    DegenerateThreshold { what: &'static str },

    #[error("no nontrivial critical point for the ({b},{d}) ensemble")]
    NoRoot { b: u32, d: u32 },

    #[error("integration failed at y = {y}: {reason}")]
    StepFailure { y: f64, reason: &'static str },

    #[error("invalid simulation config: {0}")]
    Config(String),

    #[error("need at least {needed} trials, got {got}")]
    InsufficientTrials { needed: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
