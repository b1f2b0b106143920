//! Experiment harness: configuration, Monte Carlo orchestration of gap and
//! recovery experiments, and report emission.

pub mod config;
pub mod experiment;
pub mod report;

pub use config::{load_config, resolve, save_config, ExperimentConfig, ResolvedConfig};
pub use experiment::{
    run_gap_experiment, run_recovery_experiment, GapSummary, RecoverySummary, TrialRecord,
};

use ergg_core::Error as CoreError;

/// Harness-level failure with the CLI exit code it maps to.
#[derive(Debug)]
pub enum HarnessError {
    /// Malformed or invalid configuration (exit code 2).
    Config(String),
    /// Budget exhaustion or an infeasible parameter regime (exit code 3).
    Infeasible(String),
    /// Everything else (exit code 1).
    Other(String),
}

impl std::fmt::Display for HarnessError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            HarnessError::Config(m) => write!(f, "config error: {m}"),
            HarnessError::Infeasible(m) => write!(f, "infeasible: {m}"),
            HarnessError::Other(m) => write!(f, "{m}"),
        }
    }
}

impl std::error::Error for HarnessError {}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            HarnessError::Infeasible(_) => 3,
            HarnessError::Other(_) => 1,
        }
    }
}

impl From<CoreError> for HarnessError {
    fn from(e: CoreError) -> Self {
        if e.is_budget_or_infeasible() {
            HarnessError::Infeasible(e.to_string())
        } else {
            match e {
                CoreError::InvalidParameter(_) | CoreError::Parse(_) => {
                    HarnessError::Config(e.to_string())
                }
                other => HarnessError::Other(other.to_string()),
            }
        }
    }
}

impl From<std::io::Error> for HarnessError {
    fn from(e: std::io::Error) -> Self {
        HarnessError::Other(format!("I/O error: {e}"))
    }
}

pub type HarnessResult<T> = std::result::Result<T, HarnessError>;
