use std::path::PathBuf;

use thiserror::Error;

use crate::selfsimilar::SelfSimilarSolution;

pub type Result<T> = std::result::Result<T, PknError>;

#[derive(Debug, Error)]
pub enum PknError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("tip coefficient equation has no positive root (beta = {beta}, q0* = {q0_star})")]
    NoTipRoot { beta: f64, q0_star: f64 },

    #[error("root finder did not converge in {iterations} iterations")]
    RootNotConverged { iterations: usize },

    #[error("self-similar iteration stopped after {iterations} iterations (last change {change:e})")]
    SelfSimilarNotConverged {
        iterations: usize,
        change: f64,
        last: Box<SelfSimilarSolution>,
    },

    #[error("inner iteration of {solver} did not converge in {iterations} iterations (last change {change:e})")]
    InnerNotConverged {
        solver: &'static str,
        iterations: usize,
        change: f64,
    },

    #[error("ill-conditioned viscous-term fit (condition estimate {condition:e})")]
    IllConditionedFit { condition: f64 },

    #[error("singular Jacobian in the implicit step")]
    SingularJacobian,

    #[error("non-physical iterate: {0}")]
    NonPhysical(String),

    #[error("time step {index} (t = {t}) failed: {source}")]
    StepFailed {
        index: usize,
        t: f64,
        #[source]
        source: Box<PknError>,
    },

    #[error("shape mismatch: {0}")]
    Mismatch(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("{}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl PknError {
    /// True for failures of an iteration to converge, as opposed to bad input.
    pub fn is_convergence_failure(&self) -> bool {
        match self {
            PknError::NoTipRoot { .. }
            | PknError::RootNotConverged { .. }
            | PknError::SelfSimilarNotConverged { .. }
            | PknError::InnerNotConverged { .. }
            | PknError::IllConditionedFit { .. }
            | PknError::SingularJacobian
            | PknError::NonPhysical(_) => true,
            PknError::StepFailed { source, .. } => source.is_convergence_failure(),
            _ => false,
        }
    }
}
