use thiserror::Error;

use crate::model::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid metric tensor: {}", join_violations(.0))]
    InvalidTensor(Vec<Violation>),

    #[error("insufficient samples: need at least {needed}, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("probability {0} is outside the admissible range")]
    InvalidProbability(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite input value")]
    NonFinite,

    #[error("unknown task `{0}`")]
    UnknownTask(String),

    #[error("unknown model `{0}`")]
    UnknownModel(String),

    #[error("unknown category `{0}`")]
    UnknownCategory(String),

    #[error("task `{task}` has {found} model(s); at least 2 are required")]
    NotEnoughModels { task: String, found: usize },

    #[error("critical-difference analysis needs at least {needed} {what}, found {found}")]
    NotEnoughForRanking {
        what: &'static str,
        needed: usize,
        found: usize,
    },

    #[error("no studentized-range critical value tabulated for k={k}, alpha={alpha}")]
    Untabulated { k: usize, alpha: f64 },

    #[error("duplicate registration of `{0}`")]
    Duplicate(String),

    #[error("nothing to benchmark: {0}")]
    EmptySelection(String),

    #[error("trial failed at (task={task}, model={model}, seed={seed}): {message}")]
    TrialFailed {
        task: String,
        model: String,
        seed: u64,
        message: String,
    },

    #[error(transparent)]
    Cache(#[from] CacheError),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Error)]
pub enum CacheError {
    #[error("report cache schema version {found} is not supported (expected {expected})")]
    VersionMismatch { found: u64, expected: u64 },

    #[error("report cache failed checksum verification: {0}")]
    Checksum(String),
}

impl Error {
    /// True for failures raised by a trial executor, as opposed to bad input.
    pub fn is_trial_failure(&self) -> bool {
        matches!(self, Error::TrialFailed { .. })
    }
}

fn join_violations(v: &[Violation]) -> String {
    v.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}
