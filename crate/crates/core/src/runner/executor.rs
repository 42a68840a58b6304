use std::collections::BTreeMap;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::seeds::SeedStreams;
use crate::error::{Error, Result};
use crate::model::{ModelSpec, TaskSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRequest {
    pub task: TaskSpec,
    pub model: ModelSpec,
    pub seed: u64,
    pub epochs: u32,
    /// The benchmark seed, passed only to seed-aware tasks.
    pub data_seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub final_metric: f64,
    #[serde(default)]
    pub per_epoch: Option<Vec<f64>>,
    #[serde(default)]
    pub wall_time: Duration,
}

impl TrialOutcome {
    pub fn new(final_metric: f64) -> Self {
        TrialOutcome {
            final_metric,
            per_epoch: None,
            wall_time: Duration::ZERO,
        }
    }
}

/// Turns a trial request into a final metric.
///
/// `prepare` is called once per scheduled task before any of its trials;
/// an executor that materializes data for tasks without seed-aware data
/// should do it there and reuse the result across seeds. Implementations
/// must be deterministic in `(request, streams)` for runs to be
/// reproducible.
pub trait TrialExecutor: Send + Sync {
    fn prepare(&self, _task: &TaskSpec) -> Result<()> {
        Ok(())
    }

    fn execute(&self, request: &TrialRequest, streams: &mut SeedStreams) -> Result<TrialOutcome>;
}

impl<E: TrialExecutor + ?Sized> TrialExecutor for &E {
    fn prepare(&self, task: &TaskSpec) -> Result<()> {
        (**self).prepare(task)
    }

    fn execute(&self, request: &TrialRequest, streams: &mut SeedStreams) -> Result<TrialOutcome> {
        (**self).execute(request, streams)
    }
}

impl<E: TrialExecutor + ?Sized> TrialExecutor for Box<E> {
    fn prepare(&self, task: &TaskSpec) -> Result<()> {
        (**self).prepare(task)
    }

    fn execute(&self, request: &TrialRequest, streams: &mut SeedStreams) -> Result<TrialOutcome> {
        (**self).execute(request, streams)
    }
}

/// Dispatches on `ModelSpec::executor_binding`.
#[derive(Default)]
pub struct ExecutorRouter {
    routes: BTreeMap<String, Box<dyn TrialExecutor>>,
}

impl ExecutorRouter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bind(mut self, name: impl Into<String>, executor: Box<dyn TrialExecutor>) -> Self {
        self.routes.insert(name.into(), executor);
        self
    }

    pub fn get(&self, binding: &str) -> Option<&dyn TrialExecutor> {
        self.routes.get(binding).map(|b| b.as_ref())
    }

    pub fn bindings(&self) -> impl Iterator<Item = &str> {
        self.routes.keys().map(String::as_str)
    }
}

impl TrialExecutor for ExecutorRouter {
    fn prepare(&self, task: &TaskSpec) -> Result<()> {
        self.routes.values().try_for_each(|e| e.prepare(task))
    }

    fn execute(&self, request: &TrialRequest, streams: &mut SeedStreams) -> Result<TrialOutcome> {
        let binding = &request.model.executor_binding;
        let exec = self.get(binding).ok_or_else(|| {
            Error::InvalidArgument(format!(
                "model `{}` is bound to executor `{binding}`, which is not configured",
                request.model.name
            ))
        })?;
        exec.execute(request, streams)
    }
}
