//! Benchmark orchestration: resolve tasks and compatible models, run every
//! (task, model, seed) trial with freshly derived generator streams, merge
//! the final metrics in canonical order and build the report.

mod executor;
mod external;
mod registry;
mod seeds;

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::Duration;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{MetricTensor, ModelSpec, ReportConfig, TaskSpec, TaskType};
use crate::report::{build_report, cache_save, sha256_hex, BenchmarkReport};
use crate::synthetic::{SyntheticExecutor, SyntheticProfile};

pub use executor::{ExecutorRouter, TrialExecutor, TrialOutcome, TrialRequest};
pub use external::{ExternalExecutor, DEFAULT_TIMEOUT};
pub use registry::{Registry, TaskRef, TaskSelector};
pub use seeds::{
    fnv1a64, reseed_all, stream_key, SeedStreams, STREAM_DATA, STREAM_MODEL_INIT,
    STREAM_TRIAL_NOISE,
};

/// A model given by name (looked up in the registry) or inline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModelRef {
    Name(String),
    Spec(ModelSpec),
}

/// How to build the executor for one binding name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExecutorSettings {
    Synthetic {
        profile: SyntheticProfile,
    },
    External {
        command: String,
        #[serde(default = "default_timeout_secs")]
        timeout_secs: f64,
    },
}

fn default_timeout_secs() -> f64 {
    DEFAULT_TIMEOUT.as_secs_f64()
}

impl ExecutorSettings {
    pub fn build(&self) -> Result<Box<dyn TrialExecutor>> {
        Ok(match self {
            ExecutorSettings::Synthetic { profile } => {
                profile.validate()?;
                Box::new(SyntheticExecutor::new(profile.clone()))
            }
            ExecutorSettings::External {
                command,
                timeout_secs,
            } => {
                if !(timeout_secs.is_finite() && *timeout_secs > 0.0) {
                    return Err(Error::InvalidArgument(format!(
                        "timeout_secs must be positive, got {timeout_secs}"
                    )));
                }
                Box::new(
                    ExternalExecutor::new(command.clone())
                        .with_timeout(Duration::from_secs_f64(*timeout_secs)),
                )
            }
        })
    }
}

fn default_seeds() -> Vec<u64> {
    (0..10).collect()
}

fn default_parallelism() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// `"category": name` or `"tasks": [name | TaskSpec, ..]`.
    #[serde(flatten)]
    pub selector: TaskSelector,
    #[serde(default)]
    pub task_type: Option<TaskType>,
    /// Empty means every registered model.
    #[serde(default)]
    pub models: Vec<ModelRef>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    /// Per-task epoch overrides.
    #[serde(default)]
    pub epochs: BTreeMap<String, u32>,
    #[serde(flatten)]
    pub report: ReportConfig,
    /// Executor per binding name; models bind to `"default"` unless they
    /// say otherwise.
    #[serde(default)]
    pub executors: BTreeMap<String, ExecutorSettings>,
    /// Concurrent trials; 1 runs serially.
    #[serde(default = "default_parallelism")]
    pub parallelism: usize,
    #[serde(default)]
    pub cache: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(selector: TaskSelector) -> Self {
        RunConfig {
            selector,
            task_type: None,
            models: Vec::new(),
            seeds: default_seeds(),
            epochs: BTreeMap::new(),
            report: ReportConfig::default(),
            executors: BTreeMap::new(),
            parallelism: 1,
            cache: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.report.validate()?;
        if self.seeds.is_empty() {
            return Err(Error::InvalidArgument("the seed list is empty".into()));
        }
        let distinct: BTreeSet<_> = self.seeds.iter().collect();
        if distinct.len() != self.seeds.len() {
            return Err(Error::InvalidArgument(
                "the seed list has duplicates".into(),
            ));
        }
        if self.parallelism == 0 {
            return Err(Error::InvalidArgument(
                "parallelism must be at least 1".into(),
            ));
        }
        if let Some((task, _)) = self.epochs.iter().find(|(_, &e)| e == 0) {
            return Err(Error::InvalidArgument(format!(
                "epoch override for `{task}` must be at least 1"
            )));
        }
        Ok(())
    }

    /// Digest of everything that determines the results; scheduling knobs
    /// (parallelism, cache path) are excluded.
    pub fn digest(&self) -> String {
        let canonical = RunConfig {
            parallelism: 1,
            cache: None,
            ..self.clone()
        };
        sha256_hex(&serde_json::to_vec(&canonical).expect("run config serializes"))
    }

    /// Router over the configured executors.
    pub fn build_executor(&self) -> Result<ExecutorRouter> {
        self.executors
            .iter()
            .try_fold(ExecutorRouter::new(), |r, (name, s)| {
                Ok(r.bind(name.clone(), s.build()?))
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub task: String,
    pub model: String,
    pub seed: u64,
    pub outcome: TrialOutcome,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub tensor: MetricTensor,
    /// Outcomes in canonical (task, model, seed) order.
    pub trials: Vec<TrialRecord>,
}

struct Plan {
    tasks: Vec<TaskSpec>,
    models: Vec<ModelSpec>,
}

fn plan(config: &RunConfig, registry: &Registry) -> Result<Plan> {
    config.validate()?;
    let mut tasks = registry.resolve_tasks(&config.selector, config.task_type.as_ref())?;
    for (name, &epochs) in &config.epochs {
        let t = tasks
            .iter_mut()
            .find(|t| t.name == *name)
            .ok_or_else(|| Error::UnknownTask(name.clone()))?;
        t.epochs = epochs;
    }
    let models: Vec<ModelSpec> = if config.models.is_empty() {
        registry.models().to_vec()
    } else {
        config
            .models
            .iter()
            .map(|r| match r {
                ModelRef::Name(n) => registry
                    .model(n)
                    .cloned()
                    .ok_or_else(|| Error::UnknownModel(n.clone())),
                ModelRef::Spec(s) => Ok(s.clone()),
            })
            .collect::<Result<_>>()?
    };
    let mut seen = BTreeSet::new();
    for m in &models {
        if m.compatible_task_types.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "model `{}` declares no compatible task types",
                m.name
            )));
        }
        if !seen.insert(m.name.as_str()) {
            return Err(Error::Duplicate(m.name.clone()));
        }
    }
    if models.is_empty() {
        return Err(Error::EmptySelection("no models to run".into()));
    }
    // models compatible with none of the selected tasks do not appear at all
    let models = models
        .into_iter()
        .filter(|m| tasks.iter().any(|t| m.is_compatible(t)))
        .collect();
    Ok(Plan { tasks, models })
}

fn run_one<E: TrialExecutor + ?Sized>(
    executor: &E,
    task: &TaskSpec,
    model: &ModelSpec,
    seed: u64,
) -> Result<TrialOutcome> {
    let mut streams = reseed_all(seed, &task.name, &model.name);
    let request = TrialRequest {
        task: task.clone(),
        model: model.clone(),
        seed,
        epochs: task.epochs,
        data_seed: task.seed_aware_data.then_some(seed),
    };
    let fail = |message: String| Error::TrialFailed {
        task: task.name.clone(),
        model: model.name.clone(),
        seed,
        message,
    };
    match executor.execute(&request, &mut streams) {
        Ok(o) if o.final_metric.is_finite() => Ok(o),
        Ok(o) => Err(fail(format!("non-finite final metric {}", o.final_metric))),
        Err(e @ Error::TrialFailed { .. }) => Err(e),
        Err(e) => Err(fail(e.to_string())),
    }
}

/// Runs every scheduled trial and assembles the metric tensor. Any trial
/// failure aborts the run; no partial tensor is returned.
pub fn run_trials<E: TrialExecutor + ?Sized>(
    config: &RunConfig,
    registry: &Registry,
    executor: &E,
) -> Result<RunResult> {
    let Plan { tasks, models } = plan(config, registry)?;
    let mut seeds = config.seeds.clone();
    seeds.sort_unstable();

    for task in &tasks {
        executor.prepare(task).map_err(|e| Error::TrialFailed {
            task: task.name.clone(),
            model: "*".into(),
            seed: 0,
            message: format!("data preparation failed: {e}"),
        })?;
    }

    let seeds_ref = &seeds;
    let schedule: Vec<(&TaskSpec, &ModelSpec, u64)> = tasks
        .iter()
        .flat_map(|t| {
            models
                .iter()
                .filter(move |m| m.is_compatible(t))
                .flat_map(move |m| seeds_ref.iter().map(move |&s| (t, m, s)))
        })
        .collect();

    let stop = AtomicBool::new(false);
    let attempt = |&(t, m, s): &(&TaskSpec, &ModelSpec, u64)| -> Option<Result<TrialOutcome>> {
        if stop.load(Ordering::Relaxed) {
            return None;
        }
        let r = run_one(executor, t, m, s);
        if r.is_err() {
            stop.store(true, Ordering::Relaxed);
        }
        Some(r)
    };
    let outcomes: Vec<Option<Result<TrialOutcome>>> = if config.parallelism > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.parallelism)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
        pool.install(|| schedule.par_iter().map(attempt).collect())
    } else {
        schedule.iter().map(attempt).collect()
    };
    if let Some(err) = outcomes.iter().flatten().find_map(|r| r.as_ref().err()) {
        // errors are not Clone; rebuild a trial failure carrying the same text
        return Err(match err {
            Error::TrialFailed {
                task,
                model,
                seed,
                message,
            } => Error::TrialFailed {
                task: task.clone(),
                model: model.clone(),
                seed: *seed,
                message: message.clone(),
            },
            other => Error::InvalidArgument(other.to_string()),
        });
    }

    let mut builder = MetricTensor::builder(
        tasks.clone(),
        models.iter().map(|m| m.name.clone()).collect(),
        seeds.clone(),
    );
    let mut trials = Vec::with_capacity(schedule.len());
    for (&(t, m, s), outcome) in schedule.iter().zip(outcomes) {
        let outcome = outcome.expect("no trial skipped without a failure")?;
        builder.push(&t.name, &m.name, s, outcome.final_metric);
        trials.push(TrialRecord {
            task: t.name.clone(),
            model: m.name.clone(),
            seed: s,
            outcome,
        });
    }
    Ok(RunResult {
        tensor: builder.build()?,
        trials,
    })
}

/// Runs the benchmark and builds its report; the report is also cached
/// when `config.cache` is set.
pub fn run_benchmark<E: TrialExecutor + ?Sized>(
    config: &RunConfig,
    registry: &Registry,
    executor: &E,
) -> Result<BenchmarkReport> {
    let run = run_trials(config, registry, executor)?;
    let mut report = build_report(&run.tensor, &config.report)?;
    report.provenance.run_config_digest = Some(config.digest());
    if let Some(path) = &config.cache {
        cache_save(&report, path)?;
    }
    Ok(report)
}
