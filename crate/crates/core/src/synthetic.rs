//! Deterministic synthetic trials and Monte-Carlo calibration of the
//! statistical layer.
//!
//! Every simulated benchmark `r` of a calibration run draws from
//! `ChaCha8Rng::seed_from_u64(seed)` moved to stream `r`, so runs are
//! independent of scheduling and `generate_null_tensor(.., seed)` is run 0.
//! Power curves reuse the same noise at every gap (common random numbers).

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{MetricDirection, MetricTensor, PairwiseMethod, TaskSpec, TaskType};
use crate::ranking::{nemenyi_cd, rank_task};
use crate::runner::{SeedStreams, TrialExecutor, TrialOutcome, TrialRequest};
use crate::stats::{holm_adjust, mean, paired_t, wilcoxon_signed_rank};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelProfile {
    pub base: f64,
    pub noise_sd: f64,
    /// Added to `base` for the named tasks.
    #[serde(default)]
    pub task_offsets: BTreeMap<String, f64>,
}

impl ModelProfile {
    pub fn new(base: f64, noise_sd: f64) -> Self {
        ModelProfile {
            base,
            noise_sd,
            task_offsets: BTreeMap::new(),
        }
    }

    pub fn with_offset(mut self, task: impl Into<String>, offset: f64) -> Self {
        self.task_offsets.insert(task.into(), offset);
        self
    }

    pub fn base_for(&self, task: &str) -> f64 {
        self.base + self.task_offsets.get(task).copied().unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SyntheticProfile {
    pub models: BTreeMap<String, ModelProfile>,
    /// Scale of the data-resampling perturbation on seed-aware tasks.
    #[serde(default)]
    pub data_noise_sd: f64,
}

impl SyntheticProfile {
    pub fn new<S: Into<String>>(models: impl IntoIterator<Item = (S, ModelProfile)>) -> Self {
        SyntheticProfile {
            models: models.into_iter().map(|(n, p)| (n.into(), p)).collect(),
            data_noise_sd: 0.0,
        }
    }

    pub fn with_data_noise(mut self, sd: f64) -> Self {
        self.data_noise_sd = sd;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad_sd = |sd: f64| !(sd.is_finite() && sd >= 0.0);
        if bad_sd(self.data_noise_sd) {
            return Err(Error::InvalidArgument(format!(
                "data_noise_sd must be finite and non-negative, got {}",
                self.data_noise_sd
            )));
        }
        for (name, p) in &self.models {
            if bad_sd(p.noise_sd) {
                return Err(Error::InvalidArgument(format!(
                    "noise_sd of `{name}` must be finite and non-negative, got {}",
                    p.noise_sd
                )));
            }
            if !p.base.is_finite() || p.task_offsets.values().any(|o| !o.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "base metrics of `{name}` must be finite"
                )));
            }
        }
        Ok(())
    }
}

/// `base(task, model) + noise_sd·z`, with `z` from the trial-noise stream.
/// Seed-aware tasks add `data_noise_sd·z'` drawn from the data stream.
pub fn synthetic_trial(
    profile: &SyntheticProfile,
    request: &TrialRequest,
    streams: &mut SeedStreams,
) -> Result<TrialOutcome> {
    let p = profile
        .models
        .get(&request.model.name)
        .ok_or_else(|| Error::UnknownModel(request.model.name.clone()))?;
    let z: f64 = streams.trial_noise.sample(StandardNormal);
    let mut metric = p.base_for(&request.task.name) + p.noise_sd * z;
    if request.data_seed.is_some() {
        let zd: f64 = streams.data.sample(StandardNormal);
        metric += profile.data_noise_sd * zd;
    }
    Ok(TrialOutcome::new(metric))
}

#[derive(Debug, Clone)]
pub struct SyntheticExecutor {
    profile: SyntheticProfile,
}

impl SyntheticExecutor {
    pub fn new(profile: SyntheticProfile) -> Self {
        SyntheticExecutor { profile }
    }

    pub fn profile(&self) -> &SyntheticProfile {
        &self.profile
    }
}

impl TrialExecutor for SyntheticExecutor {
    fn execute(&self, request: &TrialRequest, streams: &mut SeedStreams) -> Result<TrialOutcome> {
        synthetic_trial(&self.profile, request, streams)
    }
}

/// Null benchmark shape: `k` models, `n_tasks` tasks, `seeds` seeds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NullDesign {
    pub k: usize,
    pub n_tasks: usize,
    pub seeds: usize,
    pub noise_sd: f64,
}

impl NullDesign {
    fn validate(&self) -> Result<()> {
        if self.k == 0 || self.n_tasks == 0 || self.seeds == 0 {
            return Err(Error::InvalidArgument(
                "null designs need at least one model, task and seed".into(),
            ));
        }
        if !(self.noise_sd.is_finite() && self.noise_sd >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "noise_sd must be finite and non-negative, got {}",
                self.noise_sd
            )));
        }
        Ok(())
    }
}

const NULL_BASE: f64 = 0.5;

fn run_rng(seed: u64, run: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(run);
    rng
}

/// `values[task][model][seed]`, all models sharing the same base.
fn null_values(d: &NullDesign, rng: &mut ChaCha8Rng) -> Vec<Vec<Vec<f64>>> {
    (0..d.n_tasks)
        .map(|_| {
            (0..d.k)
                .map(|_| {
                    (0..d.seeds)
                        .map(|_| NULL_BASE + d.noise_sd * rng.sample::<f64, _>(StandardNormal))
                        .collect()
                })
                .collect()
        })
        .collect()
}

pub fn generate_null_tensor(design: NullDesign, seed: u64) -> Result<MetricTensor> {
    design.validate()?;
    let values = null_values(&design, &mut run_rng(seed, 0));
    let tasks: Vec<TaskSpec> = (0..design.n_tasks)
        .map(|i| {
            TaskSpec::new(
                format!("null-{i}"),
                "null",
                TaskType::Custom("null".into()),
                "score",
                MetricDirection::HigherIsBetter,
            )
        })
        .collect();
    let models: Vec<String> = (0..design.k).map(|j| format!("m{j}")).collect();
    let mut b = MetricTensor::builder(tasks, models.clone(), (0..design.seeds as u64).collect());
    for (ti, per_task) in values.iter().enumerate() {
        for (mi, series) in per_task.iter().enumerate() {
            b = b.series(&format!("null-{ti}"), &models[mi], series);
        }
    }
    b.build()
}

/// Holm-adjusted p-values of all pairs within one task.
fn task_family(series: &[Vec<f64>], method: PairwiseMethod) -> Result<Vec<f64>> {
    let mut raw = Vec::new();
    for (i, a) in series.iter().enumerate() {
        for b in &series[i + 1..] {
            raw.push(match method {
                PairwiseMethod::Wilcoxon => wilcoxon_signed_rank(a, b)?.p_value,
                _ => paired_t(a, b)?.p_value,
            });
        }
    }
    holm_adjust(&raw)
}

/// Wilson score interval at 95%.
pub fn wilson_interval(successes: usize, trials: usize) -> [f64; 2] {
    const Z: f64 = 1.959_963_984_540_054;
    let n = trials as f64;
    let p = successes as f64 / n;
    let denom = 1.0 + Z * Z / n;
    let centre = (p + Z * Z / (2.0 * n)) / denom;
    let half = Z * (p * (1.0 - p) / n + Z * Z / (4.0 * n * n)).sqrt() / denom;
    let lo = if successes == 0 {
        0.0
    } else {
        (centre - half).max(0.0)
    };
    let hi = if successes == trials {
        1.0
    } else {
        (centre + half).min(1.0)
    };
    [lo, hi]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FwerEstimate {
    pub runs: usize,
    pub alpha: f64,
    pub method: PairwiseMethod,
    pub fwer: f64,
    /// 95% Wilson interval.
    pub ci: [f64; 2],
}

fn check_runs_alpha(runs: usize, alpha: f64) -> Result<()> {
    if runs == 0 {
        return Err(Error::InvalidArgument("runs must be at least 1".into()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidProbability(alpha));
    }
    Ok(())
}

/// Fraction of null benchmarks in which any Holm-adjusted per-task
/// pairwise p falls below `alpha`. `Both` counts a rejection by the
/// paired t; use `Wilcoxon` for the rank test.
pub fn estimate_fwer(
    runs: usize,
    design: NullDesign,
    alpha: f64,
    method: PairwiseMethod,
    seed: u64,
) -> Result<FwerEstimate> {
    design.validate()?;
    check_runs_alpha(runs, alpha)?;
    if design.k < 2 || design.seeds < 2 {
        return Err(Error::InvalidArgument(
            "FWER estimation needs at least two models and two seeds".into(),
        ));
    }
    let hits = (0..runs as u64)
        .into_par_iter()
        .map(|r| -> Result<bool> {
            let values = null_values(&design, &mut run_rng(seed, r));
            for task in &values {
                if task_family(task, method)?.iter().any(|&p| p < alpha) {
                    return Ok(true);
                }
            }
            Ok(false)
        })
        .collect::<Result<Vec<bool>>>()?
        .into_iter()
        .filter(|&h| h)
        .count();
    Ok(FwerEstimate {
        runs,
        alpha,
        method,
        fwer: hits as f64 / runs as f64,
        ci: wilson_interval(hits, runs),
    })
}

/// Fraction of null benchmarks whose mean ranks all fit within one
/// Nemenyi critical difference, i.e. a single clique holds every model.
pub fn null_clique_coverage(runs: usize, design: NullDesign, alpha: f64, seed: u64) -> Result<f64> {
    design.validate()?;
    check_runs_alpha(runs, alpha)?;
    let cd = nemenyi_cd(design.k, design.n_tasks, alpha)?;
    let covered = (0..runs as u64)
        .into_par_iter()
        .map(|r| -> Result<bool> {
            let values = null_values(&design, &mut run_rng(seed, r));
            let mut sums = vec![0.0; design.k];
            for task in &values {
                let means: Vec<f64> = task.iter().map(|s| mean(s)).collect();
                for (s, rk) in sums
                    .iter_mut()
                    .zip(rank_task(&means, MetricDirection::HigherIsBetter)?)
                {
                    *s += rk;
                }
            }
            let n = design.n_tasks as f64;
            let lo = sums.iter().cloned().fold(f64::INFINITY, f64::min) / n;
            let hi = sums.iter().cloned().fold(f64::NEG_INFINITY, f64::max) / n;
            Ok(hi - lo <= cd + 1e-12)
        })
        .collect::<Result<Vec<bool>>>()?
        .into_iter()
        .filter(|&c| c)
        .count();
    Ok(covered as f64 / runs as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerPoint {
    pub gap: f64,
    pub power: f64,
}

/// Power of the paired t for two models on one task with `seeds` seeds as
/// the base gap varies. The noise of run `r` is identical at every gap.
pub fn power_curve(
    gaps: &[f64],
    runs: usize,
    seeds: usize,
    noise_sd: f64,
    alpha: f64,
    seed: u64,
) -> Result<Vec<PowerPoint>> {
    let design = NullDesign {
        k: 2,
        n_tasks: 1,
        seeds,
        noise_sd,
    };
    design.validate()?;
    check_runs_alpha(runs, alpha)?;
    if seeds < 2 {
        return Err(Error::InvalidArgument(
            "power needs at least two seeds".into(),
        ));
    }
    if gaps.iter().any(|g| !g.is_finite()) {
        return Err(Error::NonFinite);
    }
    let draws: Vec<Vec<Vec<f64>>> = (0..runs as u64)
        .into_par_iter()
        .map(|r| null_values(&design, &mut run_rng(seed, r)).swap_remove(0))
        .collect();
    gaps.iter()
        .map(|&gap| {
            let mut hits = 0;
            for pair in &draws {
                let a: Vec<f64> = pair[0].iter().map(|x| x + gap).collect();
                // a single comparison: Holm leaves it unchanged
                if paired_t(&a, &pair[1])?.p_value < alpha {
                    hits += 1;
                }
            }
            Ok(PowerPoint {
                gap,
                power: hits as f64 / runs as f64,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{validate_tensor, ModelSpec};
    use crate::runner::{reseed_all, run_benchmark, Registry, RunConfig, TaskSelector};

    fn request(task: &TaskSpec, model: &str, seed: u64) -> TrialRequest {
        TrialRequest {
            task: task.clone(),
            model: ModelSpec::new(model, [task.task_type.clone()]),
            seed,
            epochs: task.epochs,
            data_seed: task.seed_aware_data.then_some(seed),
        }
    }

    fn task() -> TaskSpec {
        TaskSpec::new(
            "t",
            "c",
            TaskType::NodeCls,
            "acc",
            MetricDirection::HigherIsBetter,
        )
    }

    #[test]
    fn zero_noise_returns_base() {
        let profile =
            SyntheticProfile::new([("a", ModelProfile::new(0.8, 0.0).with_offset("t", 0.05))]);
        for seed in 0..5 {
            let mut s = reseed_all(seed, "t", "a");
            let o = synthetic_trial(&profile, &request(&task(), "a", seed), &mut s).unwrap();
            assert_eq!(o.final_metric, 0.8 + 0.05);
        }
    }

    #[test]
    fn repeatable_and_unknown_model() {
        let profile = SyntheticProfile::new([("a", ModelProfile::new(0.8, 0.1))]);
        let run = |seed| {
            let mut s = reseed_all(seed, "t", "a");
            synthetic_trial(&profile, &request(&task(), "a", seed), &mut s)
                .unwrap()
                .final_metric
        };
        assert_eq!(run(3), run(3));
        assert_ne!(run(3), run(4));
        let mut s = reseed_all(0, "t", "b");
        assert!(matches!(
            synthetic_trial(&profile, &request(&task(), "b", 0), &mut s),
            Err(Error::UnknownModel(_))
        ));
    }

    #[test]
    fn data_stream_used_only_when_seed_aware() {
        let profile =
            SyntheticProfile::new([("a", ModelProfile::new(0.5, 0.0))]).with_data_noise(0.1);
        let plain = task();
        let aware = task().seed_aware(true);
        let mut s = reseed_all(1, "t", "a");
        assert_eq!(
            synthetic_trial(&profile, &request(&plain, "a", 1), &mut s)
                .unwrap()
                .final_metric,
            0.5
        );
        let mut s = reseed_all(1, "t", "a");
        assert_ne!(
            synthetic_trial(&profile, &request(&aware, "a", 1), &mut s)
                .unwrap()
                .final_metric,
            0.5
        );
    }

    #[test]
    fn profile_validation() {
        assert!(SyntheticProfile::new([("a", ModelProfile::new(0.5, -1.0))])
            .validate()
            .is_err());
        assert!(
            SyntheticProfile::new([("a", ModelProfile::new(f64::NAN, 0.0))])
                .validate()
                .is_err()
        );
        assert!(SyntheticProfile::default()
            .with_data_noise(-0.1)
            .validate()
            .is_err());
    }

    #[test]
    fn constant_gap_hits_wilcoxon_floor() {
        let mut reg = Registry::new();
        reg.register_task("c", task()).unwrap();
        for m in ["A", "B", "C", "D"] {
            reg.register_model(ModelSpec::new(m, [TaskType::NodeCls]))
                .unwrap();
        }
        // A sits far above the rest, so every paired difference with A
        // has the same sign
        let exec = SyntheticExecutor::new(SyntheticProfile::new([
            ("A", ModelProfile::new(0.80, 0.01)),
            ("B", ModelProfile::new(0.70, 0.01)),
            ("C", ModelProfile::new(0.60, 0.01)),
            ("D", ModelProfile::new(0.50, 0.01)),
        ]));
        let cfg = RunConfig::new(TaskSelector::Category("c".into()));
        let report = run_benchmark(&cfg, &reg, &exec).unwrap();
        let ab = &report.pairwise_for("t").unwrap()[0];
        assert_eq!((ab.model_a.as_str(), ab.model_b.as_str()), ("A", "B"));
        assert_eq!(ab.p_w_raw, 0.001953125);
        assert_eq!(ab.p_w_holm, 0.01171875);
    }

    #[test]
    fn null_tensor_properties() {
        let d = NullDesign {
            k: 4,
            n_tasks: 10,
            seeds: 10,
            noise_sd: 0.05,
        };
        let t = generate_null_tensor(d, 9).unwrap();
        assert!(validate_tensor(&t.to_document()).is_ok());
        assert_eq!(t.to_json(), generate_null_tensor(d, 9).unwrap().to_json());
        assert_ne!(t.to_json(), generate_null_tensor(d, 10).unwrap().to_json());

        let flat = generate_null_tensor(NullDesign { noise_sd: 0.0, ..d }, 1).unwrap();
        assert!(flat
            .cells()
            .all(|c| c.values.iter().all(|&v| v == NULL_BASE)));
        assert!(generate_null_tensor(NullDesign { k: 0, ..d }, 1).is_err());
    }

    #[test]
    fn fwer_degenerate_and_wilcoxon_floor() {
        let d = NullDesign {
            k: 4,
            n_tasks: 1,
            seeds: 10,
            noise_sd: 0.0,
        };
        assert_eq!(
            estimate_fwer(50, d, 0.05, PairwiseMethod::T, 0)
                .unwrap()
                .fwer,
            0.0
        );
        let d5 = NullDesign {
            seeds: 5,
            noise_sd: 1.0,
            ..d
        };
        assert_eq!(
            estimate_fwer(300, d5, 0.05, PairwiseMethod::Wilcoxon, 0)
                .unwrap()
                .fwer,
            0.0
        );
    }

    #[test]
    fn fwer_is_schedule_independent() {
        let d = NullDesign {
            k: 3,
            n_tasks: 2,
            seeds: 6,
            noise_sd: 1.0,
        };
        let a = estimate_fwer(200, d, 0.2, PairwiseMethod::T, 5).unwrap();
        let b = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| estimate_fwer(200, d, 0.2, PairwiseMethod::T, 5).unwrap());
        assert_eq!(a, b);
        assert!(a.ci[0] <= a.fwer && a.fwer <= a.ci[1]);
    }

    #[test]
    fn null_cliques_cover_all_models() {
        let d = NullDesign {
            k: 4,
            n_tasks: 30,
            seeds: 5,
            noise_sd: 1.0,
        };
        let cov = null_clique_coverage(2000, d, 0.05, 11).unwrap();
        assert!(cov >= 0.93, "coverage {cov}");
    }

    #[test]
    fn power_is_monotone_in_gap() {
        let curve = power_curve(&[0.0, 0.5, 1.5], 1000, 10, 1.0, 0.05, 3).unwrap();
        assert!(
            curve.windows(2).all(|w| w[0].power <= w[1].power),
            "{curve:?}"
        );
        assert!(curve[0].power < 0.1 && curve[2].power > 0.5, "{curve:?}");
    }

    #[test]
    fn wilson_bounds() {
        let [lo, hi] = wilson_interval(0, 100);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.05);
    }
}
