//! The structured report: per-cell intervals, per-task pairwise families
//! and the across-task CD analysis, plus the tables derived from it.

mod cache;
mod format;
mod latex;
mod text;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::{CiMethod, MetricDirection, MetricTensor, PairwiseMethod, ReportConfig};
use crate::ranking::{cd_analysis, CdResult};
use crate::stats::{
    bootstrap_halfwidth, cell_estimate, mean, pairwise_task, BootstrapSpec, CellSummary,
    PairwiseResult,
};

pub use cache::{
    cache_load, cache_save, decode as cache_decode, encode as cache_encode, CACHE_SCHEMA_VERSION,
};
pub use format::{format_cell, format_delta, format_p};
pub use latex::{to_latex, LatexOptions, LatexTable};
pub use text::{cd_text, pairwise_text, summary_text};

pub const ENGINE_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskPairwise {
    pub task: String,
    pub results: Vec<PairwiseResult>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    /// sha256 of the canonical tensor and report-config JSON.
    pub input_digest: String,
    /// sha256 of the run configuration, when the report came from a run.
    #[serde(default)]
    pub run_config_digest: Option<String>,
    pub engine_version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub config: ReportConfig,
    pub tensor: MetricTensor,
    pub cells: Vec<CellSummary>,
    pub pairwise: Vec<TaskPairwise>,
    pub cd: Option<CdResult>,
    pub provenance: Provenance,
}

pub(crate) fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn input_digest(tensor: &MetricTensor, config: &ReportConfig) -> String {
    let mut h = Sha256::new();
    h.update(serde_json::to_vec(tensor).expect("tensor serializes"));
    h.update(b"\n");
    h.update(serde_json::to_vec(config).expect("config serializes"));
    hex::encode(h.finalize())
}

fn summarize(
    task: &str,
    model: &str,
    values: &[f64],
    config: &ReportConfig,
) -> Result<CellSummary> {
    let (mean, halfwidth) = match config.ci_method {
        CiMethod::T => {
            let e = cell_estimate(values, config.alpha)?;
            (e.mean, e.halfwidth)
        }
        CiMethod::Bootstrap => {
            let spec = BootstrapSpec {
                resamples: config.bootstrap_b,
                seed: config.bootstrap_seed,
            };
            (
                mean(values),
                bootstrap_halfwidth(values, config.alpha, spec)?,
            )
        }
    };
    Ok(CellSummary {
        task: task.to_owned(),
        model: model.to_owned(),
        mean,
        halfwidth,
        n_seeds: values.len(),
        ci_method: config.ci_method,
        alpha: config.alpha,
    })
}

/// Builds the full report. Cells and task families are evaluated in
/// parallel and merged in registry order, so the output is a pure function
/// of `(tensor, config)`.
///
/// The CD analysis is left out (not an error) when fewer than two tasks or
/// two universally present models exist, or when no critical value is
/// tabulated for `(k, alpha)`.
pub fn build_report(tensor: &MetricTensor, config: &ReportConfig) -> Result<BenchmarkReport> {
    config.validate()?;
    let views: Vec<_> = tensor.cells().collect();
    let cells = views
        .par_iter()
        .map(|c| summarize(&c.task.name, c.model, c.values, config))
        .collect::<Result<Vec<_>>>()?;

    let pairwise = tensor
        .tasks()
        .par_iter()
        .enumerate()
        .map(|(ti, task)| {
            let results = if tensor.present_models(ti).count() < 2 {
                Vec::new()
            } else {
                pairwise_task(tensor, &task.name, config)?
            };
            Ok(TaskPairwise {
                task: task.name.clone(),
                results,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let cd = match cd_analysis(tensor, config.alpha) {
        Ok(cd) => Some(cd),
        Err(Error::NotEnoughForRanking { .. } | Error::Untabulated { .. }) => None,
        Err(e) => return Err(e),
    };

    Ok(BenchmarkReport {
        config: config.clone(),
        tensor: tensor.clone(),
        cells,
        pairwise,
        cd,
        provenance: Provenance {
            input_digest: input_digest(tensor, config),
            run_config_digest: None,
            engine_version: ENGINE_VERSION.to_owned(),
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellMark {
    Winner,
    Tie,
    Plain,
    Incompatible,
}

/// Marks for one task row, aligned with the tensor's model order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowMarks {
    pub task: String,
    pub marks: Vec<CellMark>,
    pub winner: Option<usize>,
    /// Set when another model had exactly the winner's mean and registry
    /// order decided.
    pub tie_broken: bool,
}

impl BenchmarkReport {
    pub fn cell(&self, task: &str, model: &str) -> Option<&CellSummary> {
        self.cells
            .iter()
            .find(|c| c.task == task && c.model == model)
    }

    pub fn pairwise_for(&self, task: &str) -> Option<&[PairwiseResult]> {
        self.pairwise
            .iter()
            .find(|p| p.task == task)
            .map(|p| p.results.as_slice())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn intervals_meet(a: &CellSummary, b: &CellSummary) -> bool {
    a.lower() <= b.upper() && b.lower() <= a.upper()
}

/// Winner = best mean under the task's direction; a model is marked tie
/// when its closed interval `[mean - h, mean + h]` meets the winner's.
pub fn mark_cells(report: &BenchmarkReport, task: &str) -> Result<RowMarks> {
    let spec = report.tensor.task(task)?;
    let cells: Vec<Option<&CellSummary>> = report
        .tensor
        .models()
        .iter()
        .map(|m| report.cell(task, m))
        .collect();

    let mut winner: Option<usize> = None;
    let mut tie_broken = false;
    for (i, c) in cells.iter().enumerate() {
        let Some(c) = c else { continue };
        match winner {
            None => winner = Some(i),
            Some(w) => {
                let best = cells[w].expect("winner present").mean;
                if spec.direction.better(c.mean, best) {
                    winner = Some(i);
                    tie_broken = false;
                } else if c.mean == best {
                    tie_broken = true;
                }
            }
        }
    }

    let marks = cells
        .iter()
        .enumerate()
        .map(|(i, c)| match (c, winner) {
            (None, _) => CellMark::Incompatible,
            (Some(_), Some(w)) if w == i => CellMark::Winner,
            (Some(c), Some(w)) if intervals_meet(c, cells[w].expect("winner present")) => {
                CellMark::Tie
            }
            _ => CellMark::Plain,
        })
        .collect();

    Ok(RowMarks {
        task: task.to_owned(),
        marks,
        winner,
        tie_broken,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub task: String,
    pub model: String,
    pub mean: Option<f64>,
    pub halfwidth: Option<f64>,
    pub mark: CellMark,
    pub direction: MetricDirection,
    pub rendered: String,
}

/// One row per (task, model) in registry order, incompatible pairs included.
pub fn summary_table(report: &BenchmarkReport) -> Vec<SummaryRow> {
    let mut rows = Vec::new();
    for task in report.tensor.tasks() {
        let marks = mark_cells(report, &task.name).expect("task from the report's own tensor");
        for (model, mark) in report.tensor.models().iter().zip(marks.marks) {
            let cell = report.cell(&task.name, model);
            rows.push(SummaryRow {
                task: task.name.clone(),
                model: model.clone(),
                mean: cell.map(|c| c.mean),
                halfwidth: cell.map(|c| c.halfwidth),
                mark,
                direction: task.direction,
                rendered: cell
                    .map(|c| format_cell(c.mean, c.halfwidth))
                    .unwrap_or_else(|| "n/a".to_owned()),
            });
        }
    }
    rows
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseRow {
    pub task: String,
    pub model_a: String,
    pub model_b: String,
    pub delta_mu: f64,
    pub p_holm_t: Option<f64>,
    pub p_holm_w: Option<f64>,
    pub significant_t: Option<bool>,
    pub significant_w: Option<bool>,
    /// Whether both methods reach the same verdict; only with `Both`.
    pub agree: Option<bool>,
}

impl PairwiseRow {
    /// Significant under every requested method.
    pub fn significant(&self) -> bool {
        self.significant_t.unwrap_or(true) && self.significant_w.unwrap_or(true)
    }
}

pub fn pairwise_table(report: &BenchmarkReport, method: PairwiseMethod) -> Vec<PairwiseRow> {
    let alpha = report.config.alpha;
    report
        .pairwise
        .iter()
        .flat_map(|tp| tp.results.iter())
        .map(|r| {
            let p_t = method.includes_t().then_some(r.p_t_holm);
            let p_w = method.includes_wilcoxon().then_some(r.p_w_holm);
            let sig_t = p_t.map(|p| p < alpha);
            let sig_w = p_w.map(|p| p < alpha);
            PairwiseRow {
                task: r.task.clone(),
                model_a: r.model_a.clone(),
                model_b: r.model_b.clone(),
                delta_mu: r.delta_mu,
                p_holm_t: p_t,
                p_holm_w: p_w,
                significant_t: sig_t,
                significant_w: sig_w,
                agree: sig_t.zip(sig_w).map(|(a, b)| a == b),
            }
        })
        .collect()
}
