use serde::{Deserialize, Serialize};

use super::holm::holm_adjust;
use super::paired::paired_t;
use super::wilcoxon::wilcoxon_signed_rank;
use crate::error::{Error, Result};
use crate::model::{MetricTensor, ReportConfig};

/// Seed-paired comparison of `model_a` against `model_b` on one task.
/// `delta_mu` is positive when `model_a` has the larger raw metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseResult {
    pub task: String,
    pub model_a: String,
    pub model_b: String,
    pub delta_mu: f64,
    #[serde(with = "crate::serde_ext::extended_f64")]
    pub t_stat: f64,
    pub p_t_raw: f64,
    pub p_t_holm: f64,
    pub w_stat: f64,
    pub p_w_raw: f64,
    pub p_w_holm: f64,
    pub n_effective: usize,
    pub dz: Option<f64>,
    pub degenerate: bool,
}

/// All `C(k, 2)` seed-paired comparisons on `task`, each test method
/// Holm-corrected within the task's own family.
pub fn pairwise_task(
    tensor: &MetricTensor,
    task: &str,
    config: &ReportConfig,
) -> Result<Vec<PairwiseResult>> {
    config.validate()?;
    let ti = tensor
        .task_index(task)
        .ok_or_else(|| Error::UnknownTask(task.to_owned()))?;
    let present: Vec<usize> = tensor.present_models(ti).collect();
    if present.len() < 2 {
        return Err(Error::NotEnoughModels {
            task: task.to_owned(),
            found: present.len(),
        });
    }

    let mut results = Vec::with_capacity(present.len() * (present.len() - 1) / 2);
    for (i, &a) in present.iter().enumerate() {
        for &b in &present[i + 1..] {
            let xs = tensor.series(ti, a).expect("present");
            let ys = tensor.series(ti, b).expect("present");
            let t = paired_t(xs, ys)?;
            let w = wilcoxon_signed_rank(xs, ys)?;
            results.push(PairwiseResult {
                task: task.to_owned(),
                model_a: tensor.models()[a].clone(),
                model_b: tensor.models()[b].clone(),
                delta_mu: t.mean_diff,
                t_stat: t.t_stat,
                p_t_raw: t.p_value,
                p_t_holm: t.p_value,
                w_stat: w.w_stat,
                p_w_raw: w.p_value,
                p_w_holm: w.p_value,
                n_effective: w.n_effective,
                dz: t.dz,
                degenerate: t.degenerate,
            });
        }
    }

    let t_raw: Vec<f64> = results.iter().map(|r| r.p_t_raw).collect();
    let w_raw: Vec<f64> = results.iter().map(|r| r.p_w_raw).collect();
    for ((r, t), w) in results
        .iter_mut()
        .zip(holm_adjust(&t_raw)?)
        .zip(holm_adjust(&w_raw)?)
    {
        r.p_t_holm = t;
        r.p_w_holm = w;
    }
    Ok(results)
}
