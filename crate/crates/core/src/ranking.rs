//! Across-task rank aggregation: per-task ranks under each task's metric
//! direction, the Friedman omnibus, the Nemenyi critical difference and
//! the cliques drawn in critical-difference diagrams.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{MetricDirection, MetricTensor};
use crate::stats::{average_ranks, chi2_sf, mean};

/// Studentized-range critical values divided by sqrt(2), infinite degrees
/// of freedom, for k = 2..=20 models. k <= 10 are the values published for
/// the Nemenyi test in Demšar (2006); the rest come from the same range
/// distribution rounded to three decimals.
const Q_ALPHA_005: [f64; 19] = [
    1.960, 2.343, 2.569, 2.728, 2.850, 2.949, 3.031, 3.102, 3.164, 3.219, 3.268, 3.313, 3.354,
    3.391, 3.426, 3.458, 3.489, 3.517, 3.544,
];
const Q_ALPHA_010: [f64; 19] = [
    1.645, 2.052, 2.291, 2.459, 2.589, 2.693, 2.780, 2.855, 2.920, 2.978, 3.030, 3.077, 3.120,
    3.159, 3.196, 3.230, 3.261, 3.291, 3.319,
];

const SPAN_TOL: f64 = 1e-12;

/// Ranks per task, 1 = best; ties share the average rank.
pub fn rank_task(values: &[f64], direction: MetricDirection) -> Result<Vec<f64>> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let keyed: Vec<f64> = match direction {
        MetricDirection::HigherIsBetter => values.iter().map(|v| -v).collect(),
        MetricDirection::LowerIsBetter => values.to_vec(),
    };
    Ok(average_ranks(&keyed))
}

/// `N x k` per-task ranks of the models present on every task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankTable {
    pub tasks: Vec<String>,
    pub models: Vec<String>,
    pub ranks: Vec<Vec<f64>>,
}

impl RankTable {
    pub fn new(tasks: Vec<String>, models: Vec<String>, ranks: Vec<Vec<f64>>) -> Result<Self> {
        if ranks.len() != tasks.len() {
            return Err(Error::LengthMismatch {
                left: ranks.len(),
                right: tasks.len(),
            });
        }
        let k = models.len() as f64;
        for row in &ranks {
            if row.len() != models.len() {
                return Err(Error::LengthMismatch {
                    left: row.len(),
                    right: models.len(),
                });
            }
            let sum: f64 = row.iter().sum();
            if (sum - k * (k + 1.0) / 2.0).abs() > 1e-9
                || row.iter().any(|&r| !(1.0..=k).contains(&r))
            {
                return Err(Error::InvalidArgument(format!(
                    "rank row {row:?} is not a ranking of {k} items"
                )));
            }
        }
        Ok(RankTable {
            tasks,
            models,
            ranks,
        })
    }

    pub fn n_tasks(&self) -> usize {
        self.ranks.len()
    }

    pub fn n_models(&self) -> usize {
        self.models.len()
    }

    pub fn mean_ranks(&self) -> Vec<f64> {
        let n = self.n_tasks() as f64;
        (0..self.n_models())
            .map(|i| self.ranks.iter().map(|row| row[i]).sum::<f64>() / n)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Friedman {
    pub chi2: f64,
    pub p_value: f64,
}

/// Friedman statistic from mean ranks:
/// `12N / (k(k+1)) * (sum r_i^2 - k(k+1)^2 / 4)` against chi-square(k-1).
pub fn friedman_from_mean_ranks(mean_ranks: &[f64], n_tasks: usize) -> Result<Friedman> {
    let k = mean_ranks.len();
    if n_tasks < 2 || k < 2 {
        return Err(Error::InvalidArgument(format!(
            "Friedman test needs N >= 2 tasks and k >= 2 models (N={n_tasks}, k={k})"
        )));
    }
    let (n, kf) = (n_tasks as f64, k as f64);
    let sum_sq: f64 = mean_ranks.iter().map(|r| r * r).sum();
    let chi2 = (12.0 * n / (kf * (kf + 1.0)) * (sum_sq - kf * (kf + 1.0).powi(2) / 4.0)).max(0.0);
    Ok(Friedman {
        chi2,
        p_value: chi2_sf(chi2, kf - 1.0),
    })
}

pub fn friedman(table: &RankTable) -> Result<Friedman> {
    friedman_from_mean_ranks(&table.mean_ranks(), table.n_tasks())
}

/// Tabulated `q_alpha` for `k` models; only alpha 0.05 and 0.10 exist.
pub fn q_alpha(k: usize, alpha: f64) -> Result<f64> {
    let table = if (alpha - 0.05).abs() < 1e-12 {
        &Q_ALPHA_005
    } else if (alpha - 0.10).abs() < 1e-12 {
        &Q_ALPHA_010
    } else {
        return Err(Error::Untabulated { k, alpha });
    };
    if !(2..=20).contains(&k) {
        return Err(Error::Untabulated { k, alpha });
    }
    Ok(table[k - 2])
}

/// Nemenyi critical difference `q_alpha * sqrt(k(k+1) / (6N))`.
pub fn nemenyi_cd(k: usize, n_tasks: usize, alpha: f64) -> Result<f64> {
    if n_tasks == 0 {
        return Err(Error::InvalidArgument("N must be at least 1".into()));
    }
    let q = q_alpha(k, alpha)?;
    let kf = k as f64;
    Ok(q * (kf * (kf + 1.0) / (6.0 * n_tasks as f64)).sqrt())
}

/// A run of models, contiguous in mean-rank order, spanning at most CD.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clique {
    /// Model indices in ascending mean-rank order.
    pub members: Vec<usize>,
    pub lo_rank: f64,
    pub hi_rank: f64,
}

/// Order of models by ascending mean rank; equal ranks keep input order.
pub fn rank_order(mean_ranks: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..mean_ranks.len()).collect();
    order.sort_by(|&a, &b| mean_ranks[a].total_cmp(&mean_ranks[b]));
    order
}

/// Maximal contiguous runs (in rank order) of at least two models whose
/// mean-rank span is within `cd`.
pub fn find_cliques(mean_ranks: &[f64], cd: f64) -> Vec<Clique> {
    if cd.is_nan() || cd <= 0.0 {
        return Vec::new();
    }
    let order = rank_order(mean_ranks);
    let r: Vec<f64> = order.iter().map(|&i| mean_ranks[i]).collect();
    let mut cliques = Vec::new();
    let mut last_end = 0usize;
    let mut end = 0usize;
    for start in 0..r.len() {
        end = end.max(start);
        while end + 1 < r.len() && r[end + 1] - r[start] <= cd + SPAN_TOL {
            end += 1;
        }
        if end > start && (cliques.is_empty() || end > last_end) {
            cliques.push(Clique {
                members: order[start..=end].to_vec(),
                lo_rank: r[start],
                hi_rank: r[end],
            });
            last_end = end;
        }
    }
    cliques
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdResult {
    pub models: Vec<String>,
    pub mean_ranks: Vec<f64>,
    pub chi2_friedman: f64,
    pub p_friedman: f64,
    pub k: usize,
    pub n: usize,
    pub alpha: f64,
    pub cd: f64,
    pub cliques: Vec<Clique>,
    pub table: RankTable,
}

impl CdResult {
    /// Assembles a result from a rank table.
    pub fn from_table(table: RankTable, alpha: f64) -> Result<Self> {
        let f = friedman(&table)?;
        let mean_ranks = table.mean_ranks();
        let k = table.n_models();
        let n = table.n_tasks();
        let cd = nemenyi_cd(k, n, alpha)?;
        let cliques = find_cliques(&mean_ranks, cd);
        Ok(CdResult {
            models: table.models.clone(),
            mean_ranks,
            chi2_friedman: f.chi2,
            p_friedman: f.p_value,
            k,
            n,
            alpha,
            cd,
            cliques,
            table,
        })
    }
}

/// Ranks the models present on every task by their per-task seed means and
/// runs Friedman + Nemenyi. The CD is reported whatever the omnibus says.
pub fn cd_analysis(tensor: &MetricTensor, alpha: f64) -> Result<CdResult> {
    let n_tasks = tensor.tasks().len();
    if n_tasks < 2 {
        return Err(Error::NotEnoughForRanking {
            what: "tasks",
            needed: 2,
            found: n_tasks,
        });
    }
    let universal: Vec<usize> = (0..tensor.models().len())
        .filter(|&m| (0..n_tasks).all(|t| tensor.series(t, m).is_some()))
        .collect();
    if universal.len() < 2 {
        return Err(Error::NotEnoughForRanking {
            what: "models present on every task",
            needed: 2,
            found: universal.len(),
        });
    }
    let mut ranks = Vec::with_capacity(n_tasks);
    for (ti, task) in tensor.tasks().iter().enumerate() {
        let means: Vec<f64> = universal
            .iter()
            .map(|&m| mean(tensor.series(ti, m).expect("universal")))
            .collect();
        ranks.push(rank_task(&means, task.direction)?);
    }
    let table = RankTable::new(
        tensor.tasks().iter().map(|t| t.name.clone()).collect(),
        universal
            .iter()
            .map(|&m| tensor.models()[m].clone())
            .collect(),
        ranks,
    )?;
    CdResult::from_table(table, alpha)
}
