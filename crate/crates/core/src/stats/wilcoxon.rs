use super::special::normal_sf;
use crate::error::{Error, Result};

/// Largest number of non-zero differences referred to the exact null.
pub const EXACT_LIMIT: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedRank {
    /// `W = sum(R | d > 0) - sum(R | d < 0)`.
    pub w_stat: f64,
    pub p_value: f64,
    pub n_effective: usize,
    pub exact: bool,
}

/// Average ranks (1-based) of `values`, ties sharing the mean of their
/// positions.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Wilcoxon signed-rank test on the paired differences `xs - ys`.
///
/// Zero differences are dropped before ranking. Up to [`EXACT_LIMIT`]
/// remaining pairs the two-sided p-value is exact under the observed rank
/// multiset, so tied `|d|` need no separate correction. Beyond that a
/// normal approximation with tie-corrected variance and a 0.5 continuity
/// correction on the positive rank sum is used.
pub fn wilcoxon_signed_rank(xs: &[f64], ys: &[f64]) -> Result<SignedRank> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch {
            left: xs.len(),
            right: ys.len(),
        });
    }
    let d: Vec<f64> = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| x - y)
        .filter(|&v| v != 0.0)
        .collect();
    let n = d.len();
    if n == 0 {
        return Ok(SignedRank {
            w_stat: 0.0,
            p_value: 1.0,
            n_effective: 0,
            exact: true,
        });
    }
    let abs: Vec<f64> = d.iter().map(|v| v.abs()).collect();
    let ranks = average_ranks(&abs);
    let w_stat: f64 = d
        .iter()
        .zip(&ranks)
        .map(|(&v, &r)| if v > 0.0 { r } else { -r })
        .sum();

    if n <= EXACT_LIMIT {
        Ok(SignedRank {
            w_stat,
            p_value: exact_p(&d, &ranks),
            n_effective: n,
            exact: true,
        })
    } else {
        Ok(SignedRank {
            w_stat,
            p_value: normal_p(&d, &ranks),
            n_effective: n,
            exact: false,
        })
    }
}

/// Counts sign assignments with `|W| >= |W_obs|` by a subset-sum table over
/// doubled (hence integral) ranks.
fn exact_p(d: &[f64], ranks: &[f64]) -> f64 {
    let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
    let total: usize = doubled.iter().sum();
    let positive: usize = d
        .iter()
        .zip(&doubled)
        .filter(|(&v, _)| v > 0.0)
        .map(|(_, &r)| r)
        .sum();
    let observed = (2 * positive).abs_diff(total);

    // counts[s] = number of sign patterns whose positive doubled-rank sum is s
    let mut counts = vec![0u64; total + 1];
    counts[0] = 1;
    let mut reach = 0;
    for &r in &doubled {
        for s in (0..=reach).rev() {
            if counts[s] != 0 {
                counts[s + r] += counts[s];
            }
        }
        reach += r;
    }
    let extreme: u64 = counts
        .iter()
        .enumerate()
        .filter(|&(s, _)| (2 * s).abs_diff(total) >= observed)
        .map(|(_, &c)| c)
        .sum();
    extreme as f64 / (1u64 << d.len()) as f64
}

fn normal_p(d: &[f64], ranks: &[f64]) -> f64 {
    let n = d.len() as f64;
    let t_plus: f64 = d
        .iter()
        .zip(ranks)
        .filter(|(&v, _)| v > 0.0)
        .map(|(_, &r)| r)
        .sum();
    let mean = n * (n + 1.0) / 4.0;
    let mut abs: Vec<f64> = d.iter().map(|v| v.abs()).collect();
    abs.sort_by(f64::total_cmp);
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < abs.len() {
        let mut j = i;
        while j + 1 < abs.len() && abs[j + 1] == abs[i] {
            j += 1;
        }
        let t = (j - i + 1) as f64;
        tie_term += t * t * t - t;
        i = j + 1;
    }
    let var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term / 48.0;
    let z = ((t_plus - mean).abs() - 0.5).max(0.0) / var.sqrt();
    (2.0 * normal_sf(z)).min(1.0)
}
