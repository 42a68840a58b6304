use super::cell::{mean, sample_variance};
use super::special::t_two_sided;
use crate::error::{Error, Result};

/// Seed-paired t-test outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairedT {
    pub mean_diff: f64,
    pub t_stat: f64,
    pub p_value: f64,
    /// Cohen's d_z; `None` when the differences have zero spread but a
    /// non-zero mean.
    pub dz: Option<f64>,
    /// Differences have zero spread.
    pub degenerate: bool,
}

/// Relative scale below which the spread of differences counts as zero.
const DEGENERATE_RTOL: f64 = 1e-12;

/// Paired t-test on `d_s = xs[s] - ys[s]`, two-sided against `t_{S-1}`.
///
/// Zero-spread differences are degenerate: an all-zero mean reports
/// `p = 1, dz = 0`, anything else `p = 0` with an undefined `dz` and an
/// infinite statistic carrying the sign of the mean.
pub fn paired_t(xs: &[f64], ys: &[f64]) -> Result<PairedT> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch {
            left: xs.len(),
            right: ys.len(),
        });
    }
    if xs.len() < 2 {
        return Err(Error::InsufficientSamples {
            needed: 2,
            got: xs.len(),
        });
    }
    let n = xs.len() as f64;
    let d: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| x - y).collect();
    let mean_diff = mean(&d);
    let sd = sample_variance(&d).sqrt();

    let scale = xs.iter().chain(ys).fold(0.0_f64, |acc, v| acc.max(v.abs()));
    let tol = DEGENERATE_RTOL * scale;
    if sd <= tol {
        if mean_diff.abs() <= tol {
            return Ok(PairedT {
                mean_diff,
                t_stat: 0.0,
                p_value: 1.0,
                dz: Some(0.0),
                degenerate: true,
            });
        }
        return Ok(PairedT {
            mean_diff,
            t_stat: f64::INFINITY.copysign(mean_diff),
            p_value: 0.0,
            dz: None,
            degenerate: true,
        });
    }
    let t_stat = mean_diff / (sd / n.sqrt());
    Ok(PairedT {
        mean_diff,
        t_stat,
        p_value: t_two_sided(t_stat, n - 1.0),
        dz: Some(mean_diff / sd),
        degenerate: false,
    })
}
