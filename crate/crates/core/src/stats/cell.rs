use serde::{Deserialize, Serialize};

use super::special::t_quantile;
use crate::error::{Error, Result};
use crate::model::CiMethod;

/// Mean and confidence half-width for one (task, model) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub task: String,
    pub model: String,
    pub mean: f64,
    pub halfwidth: f64,
    pub n_seeds: usize,
    pub ci_method: CiMethod,
    pub alpha: f64,
}

impl CellSummary {
    pub fn lower(&self) -> f64 {
        self.mean - self.halfwidth
    }

    pub fn upper(&self) -> f64 {
        self.mean + self.halfwidth
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellEstimate {
    pub mean: f64,
    pub variance: f64,
    pub halfwidth: f64,
}

/// Arithmetic mean, accumulated relative to the first element so that a
/// constant sample returns that constant exactly.
pub fn mean(xs: &[f64]) -> f64 {
    let x0 = xs[0];
    x0 + xs.iter().map(|x| x - x0).sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance, corrected two-pass form.
pub fn sample_variance(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let m = mean(xs);
    let (sq, lin) = xs.iter().fold((0.0, 0.0), |(sq, lin), &x| {
        let d = x - m;
        (sq + d * d, lin + d)
    });
    ((sq - lin * lin / n) / (n - 1.0)).max(0.0)
}

/// Sample mean, unbiased variance and Student-t half-width
/// `t_{S-1, 1-alpha/2} * sd / sqrt(S)`.
pub fn cell_estimate(samples: &[f64], alpha: f64) -> Result<CellEstimate> {
    if samples.len() < 2 {
        return Err(Error::InsufficientSamples {
            needed: 2,
            got: samples.len(),
        });
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidProbability(alpha));
    }
    let n = samples.len() as f64;
    let mean = mean(samples);
    let variance = sample_variance(samples);
    let halfwidth = if variance == 0.0 {
        0.0
    } else {
        t_quantile(n - 1.0, 1.0 - alpha / 2.0)? * variance.sqrt() / n.sqrt()
    };
    Ok(CellEstimate {
        mean,
        variance,
        halfwidth,
    })
}
