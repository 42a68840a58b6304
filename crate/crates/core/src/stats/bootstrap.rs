use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BootstrapSpec {
    pub resamples: usize,
    pub seed: u64,
}

impl Default for BootstrapSpec {
    fn default() -> Self {
        BootstrapSpec {
            resamples: 10_000,
            seed: 0,
        }
    }
}

/// Linear-interpolation quantile of sorted data (the `(n-1)p` rule).
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Half the width of the percentile-bootstrap interval of the mean.
///
/// The sample is sorted before resampling, so the result depends only on
/// the multiset of values and on `(alpha, resamples, seed)`.
pub fn bootstrap_halfwidth(samples: &[f64], alpha: f64, spec: BootstrapSpec) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::InsufficientSamples { needed: 1, got: 0 });
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidProbability(alpha));
    }
    if spec.resamples == 0 {
        return Err(Error::InvalidArgument(
            "bootstrap needs at least one resample".into(),
        ));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let bound = u32::try_from(n)
        .map_err(|_| Error::InvalidArgument("sample too large to resample".into()))?;

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut means: Vec<f64> = (0..spec.resamples)
        .map(|_| {
            let sum: f64 = (0..n)
                .map(|_| sorted[rng.random_range(0..bound) as usize])
                .sum();
            sum / n as f64
        })
        .collect();
    means.sort_by(f64::total_cmp);
    let lo = quantile_sorted(&means, alpha / 2.0);
    let hi = quantile_sorted(&means, 1.0 - alpha / 2.0);
    Ok(0.5 * (hi - lo))
}
