//! Rayleigh-distributed radial pointing error of the laser hop, reproducible
//! sampling and descriptive statistics of sampled power distributions.
//!
//! Sampling is split into fixed-size batches. Batch `k` draws from a ChaCha8
//! stream selected by `k` on a generator seeded with the run seed, so the
//! sample vector is identical however many threads do the work.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Samples per generator stream.
pub const BATCH_SIZE: usize = 16_384;

/// Chunk length for the ordered partial sums in [`summarize`].
const SUM_CHUNK: usize = 65_536;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PointingModel {
    /// Rayleigh scale of the radial offset at the array, m.
    pub sigma: f64,
    /// Angular pointing error, rad. Carried for reporting; the offset model
    /// uses `sigma` directly.
    pub beta: f64,
}

impl Default for PointingModel {
    fn default() -> Self {
        PointingModel {
            sigma: 0.5,
            beta: 2.68e-6,
        }
    }
}

impl PointingModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(Error::validation(
                "pointing.sigma",
                format!("{} must be finite and > 0", self.sigma),
            ));
        }
        if !(self.beta.is_finite() && self.beta >= 0.0) {
            return Err(Error::validation(
                "pointing.beta",
                format!("{} must be finite and >= 0", self.beta),
            ));
        }
        Ok(())
    }

    /// Rayleigh density of the offset, 1/m. Zero for `v <= 0`.
    pub fn pdf(&self, v: f64) -> f64 {
        if v <= 0.0 {
            return 0.0;
        }
        let s2 = self.sigma * self.sigma;
        v / s2 * (-v * v / (2.0 * s2)).exp()
    }

    pub fn cdf(&self, v: f64) -> f64 {
        if v <= 0.0 {
            return 0.0;
        }
        -(-v * v / (2.0 * self.sigma * self.sigma)).exp_m1()
    }

    /// Offset at cumulative probability `u` in [0, 1).
    pub fn inverse_cdf(&self, u: f64) -> f64 {
        self.sigma * (-2.0 * (-u).ln_1p()).sqrt()
    }

    pub fn mean(&self) -> f64 {
        self.sigma * (std::f64::consts::PI / 2.0).sqrt()
    }

    pub fn variance(&self) -> f64 {
        (2.0 - std::f64::consts::PI / 2.0) * self.sigma * self.sigma
    }

    pub fn mode(&self) -> f64 {
        self.sigma
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub n_samples: usize,
    pub seed: u64,
}

impl McConfig {
    pub fn new(n_samples: usize, seed: u64) -> Self {
        McConfig { n_samples, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(Error::validation("monte_carlo.n_samples", "must be >= 1"));
        }
        Ok(())
    }
}

/// `cfg.n_samples` independent Rayleigh offsets by inverse-CDF sampling.
pub fn sample_offsets(model: &PointingModel, cfg: &McConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    let n = cfg.n_samples;
    let batches = n.div_ceil(BATCH_SIZE);
    let chunks: Vec<Vec<f64>> = (0..batches)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(k as u64);
            let len = BATCH_SIZE.min(n - k * BATCH_SIZE);
            (0..len)
                .map(|_| model.inverse_cdf(rng.random::<f64>()))
                .collect()
        })
        .collect();
    Ok(chunks.concat())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub center: f64,
    pub density: f64,
}

/// Descriptive statistics of a sample set. `std_dev` uses the population
/// (1/N) convention.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McStats {
    pub count: usize,
    pub mean: f64,
    pub std_dev: f64,
    pub min: f64,
    pub max: f64,
    pub bin_width: f64,
    pub histogram: Vec<HistogramBin>,
}

impl McStats {
    /// Sum of density times bin width; 1 up to rounding.
    pub fn histogram_mass(&self) -> f64 {
        self.histogram.iter().map(|b| b.density).sum::<f64>() * self.bin_width
    }
}

/// Mean, population standard deviation, range and an equal-width,
/// density-normalised histogram over `[min, max]`.
///
/// When every sample is equal the histogram spans a unit-width interval
/// centred on that value.
pub fn summarize(samples: &[f64], n_bins: usize) -> Result<McStats> {
    if samples.is_empty() {
        return Err(Error::Contract(
            "cannot summarize an empty sample set".into(),
        ));
    }
    if n_bins == 0 {
        return Err(Error::Contract("histogram needs at least one bin".into()));
    }
    let n = samples.len() as f64;
    let mean = ordered_sum(samples, |x| x) / n;
    let var = ordered_sum(samples, |x| (x - mean) * (x - mean)) / n;
    let (min, max) = samples
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        });

    let (lo, width) = if max > min {
        (min, (max - min) / n_bins as f64)
    } else {
        (min - 0.5, 1.0 / n_bins as f64)
    };
    let mut counts = vec![0usize; n_bins];
    for &x in samples {
        let k = (((x - lo) / width) as usize).min(n_bins - 1);
        counts[k] += 1;
    }
    let histogram = counts
        .iter()
        .enumerate()
        .map(|(k, &c)| HistogramBin {
            center: lo + (k as f64 + 0.5) * width,
            density: c as f64 / (n * width),
        })
        .collect();

    Ok(McStats {
        count: samples.len(),
        // keep min <= mean <= max under rounding
        mean: mean.clamp(min, max),
        std_dev: var.sqrt(),
        min,
        max,
        bin_width: width,
        histogram,
    })
}

/// Sum of `f(x)` with fixed chunking, so the result does not depend on the
/// thread pool.
fn ordered_sum(xs: &[f64], f: impl Fn(f64) -> f64 + Sync) -> f64 {
    let partials: Vec<f64> = xs
        .par_chunks(SUM_CHUNK)
        .map(|c| c.iter().map(|&x| f(x)).sum::<f64>())
        .collect();
    partials.iter().sum()
}

/// Kolmogorov–Smirnov distance between the empirical distribution of
/// `samples` and `cdf`.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}
