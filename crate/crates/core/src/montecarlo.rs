//! Direct simulation of the parking process.
//!
//! A gap of length `g > 1` receives a car whose left end sits at
//! `T ~ TruncExp(λ)` on `(0, g−1)`; the gaps `(0, T)` and `(T+1, g)` are then
//! filled independently. The law restricted to either sub-gap, measured
//! from that sub-gap's left edge, is again the truncated exponential, so no
//! global coordinates are needed.
//!
//! Trial `i` draws from the ChaCha8 stream `i` keyed by the seed, so results
//! do not depend on how trials are scheduled across threads.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ParkError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub lambda: f64,
    pub length: f64,
    pub trials: u64,
    pub seed: u64,
}

impl SimConfig {
    pub fn new(lambda: f64, length: f64, trials: u64, seed: u64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(ParkError::InvalidParams(format!("lambda must be positive and finite, got {lambda}")));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(ParkError::InvalidParams(format!("length must be positive and finite, got {length}")));
        }
        if trials == 0 {
            return Err(ParkError::InvalidParams("trials must be at least 1".into()));
        }
        Ok(Self { lambda, length, trials, seed })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimStats {
    pub trials: u64,
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    pub stderr_mean: f64,
    /// `None` when every trial gave the same count.
    pub skewness: Option<f64>,
    pub excess_kurtosis: Option<f64>,
    /// Count → number of trials.
    pub histogram: BTreeMap<u64, u64>,
}

impl SimStats {
    pub fn from_histogram(histogram: BTreeMap<u64, u64>) -> Self {
        let trials: u64 = histogram.values().sum();
        let nf = trials as f64;
        let mean = histogram.iter().map(|(&k, &f)| k as f64 * f as f64).sum::<f64>() / nf;
        let central = |p: i32| histogram.iter().map(|(&k, &f)| f as f64 * (k as f64 - mean).powi(p)).sum::<f64>() / nf;
        let (m2, m3, m4) = (central(2), central(3), central(4));
        let variance = if trials > 1 { m2 * nf / (nf - 1.0) } else { 0.0 };
        let (skewness, excess_kurtosis) = if m2 > 0.0 {
            (Some(m3 / m2.powf(1.5)), Some(m4 / (m2 * m2) - 3.0))
        } else {
            (None, None)
        };
        Self { trials, mean, variance, stderr_mean: (variance / nf).sqrt(), skewness, excess_kurtosis, histogram }
    }

    /// Fourth central moment of the sample.
    pub fn central_moment4(&self) -> f64 {
        let nf = self.trials as f64;
        self.histogram.iter().map(|(&k, &f)| f as f64 * (k as f64 - self.mean).powi(4)).sum::<f64>() / nf
    }

    /// Standard error of the unbiased variance estimate.
    pub fn stderr_variance(&self) -> f64 {
        let nf = self.trials as f64;
        if self.trials < 4 {
            return f64::INFINITY;
        }
        let s2 = self.variance;
        ((self.central_moment4() - s2 * s2 * (nf - 3.0) / (nf - 1.0)) / nf).max(0.0).sqrt()
    }
}

/// Inverse CDF of the exponential law truncated to `[0, support_len)`.
pub fn sample_trunc_exp(lambda: f64, support_len: f64, u: f64) -> f64 {
    if lambda == 0.0 {
        return u * support_len;
    }
    let t = -(u * (-lambda * support_len).exp_m1()).ln_1p() / lambda;
    t.clamp(0.0, support_len)
}

/// Number of cars parked on `(0, length)` at saturation.
pub fn simulate_count<R: Rng + ?Sized>(lambda: f64, length: f64, rng: &mut R) -> u64 {
    let mut count = 0;
    let mut stack = vec![length];
    while let Some(g) = stack.pop() {
        if g > 1.0 {
            count += 1;
            let t = sample_trunc_exp(lambda, g - 1.0, rng.random::<f64>());
            stack.push(t);
            stack.push(g - 1.0 - t);
        }
    }
    count
}

fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Counts of every trial, in trial order.
pub fn run_counts(config: &SimConfig) -> Vec<u64> {
    (0..config.trials)
        .into_par_iter()
        .map(|i| simulate_count(config.lambda, config.length, &mut trial_rng(config.seed, i)))
        .collect()
}

pub fn run_mc(config: &SimConfig) -> SimStats {
    let histogram = (0..config.trials)
        .into_par_iter()
        .fold(BTreeMap::new, |mut h: BTreeMap<u64, u64>, i| {
            let v = simulate_count(config.lambda, config.length, &mut trial_rng(config.seed, i));
            *h.entry(v).or_insert(0) += 1;
            h
        })
        .reduce(BTreeMap::new, |mut a, b| {
            for (k, f) in b {
                *a.entry(k).or_insert(0) += f;
            }
            a
        });
    SimStats::from_histogram(histogram)
}

/// Mean third power and mean fourth power minus 3 of
/// `Z = (v − m_ref)/√var_ref`, taken about the reference values rather than
/// the sample moments.
pub fn z_moments(stats: &SimStats, m_ref: f64, var_ref: f64) -> Result<(f64, f64)> {
    if !(var_ref.is_finite() && var_ref > 0.0) {
        return Err(ParkError::Precondition(format!("reference variance must be positive, got {var_ref}")));
    }
    let sd = var_ref.sqrt();
    let nf = stats.trials as f64;
    let raw = |p: i32| {
        stats.histogram.iter().map(|(&k, &f)| f as f64 * ((k as f64 - m_ref) / sd).powi(p)).sum::<f64>() / nf
    };
    Ok((raw(3), raw(4) - 3.0))
}

/// Simulate `config` and return [`z_moments`] of the result.
pub fn z_diagnostics(config: &SimConfig, m_ref: f64, var_ref: f64) -> Result<(f64, f64)> {
    if !(var_ref.is_finite() && var_ref > 0.0) {
        return Err(ParkError::Precondition(format!("reference variance must be positive, got {var_ref}")));
    }
    z_moments(&run_mc(config), m_ref, var_ref)
}
