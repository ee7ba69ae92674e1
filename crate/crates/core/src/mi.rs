//! k-nearest-neighbour mutual information (counting variant) used as the
//! non-Bayesian comparison method.
//!
//! Distances are max-norm on standardized coordinates. For each point the
//! k-th nearest joint-space neighbour distance ε_i is found, the marginal
//! neighbour counts n_x, n_y within ε_i (strict) are taken, and the
//! estimate is ψ(k) + ψ(n) − ⟨ψ(n_x+1) + ψ(n_y+1)⟩ in nats.

use serde::{Deserialize, Serialize};

use crate::stats::{digamma, splitmix64, standardize, RngStream};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MiConfig {
    /// Neighbour count.
    pub k: usize,
}

impl Default for MiConfig {
    fn default() -> Self {
        MiConfig { k: crate::dpm::defaults::MI_NEIGHBOURS }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MiEstimate {
    /// Mutual information in nats (can be slightly negative by estimator noise).
    pub value: f64,
    /// True when duplicate points forced a deterministic jitter.
    pub jitter_applied: bool,
}

pub fn knn_mi(x: &[f64], y: &[f64], config: &MiConfig) -> Result<MiEstimate> {
    if x.len() != y.len() {
        return Err(Error::invalid("paired samples must have equal length"));
    }
    let n = x.len();
    if !(1 <= config.k && config.k < n) {
        return Err(Error::invalid(format!(
            "need 1 <= k < n, got k={} with n={n}",
            config.k
        )));
    }
    if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
        return Err(Error::invalid("samples must be finite"));
    }
    let (zx, _, _) = standardize(x);
    let (zy, _, _) = standardize(y);
    match ksg_estimate(&zx, &zy, config.k) {
        Some(value) => Ok(MiEstimate { value, jitter_applied: false }),
        None => {
            // duplicate joints collapsed the k-NN distance; add a tiny
            // index-keyed deterministic jitter and retry once
            let jx = jittered(&zx);
            let jy = jittered(&zy);
            let value = ksg_estimate(&jx, &jy, config.k).ok_or_else(|| {
                Error::invalid("degenerate sample: jitter did not separate duplicates")
            })?;
            Ok(MiEstimate { value, jitter_applied: true })
        }
    }
}

// Returns None when some k-NN distance is exactly zero.
fn ksg_estimate(x: &[f64], y: &[f64], k: usize) -> Option<f64> {
    let n = x.len();
    let mut dist = Vec::with_capacity(n - 1);
    // marginal counts are integers; accumulating their histogram keeps the
    // estimate exactly invariant to any common reordering of the samples
    let mut count_hist = vec![0u32; n + 1];
    for i in 0..n {
        dist.clear();
        for j in 0..n {
            if j != i {
                let d = (x[i] - x[j]).abs().max((y[i] - y[j]).abs());
                dist.push(d);
            }
        }
        let (_, kth, _) = dist.select_nth_unstable_by(k - 1, |a, b| a.total_cmp(b));
        let eps = *kth;
        if eps == 0.0 {
            return None;
        }
        let mut nx = 0usize;
        let mut ny = 0usize;
        for j in 0..n {
            if j != i {
                if (x[i] - x[j]).abs() < eps {
                    nx += 1;
                }
                if (y[i] - y[j]).abs() < eps {
                    ny += 1;
                }
            }
        }
        count_hist[nx] += 1;
        count_hist[ny] += 1;
    }
    let mut psi_sum = 0.0;
    for (count, &hits) in count_hist.iter().enumerate() {
        if hits > 0 {
            psi_sum +=
                hits as f64 * digamma(count as f64 + 1.0).expect("positive argument");
        }
    }
    let nf = n as f64;
    let value = digamma(k as f64).expect("positive") + digamma(nf).expect("positive")
        - psi_sum / nf;
    Some(value)
}

// Index-keyed jitter of relative size 1e-10: depends only on the array
// itself, so swapping the two samples still swaps the jittered values.
fn jittered(z: &[f64]) -> Vec<f64> {
    let sd = {
        let n = z.len() as f64;
        let mean = z.iter().sum::<f64>() / n;
        let ss: f64 = z.iter().map(|v| (v - mean) * (v - mean)).sum();
        (ss / (n - 1.0).max(1.0)).sqrt().max(1.0)
    };
    z.iter()
        .enumerate()
        .map(|(i, &v)| {
            let u = splitmix64(i as u64) as f64 / u64::MAX as f64;
            v + 1e-10 * sd * (2.0 * u - 1.0)
        })
        .collect()
}

/// Empirical (1 − level) quantile of the estimator over index-permuted
/// copies of the second sample.
pub fn permutation_threshold(
    x: &[f64],
    y: &[f64],
    config: &MiConfig,
    n_perm: usize,
    level: f64,
    stream: RngStream,
) -> Result<f64> {
    if n_perm < 20 {
        return Err(Error::invalid(format!("need n_perm >= 20, got {n_perm}")));
    }
    if !(0.0..=1.0).contains(&level) {
        return Err(Error::invalid(format!("level must be in [0,1], got {level}")));
    }
    let mut rng = stream.rng();
    let mut values = Vec::with_capacity(n_perm);
    let mut perm: Vec<usize> = (0..y.len()).collect();
    let mut yp = vec![0.0; y.len()];
    for _ in 0..n_perm {
        fisher_yates(&mut perm, &mut rng);
        for (slot, &p) in yp.iter_mut().zip(&perm) {
            *slot = y[p];
        }
        values.push(knn_mi(x, &yp, config)?.value);
    }
    values.sort_by(|a, b| a.total_cmp(b));
    let rank = ((1.0 - level) * n_perm as f64).ceil().max(1.0) as usize;
    Ok(values[rank.min(n_perm) - 1])
}

pub(crate) fn fisher_yates<R: rand::Rng>(perm: &mut [usize], rng: &mut R) {
    for i in (1..perm.len()).rev() {
        let j = rng.random_range(0..=i);
        perm.swap(i, j);
    }
}
