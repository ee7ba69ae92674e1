//! Chain state: allocations, explicit cluster parameters, and the current
//! hyperparameters.

use rand::Rng;

use super::cluster::{niw_posterior, Cluster, ClusterStats, Hypers, StudentPred};
use super::config::{defaults, ConcentrationSpec, DpmConfig, K0Spec, Mu0Spec, PsiSpec};
use crate::stats::{
    sample_gamma, sample_inverse_wishart, sample_mvnormal, sample_normal, SymMatrix,
};
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct DpmState {
    pub(crate) dim: usize,
    pub(crate) labels: Vec<usize>,
    pub(crate) clusters: Vec<Cluster>,
    pub(crate) mu0: [f64; 2],
    pub(crate) k0: f64,
    pub(crate) psi: SymMatrix,
    pub(crate) concentration: f64,
    pub(crate) iteration: usize,
    /// Order in which the allocation pass visits points; permuting the data
    /// together with this order permutes the whole computation.
    pub(crate) visit_order: Vec<usize>,
}

impl DpmState {
    /// Initializes the chain: hyperparameters drawn from their priors (or
    /// pinned when fixed) and all points in a single cluster.
    pub fn init<R: Rng>(
        data: &[[f64; 2]],
        keys: &[u64],
        config: &DpmConfig,
        rng: &mut R,
    ) -> Result<DpmState> {
        config.validate()?;
        if keys.len() != data.len() {
            return Err(Error::invalid("visit keys must match data length"));
        }
        let mu0 = match config.mu0 {
            Mu0Spec::Fixed(m) => m,
            Mu0Spec::Normal { mean, variance } => {
                let mut m = [sample_normal(mean[0], variance, rng)?, 0.0];
                if config.dim == 2 {
                    m[1] = sample_normal(mean[1], variance, rng)?;
                }
                m
            }
        };
        let k0 = match config.k0 {
            K0Spec::Fixed(k) => k,
            K0Spec::Gamma { shape, rate } => sample_gamma(shape, rate, rng)?,
        };
        let psi = match config.psi {
            PsiSpec::Fixed(s) => s,
            PsiSpec::InverseWishart { dof, scale } => sample_inverse_wishart(dof, &scale, rng)?,
        };
        let concentration = match config.concentration {
            ConcentrationSpec::Fixed(c) => c,
            ConcentrationSpec::Gamma { shape, rate } => sample_gamma(shape, rate, rng)?,
        };

        let mut order: Vec<usize> = (0..data.len()).collect();
        order.sort_by_key(|&i| (keys[i], i));

        let mut state = DpmState {
            dim: config.dim,
            labels: vec![0; data.len()],
            clusters: Vec::new(),
            mu0,
            k0,
            psi,
            concentration,
            iteration: 0,
            visit_order: order,
        };
        // each point starts in its own cluster (created in visit order, so
        // the initial state commutes with keyed permutations of the data)
        let hypers = state.hypers_with(config.nu_eff());
        for slot in 0..state.visit_order.len() {
            let i = state.visit_order[slot];
            let stats = ClusterStats::single(data[i]);
            let post = niw_posterior(config.dim, &hypers, &stats);
            let pred = StudentPred::from_posterior(config.dim, &post)?;
            let mut cluster = Cluster { stats, mean: data[i], cov: state.psi, pred };
            draw_cluster_params(config.dim, &hypers, &mut cluster, slot, rng)?;
            state.labels[i] = slot;
            state.clusters.push(cluster);
        }
        Ok(state)
    }

    pub(crate) fn hypers_with(&self, nu_eff: f64) -> Hypers {
        Hypers {
            mu0: self.mu0,
            k0: self.k0,
            psi: self.psi,
            nu_eff,
        }
    }

    pub fn n_points(&self) -> usize {
        self.labels.len()
    }

    pub fn n_clusters(&self) -> usize {
        self.clusters.len()
    }

    pub fn concentration(&self) -> f64 {
        self.concentration
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    /// 0-based cluster labels, one per point.
    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        self.clusters.iter().map(|c| c.stats.count).collect()
    }

    /// Checks the structural invariants: labels form a surjection onto the
    /// cluster set, sizes sum to n, and every kernel scale is positive
    /// definite.
    pub fn check_invariants(&self) -> Result<()> {
        let mut counts = vec![0usize; self.clusters.len()];
        for &l in &self.labels {
            if l >= self.clusters.len() {
                return Err(Error::invalid(format!("label {l} out of range")));
            }
            counts[l] += 1;
        }
        for (k, (&seen, cluster)) in counts.iter().zip(&self.clusters).enumerate() {
            if seen == 0 {
                return Err(Error::invalid(format!("cluster {k} is empty")));
            }
            if seen != cluster.stats.count {
                return Err(Error::invalid(format!(
                    "cluster {k} count mismatch: {seen} vs {}",
                    cluster.stats.count
                )));
            }
            if !cluster.cov.is_positive_definite() {
                return Err(Error::invalid(format!("cluster {k} covariance not PD")));
            }
        }
        Ok(())
    }
}

/// Draws the explicit kernel parameters of a cluster from its conjugate
/// posterior, flooring variances so degenerate data cannot collapse them.
pub(crate) fn draw_cluster_params<R: Rng>(
    dim: usize,
    hypers: &Hypers,
    cluster: &mut Cluster,
    cluster_id: usize,
    rng: &mut R,
) -> Result<()> {
    let post = niw_posterior(dim, hypers, &cluster.stats);
    let cov = sample_inverse_wishart(post.nu, &post.psi, rng).map_err(|e| {
        Error::ChainIteration { cluster: cluster_id, detail: e.to_string() }
    })?;
    let cov = floor_cov(dim, cov);
    let mean = sample_mvnormal(post.mean, &cov.scale(1.0 / post.kappa), rng).map_err(|e| {
        Error::ChainIteration { cluster: cluster_id, detail: e.to_string() }
    })?;
    cluster.cov = cov;
    cluster.mean = if dim == 1 { [mean[0], 0.0] } else { mean };
    Ok(())
}

pub(crate) fn floor_cov(dim: usize, cov: SymMatrix) -> SymMatrix {
    let floor = defaults::VARIANCE_FLOOR;
    if dim == 1 {
        SymMatrix::new_1d(cov.get(0, 0).max(floor))
    } else {
        let m00 = cov.get(0, 0).max(floor);
        let m11 = cov.get(1, 1).max(floor);
        let mut m01 = cov.get(0, 1);
        let bound = (m00 * m11).sqrt();
        if m01.abs() >= bound {
            m01 = m01.signum() * bound * (1.0 - 1e-9);
        }
        SymMatrix::new_2d(m00, m01, m11)
    }
}

/// Categorical allocation probabilities from urn multiplicities and
/// predictive terms: existing cluster k gets weight n_k · exp(log_pred[k]),
/// a new cluster gets concentration · exp(log_pred.last()). Computed in log
/// space with max subtraction; the result is normalized.
pub fn polya_urn_weights(counts: &[f64], concentration: f64, log_pred: &[f64]) -> Vec<f64> {
    assert_eq!(log_pred.len(), counts.len() + 1, "need one predictive term per cluster plus new");
    let mut logw = Vec::with_capacity(log_pred.len());
    for (i, &lp) in log_pred.iter().enumerate() {
        let mult = if i < counts.len() { counts[i] } else { concentration };
        logw.push(if mult > 0.0 { mult.ln() + lp } else { f64::NEG_INFINITY });
    }
    let max = logw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        // all weights vanished; fall back to uniform
        return vec![1.0 / logw.len() as f64; logw.len()];
    }
    let mut total = 0.0;
    let mut w: Vec<f64> = logw
        .iter()
        .map(|&l| {
            let v = (l - max).exp();
            total += v;
            v
        })
        .collect();
    for v in &mut w {
        *v /= total;
    }
    w
}

/// Allocation probabilities for one point: the urn weights over existing
/// clusters (with the point removed) plus the new-cluster weight, using the
/// collapsed Student-t predictive of each cluster.
pub fn allocation_weights(
    state: &DpmState,
    data: &[[f64; 2]],
    config: &DpmConfig,
    point: usize,
) -> Result<Vec<f64>> {
    if point >= data.len() || data.len() != state.labels.len() {
        return Err(Error::invalid("point index out of range"));
    }
    let hypers = state.hypers_with(config.nu_eff());
    let x = data[point];
    let own = state.labels[point];
    let mut counts = Vec::with_capacity(state.clusters.len());
    let mut log_pred = Vec::with_capacity(state.clusters.len() + 1);
    for (k, cluster) in state.clusters.iter().enumerate() {
        let mut stats = cluster.stats;
        if k == own {
            stats.remove(x);
        }
        if stats.count == 0 {
            continue; // the point's own singleton: folded into the "new" term
        }
        counts.push(stats.count as f64);
        let post = niw_posterior(state.dim, &hypers, &stats);
        log_pred.push(StudentPred::from_posterior(state.dim, &post)?.logpdf(x));
    }
    let prior = niw_posterior(state.dim, &hypers, &ClusterStats::default());
    log_pred.push(StudentPred::from_posterior(state.dim, &prior)?.logpdf(x));
    Ok(polya_urn_weights(&counts, state.concentration, &log_pred))
}
