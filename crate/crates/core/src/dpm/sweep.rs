//! One full Gibbs sweep: collapsed reallocation of every point, an explicit
//! redraw of the kernel parameters, conditional updates of the base-measure
//! hyperparameters, and the beta-augmentation update of the concentration.

use rand::Rng;

use super::cluster::{niw_posterior, Cluster, ClusterStats, StudentPred};
use super::config::{ConcentrationSpec, DpmConfig, K0Spec, Mu0Spec, PsiSpec};
use super::state::{draw_cluster_params, DpmState};
use crate::stats::{
    sample_beta, sample_gamma, sample_inverse_wishart, sample_mvnormal, sample_normal,
    slice_sample_1d, SymMatrix,
};
use crate::{Error, Result};

/// Advances the chain by one sweep. The update order is: allocations,
/// cluster parameters, base hyperparameters (μ0, k0, ψ), concentration.
pub fn gibbs_sweep<R: Rng>(
    state: &mut DpmState,
    data: &[[f64; 2]],
    config: &DpmConfig,
    rng: &mut R,
) -> Result<()> {
    if data.len() != state.labels.len() {
        return Err(Error::invalid("data length does not match chain state"));
    }
    let dim = state.dim;
    let nu_eff = config.nu_eff();

    if !data.is_empty() {
        reallocate(state, data, nu_eff, rng)?;
        for k in 0..state.clusters.len() {
            let hypers = state.hypers_with(nu_eff);
            let mut cluster = state.clusters[k].clone();
            draw_cluster_params(dim, &hypers, &mut cluster, k, rng)?;
            state.clusters[k] = cluster;
        }
    }

    update_mu0(state, config, rng)?;
    update_k0(state, config, rng)?;
    update_psi(state, config, nu_eff, rng)?;
    update_concentration(state, config, data.len(), rng)?;

    state.iteration += 1;
    Ok(())
}

fn reallocate<R: Rng>(
    state: &mut DpmState,
    data: &[[f64; 2]],
    nu_eff: f64,
    rng: &mut R,
) -> Result<()> {
    let dim = state.dim;
    let hypers = state.hypers_with(nu_eff);
    // refresh the collapsed predictives against the current hyperparameters
    for cluster in &mut state.clusters {
        let post = niw_posterior(dim, &hypers, &cluster.stats);
        cluster.pred = StudentPred::from_posterior(dim, &post)?;
    }
    let prior_post = niw_posterior(dim, &hypers, &ClusterStats::default());
    let prior_pred = StudentPred::from_posterior(dim, &prior_post)?;

    let order = state.visit_order.clone();
    let mut logw: Vec<f64> = Vec::with_capacity(state.clusters.len() + 1);
    for &i in &order {
        let x = data[i];
        // detach the point; drop its cluster entirely if it was a singleton
        let old = state.labels[i];
        state.clusters[old].stats.remove(x);
        if state.clusters[old].stats.count == 0 {
            state.clusters.remove(old);
            for l in state.labels.iter_mut() {
                if *l > old {
                    *l -= 1;
                }
            }
        } else {
            let post = niw_posterior(dim, &hypers, &state.clusters[old].stats);
            state.clusters[old].pred = StudentPred::from_posterior(dim, &post)?;
        }

        logw.clear();
        for cluster in &state.clusters {
            logw.push((cluster.stats.count as f64).ln() + cluster.pred.logpdf(x));
        }
        logw.push(state.concentration.ln() + prior_pred.logpdf(x));

        let choice = sample_log_categorical(&logw, rng);
        if choice < state.clusters.len() {
            state.labels[i] = choice;
            state.clusters[choice].stats.add(x);
            let post = niw_posterior(dim, &hypers, &state.clusters[choice].stats);
            state.clusters[choice].pred = StudentPred::from_posterior(dim, &post)?;
        } else {
            let stats = ClusterStats::single(x);
            let post = niw_posterior(dim, &hypers, &stats);
            let pred = StudentPred::from_posterior(dim, &post)?;
            state.labels[i] = state.clusters.len();
            state.clusters.push(Cluster { stats, mean: x, cov: hypers.psi, pred });
        }
    }
    Ok(())
}

/// Draws an index from unnormalized log weights using a single uniform.
fn sample_log_categorical<R: Rng>(logw: &[f64], rng: &mut R) -> usize {
    let max = logw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    let mut cumulative = Vec::with_capacity(logw.len());
    for &l in logw {
        total += (l - max).exp();
        cumulative.push(total);
    }
    let u = rng.random::<f64>() * total;
    for (i, &c) in cumulative.iter().enumerate() {
        if u < c {
            return i;
        }
    }
    logw.len() - 1
}

fn update_mu0<R: Rng>(state: &mut DpmState, config: &DpmConfig, rng: &mut R) -> Result<()> {
    let (prior_mean, prior_var) = match config.mu0 {
        Mu0Spec::Fixed(_) => return Ok(()),
        Mu0Spec::Normal { mean, variance } => (mean, variance),
    };
    let dim = state.dim;
    if state.clusters.is_empty() {
        let mut m = [sample_normal(prior_mean[0], prior_var, rng)?, 0.0];
        if dim == 2 {
            m[1] = sample_normal(prior_mean[1], prior_var, rng)?;
        }
        state.mu0 = m;
        return Ok(());
    }
    // precision = I/s2 + k0 Σ_k Σ_k⁻¹, mean = precision⁻¹ (m/s2 + k0 Σ_k Σ_k⁻¹ μ_k)
    let mut prec = SymMatrix::scaled_identity(dim, 1.0 / prior_var);
    let mut rhs = [prior_mean[0] / prior_var, prior_mean[1] / prior_var];
    for cluster in &state.clusters {
        let inv = cluster.cov.inverse()?;
        prec = prec.add(&inv.scale(state.k0));
        let v = inv.mul_vec(cluster.mean);
        rhs[0] += state.k0 * v[0];
        rhs[1] += state.k0 * v[1];
    }
    let cov = prec.inverse()?;
    let mean = cov.mul_vec(rhs);
    let draw = sample_mvnormal(mean, &cov, rng)?;
    state.mu0 = if dim == 1 { [draw[0], 0.0] } else { draw };
    Ok(())
}

fn update_k0<R: Rng>(state: &mut DpmState, config: &DpmConfig, rng: &mut R) -> Result<()> {
    let (shape, rate) = match config.k0 {
        K0Spec::Fixed(_) => return Ok(()),
        K0Spec::Gamma { shape, rate } => (shape, rate),
    };
    let k = state.clusters.len() as f64;
    let mut quad = 0.0;
    for cluster in &state.clusters {
        let d = [cluster.mean[0] - state.mu0[0], cluster.mean[1] - state.mu0[1]];
        quad += cluster.cov.inverse()?.quad_form(d);
    }
    state.k0 = sample_gamma(shape + 0.5 * k * state.dim as f64, rate + 0.5 * quad, rng)?;
    Ok(())
}

/// The ψ conditional under an inverse-Wishart hyperprior is not a standard
/// family (the kernel-scale likelihood is Wishart-shaped in ψ), so it is
/// sampled by slice steps: a single log-scale step in one dimension,
/// coordinate-wise steps in two.
fn update_psi<R: Rng>(
    state: &mut DpmState,
    config: &DpmConfig,
    nu_eff: f64,
    rng: &mut R,
) -> Result<()> {
    let (prior_dof, prior_scale) = match config.psi {
        PsiSpec::Fixed(_) => return Ok(()),
        PsiSpec::InverseWishart { dof, scale } => (dof, scale),
    };
    let dim = state.dim;
    if state.clusters.is_empty() {
        state.psi = sample_inverse_wishart(prior_dof, &prior_scale, rng)?;
        return Ok(());
    }
    let k = state.clusters.len() as f64;
    // A = Σ_k Σ_k⁻¹ drives the Wishart-shaped likelihood term
    let mut a = SymMatrix::scaled_identity(dim, 0.0);
    for cluster in &state.clusters {
        a = a.add(&cluster.cov.inverse()?);
    }
    let det_coef = 0.5 * (k * nu_eff - prior_dof - dim as f64 - 1.0);

    if dim == 1 {
        let a0 = a.get(0, 0);
        let s0 = prior_scale.get(0, 0);
        // in u = ln ψ the target is strictly log-concave
        let logf = |u: f64| {
            if !(-700.0..=700.0).contains(&u) {
                return f64::NEG_INFINITY;
            }
            let psi = u.exp();
            (det_coef + 1.0) * u - 0.5 * (a0 * psi + s0 / psi)
        };
        let u0 = state.psi.get(0, 0).ln();
        let u1 = slice_sample_1d(logf, u0, 1.0, 60, rng);
        state.psi = SymMatrix::new_1d(u1.exp());
    } else {
        let s0 = prior_scale;
        let logf = |m: &SymMatrix| -> f64 {
            let det = m.det();
            if det <= 0.0 || m.get(0, 0) <= 0.0 || m.get(1, 1) <= 0.0 {
                return f64::NEG_INFINITY;
            }
            let inv = match m.inverse() {
                Ok(i) => i,
                Err(_) => return f64::NEG_INFINITY,
            };
            det_coef * det.ln() - 0.5 * (m.trace_prod(&a) + s0.trace_prod(&inv))
        };
        let mut cur = state.psi;
        // diagonal entries in log scale
        for idx in [0usize, 2] {
            let (i, j) = if idx == 0 { (0, 0) } else { (1, 1) };
            let base = cur;
            let target = |u: f64| {
                if !(-700.0..=700.0).contains(&u) {
                    return f64::NEG_INFINITY;
                }
                let mut m = base;
                m = set_entry(m, i, j, u.exp());
                logf(&m) + u
            };
            let u0 = cur.get(i, j).ln();
            let u1 = slice_sample_1d(target, u0, 1.0, 60, rng);
            cur = set_entry(cur, i, j, u1.exp());
        }
        // off-diagonal entry on its natural scale, bounded by PD support
        let base = cur;
        let target = |v: f64| {
            let m = set_entry(base, 0, 1, v);
            logf(&m)
        };
        let width = 0.5 * (cur.get(0, 0) * cur.get(1, 1)).sqrt();
        let v1 = slice_sample_1d(target, cur.get(0, 1), width.max(1e-8), 60, rng);
        cur = set_entry(cur, 0, 1, v1);
        state.psi = cur;
    }
    Ok(())
}

fn set_entry(m: SymMatrix, i: usize, j: usize, v: f64) -> SymMatrix {
    let mut e = [m.get(0, 0), m.get(0, 1), m.get(1, 1)];
    match (i, j) {
        (0, 0) => e[0] = v,
        (1, 1) => e[2] = v,
        _ => e[1] = v,
    }
    SymMatrix::new_2d(e[0], e[1], e[2])
}

/// Standard beta-augmentation update for a Gamma(shape, rate) prior on the
/// concentration, given the current number of clusters.
fn update_concentration<R: Rng>(
    state: &mut DpmState,
    config: &DpmConfig,
    n: usize,
    rng: &mut R,
) -> Result<()> {
    let (shape, rate) = match config.concentration {
        ConcentrationSpec::Fixed(_) => return Ok(()),
        ConcentrationSpec::Gamma { shape, rate } => (shape, rate),
    };
    if n == 0 || state.clusters.is_empty() {
        state.concentration = sample_gamma(shape, rate, rng)?;
        return Ok(());
    }
    let k = state.clusters.len() as f64;
    let nf = n as f64;
    let eta = sample_beta(state.concentration + 1.0, nf, rng)?;
    let rate_post = rate - eta.ln();
    let odds = (shape + k - 1.0) / (nf * rate_post);
    let pi_eta = odds / (1.0 + odds);
    let shape_post = if rng.random::<f64>() < pi_eta { shape + k } else { shape + k - 1.0 };
    state.concentration = sample_gamma(shape_post.max(1e-12), rate_post, rng)?;
    Ok(())
}
