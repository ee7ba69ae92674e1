//! Predictive-ensemble dependence measure.
//!
//! Three chains are fit on the same standardized rows: univariate chains
//! for each margin and one bivariate chain for the joint. Their averaged
//! posterior predictives are combined into a two-component ensemble
//! π·f̂₁(x,y) + (1−π)·f̂₀,X(x)·f̂₀,Y(y), and the posterior of the weight π
//! (Beta prior) is evaluated on a fine grid; its mean π̂ is the dependence
//! score. An iterative variant with per-observation latent allocations is
//! also provided.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dpm::{
    bivariate_points, run_chain, univariate_points, DpmConfig, McmcSettings,
};
use crate::stats::{log_beta_pdf, reg_inc_beta, sample_beta, standardize, RngStream, StreamRng};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    /// Beta prior parameters on the ensemble weight.
    pub a0: f64,
    pub b0: f64,
    /// Grid interval of the line search over [0, 1].
    pub eta: f64,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        EnsembleConfig {
            a0: crate::dpm::defaults::ENSEMBLE_A0,
            b0: crate::dpm::defaults::ENSEMBLE_B0,
            eta: crate::dpm::defaults::ENSEMBLE_ETA,
        }
    }
}

impl EnsembleConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.a0 > 0.0 && self.a0.is_finite() && self.b0 > 0.0 && self.b0.is_finite()) {
            return Err(Error::invalid("beta prior parameters must be positive"));
        }
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return Err(Error::invalid("grid interval must be in (0,1)"));
        }
        Ok(())
    }
}

/// Per-observation predictive log densities under the joint fit and the two
/// marginal fits. Stored in logs so extreme densities neither overflow nor
/// underflow when combined.
#[derive(Clone, Debug)]
pub struct PredictiveValues {
    log_f1: Vec<f64>,
    log_f0x: Vec<f64>,
    log_f0y: Vec<f64>,
}

impl PredictiveValues {
    pub fn from_densities(f1: &[f64], f0x: &[f64], f0y: &[f64]) -> Result<PredictiveValues> {
        if f1.len() != f0x.len() || f1.len() != f0y.len() {
            return Err(Error::invalid("predictive vectors must have equal length"));
        }
        for (i, v) in f1.iter().chain(f0x).chain(f0y).enumerate() {
            if !(v.is_finite() && *v >= 0.0) {
                return Err(Error::invalid(format!(
                    "densities must be finite and nonnegative (offending entry {i})"
                )));
            }
        }
        Ok(PredictiveValues {
            log_f1: f1.iter().map(|v| v.ln()).collect(),
            log_f0x: f0x.iter().map(|v| v.ln()).collect(),
            log_f0y: f0y.iter().map(|v| v.ln()).collect(),
        })
    }

    pub fn from_log_densities(
        log_f1: Vec<f64>,
        log_f0x: Vec<f64>,
        log_f0y: Vec<f64>,
    ) -> Result<PredictiveValues> {
        if log_f1.len() != log_f0x.len() || log_f1.len() != log_f0y.len() {
            return Err(Error::invalid("predictive vectors must have equal length"));
        }
        Ok(PredictiveValues { log_f1, log_f0x, log_f0y })
    }

    pub fn len(&self) -> usize {
        self.log_f1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_f1.is_empty()
    }
}

/// Log posterior of the ensemble weight over the grid {η, 2η, …, 1−η}.
/// The endpoints are excluded: the Beta(1/2, 1/2) prior is unbounded there.
#[derive(Clone, Debug)]
pub struct PiGrid {
    pub pi: Vec<f64>,
    pub log_post: Vec<f64>,
    /// Prior and spacing the grid was built with, needed to weight cells.
    pub config: EnsembleConfig,
}

pub fn pi_log_posterior_grid(pv: &PredictiveValues, config: &EnsembleConfig) -> Result<PiGrid> {
    config.validate()?;
    if pv.is_empty() {
        return Err(Error::invalid("predictive values must be nonempty"));
    }
    let n = pv.len();
    // per-observation independent-model log density and zero-support check
    let mut log_f0 = Vec::with_capacity(n);
    for i in 0..n {
        let l0 = pv.log_f0x[i] + pv.log_f0y[i];
        if pv.log_f1[i] == f64::NEG_INFINITY && l0 == f64::NEG_INFINITY {
            return Err(Error::ZeroPredictiveSupport { index: i });
        }
        log_f0.push(l0);
    }
    let m = (1.0 / config.eta).round() as usize;
    let mut pi = Vec::with_capacity(m - 1);
    let mut log_post = Vec::with_capacity(m - 1);
    for j in 1..m {
        let p = j as f64 * config.eta;
        let lp = p.ln();
        let lq = (1.0 - p).ln();
        let mut total = log_beta_pdf(p, config.a0, config.b0)?;
        for i in 0..n {
            let a = lp + pv.log_f1[i];
            let b = lq + log_f0[i];
            // logsumexp of the two mixture branches
            let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
            total += if hi == f64::NEG_INFINITY { f64::NEG_INFINITY } else { hi + (lo - hi).exp().ln_1p() };
        }
        pi.push(p);
        log_post.push(total);
    }
    Ok(PiGrid { pi, log_post, config: *config })
}

#[derive(Clone, Debug)]
pub struct EnsembleResult {
    /// Posterior mean of the ensemble weight.
    pub pi_hat: f64,
    /// Normalized grid posterior (sums to one).
    pub posterior: Vec<f64>,
    pub grid: PiGrid,
}

/// Posterior mean over the grid with max-subtraction:
/// π̂ = Σ_j π_j w_j e^{L_j − L*} / Σ_j w_j e^{L_j − L*}.
///
/// Each node is weighted by the exact Beta-prior mass of its grid cell
/// divided by the prior density at the node. A plain unweighted sum carries
/// an O(√η) bias from the prior's endpoint singularities when a0 or b0 is
/// below one, which is visible against exact Beta posterior means; the cell
/// weights remove it while leaving nonsingular priors essentially untouched.
pub fn estimate_pi(grid: PiGrid) -> Result<EnsembleResult> {
    if grid.pi.is_empty() {
        return Err(Error::invalid("empty grid"));
    }
    let max = grid.log_post.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(Error::invalid("grid posterior vanished everywhere"));
    }
    let cfg = &grid.config;
    let m = grid.pi.len();
    // cell boundaries: midpoints between nodes, closed at 0 and 1
    let mut cum = Vec::with_capacity(m + 1);
    cum.push(0.0);
    for j in 1..m {
        let b = 0.5 * (grid.pi[j - 1] + grid.pi[j]);
        cum.push(reg_inc_beta(b, cfg.a0, cfg.b0)?);
    }
    cum.push(1.0);

    let mut total = 0.0;
    let mut weighted = 0.0;
    let mut posterior = Vec::with_capacity(m);
    for j in 0..m {
        let mass = (cum[j + 1] - cum[j]).max(0.0);
        let log_cell = if mass > 0.0 {
            mass.ln() - log_beta_pdf(grid.pi[j], cfg.a0, cfg.b0)?
        } else {
            f64::NEG_INFINITY
        };
        let w = (grid.log_post[j] - max + log_cell).exp();
        total += w;
        weighted += grid.pi[j] * w;
        posterior.push(w);
    }
    if total <= 0.0 || !total.is_finite() {
        return Err(Error::invalid("grid posterior vanished everywhere"));
    }
    for w in &mut posterior {
        *w /= total;
    }
    Ok(EnsembleResult { pi_hat: weighted / total, posterior, grid })
}

/// Fits the three chains on the standardized rows, evaluates the averaged
/// predictives at the observed points, and runs the grid estimator.
///
/// The three chains draw from decorrelated substreams of `stream`; pairs
/// screened in parallel should pass distinct substreams keyed by pair.
pub fn mixmod_ensemble(
    x: &[f64],
    y: &[f64],
    marginal_config: &DpmConfig,
    joint_config: &DpmConfig,
    mcmc: &McmcSettings,
    config: &EnsembleConfig,
    stream: RngStream,
) -> Result<EnsembleResult> {
    config.validate()?;
    if x.len() != y.len() {
        return Err(Error::invalid("paired samples must have equal length"));
    }
    if x.len() < crate::dpm::defaults::MIN_COMPLETE_ROWS {
        return Err(Error::invalid(format!(
            "need at least {} paired observations, got {}",
            crate::dpm::defaults::MIN_COMPLETE_ROWS,
            x.len()
        )));
    }
    if marginal_config.dim != 1 || joint_config.dim != 2 {
        return Err(Error::invalid("marginal config must be 1-d and joint config 2-d"));
    }
    let (zx, _, _) = standardize(x);
    let (zy, _, _) = standardize(y);

    let px = univariate_points(&zx)?;
    let py = univariate_points(&zy)?;
    let pxy = bivariate_points(&zx, &zy)?;

    let (_, fx) = run_chain(&px, marginal_config, mcmc, &px, stream.substream_label("mixmod:x"))?;
    let (_, fy) = run_chain(&py, marginal_config, mcmc, &py, stream.substream_label("mixmod:y"))?;
    let (_, fxy) = run_chain(&pxy, joint_config, mcmc, &pxy, stream.substream_label("mixmod:xy"))?;

    let pv = PredictiveValues::from_densities(&fxy.density, &fx.density, &fy.density)?;
    estimate_pi(pi_log_posterior_grid(&pv, config)?)
}

/// State of the iterative allocation sampler.
#[derive(Clone, Debug)]
pub struct MixModGibbsState {
    /// Latent indicators: 1 = joint model, 0 = independent model.
    pub zeta: Vec<u8>,
    pub pi: f64,
}

impl MixModGibbsState {
    /// Starting state: π = 0.5 and a balanced random allocation (n/2 zeros).
    pub fn init<R: Rng>(n: usize, rng: &mut R) -> MixModGibbsState {
        let mut zeta = vec![0u8; n];
        for z in zeta.iter_mut().skip(n / 2) {
            *z = 1;
        }
        // Fisher–Yates on the indicator vector
        for i in (1..n).rev() {
            let j = rng.random_range(0..=i);
            zeta.swap(i, j);
        }
        MixModGibbsState { zeta, pi: 0.5 }
    }

    pub fn l0(&self) -> usize {
        self.zeta.iter().filter(|&&z| z == 0).count()
    }
}

/// Proposed allocations are accepted only when both submodels keep at least
/// five points.
pub fn allocation_accepted(l0_proposed: usize, n: usize) -> bool {
    l0_proposed.min(n - l0_proposed) >= 5
}

#[derive(Clone, Debug)]
pub struct MixModGibbsResult {
    pub pi_hat: f64,
    /// π trajectory indexed by iteration (entry 0 is the initial 0.5).
    pub trajectory: Vec<f64>,
    pub accepted: usize,
    pub rejected: usize,
    /// Iterations whose chain refits failed and were skipped.
    pub skipped: usize,
}

/// Iterative variant: refits the three chains on their allocated subsets
/// each iteration (with a sweep budget drawn uniformly from 50..=100 and the
/// predictive taken from the final state), reallocates each observation by
/// its posterior odds, and draws π from its conjugate Beta update. The
/// estimate averages the trajectory from iteration N_it/10 to N_it.
pub fn mixmod_gibbs(
    x: &[f64],
    y: &[f64],
    marginal_config: &DpmConfig,
    joint_config: &DpmConfig,
    config: &EnsembleConfig,
    n_iterations: usize,
    stream: RngStream,
) -> Result<MixModGibbsResult> {
    config.validate()?;
    if x.len() != y.len() {
        return Err(Error::invalid("paired samples must have equal length"));
    }
    let n = x.len();
    if n < crate::dpm::defaults::MIN_COMPLETE_ROWS {
        return Err(Error::invalid(format!(
            "need at least {} paired observations, got {n}",
            crate::dpm::defaults::MIN_COMPLETE_ROWS
        )));
    }
    if n_iterations < 10 {
        return Err(Error::invalid("need at least 10 iterations"));
    }
    let (zx, _, _) = standardize(x);
    let (zy, _, _) = standardize(y);
    let mut rng = stream.substream_label("mixmod-gibbs").rng();
    let mut state = MixModGibbsState::init(n, &mut rng);

    // trajectory[j] is π^(j) with 1-based iteration indexing
    let mut trajectory = vec![0.5f64; n_iterations + 2];
    let mut accepted = 0usize;
    let mut rejected = 0usize;
    let mut skipped = 0usize;

    for iter in 1..=n_iterations {
        let sweeps = rng.random_range(50..=100usize);
        match refit_predictives(&zx, &zy, &state, marginal_config, joint_config, sweeps, &mut rng)
        {
            Ok((lf1, lf0x, lf0y)) => {
                let mut proposal = vec![0u8; n];
                for i in 0..n {
                    let a = state.pi.ln() + lf1[i];
                    let b = (1.0 - state.pi).ln() + lf0x[i] + lf0y[i];
                    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
                    let log_denom = hi + (lo - hi).exp().ln_1p();
                    let p = (a - log_denom).exp();
                    proposal[i] = u8::from(rng.random::<f64>() < p);
                }
                let l0_proposed = proposal.iter().filter(|&&z| z == 0).count();
                if allocation_accepted(l0_proposed, n) {
                    state.zeta = proposal;
                    accepted += 1;
                } else {
                    rejected += 1;
                }
            }
            Err(_) => {
                skipped += 1;
            }
        }
        let l0 = state.l0() as f64;
        state.pi = sample_beta(config.a0 + l0, config.b0 + (n as f64 - l0), &mut rng)?;
        trajectory[iter + 1] = state.pi;
    }

    let start = (n_iterations / 10).max(1);
    let slice = &trajectory[start..=n_iterations];
    let pi_hat = slice.iter().sum::<f64>() / slice.len() as f64;
    Ok(MixModGibbsResult {
        pi_hat,
        trajectory: trajectory[1..].to_vec(),
        accepted,
        rejected,
        skipped,
    })
}

// Refits the three chains on the currently allocated subsets and returns the
// per-observation predictive log densities from the final state of each.
#[allow(clippy::type_complexity)]
fn refit_predictives(
    zx: &[f64],
    zy: &[f64],
    state: &MixModGibbsState,
    marginal_config: &DpmConfig,
    joint_config: &DpmConfig,
    sweeps: usize,
    rng: &mut StreamRng,
) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let n = zx.len();
    let independent: Vec<usize> = (0..n).filter(|&i| state.zeta[i] == 0).collect();
    let joint: Vec<usize> = (0..n).filter(|&i| state.zeta[i] == 1).collect();

    let x_sub: Vec<f64> = independent.iter().map(|&i| zx[i]).collect();
    let y_sub: Vec<f64> = independent.iter().map(|&i| zy[i]).collect();
    let xy_sub_x: Vec<f64> = joint.iter().map(|&i| zx[i]).collect();
    let xy_sub_y: Vec<f64> = joint.iter().map(|&i| zy[i]).collect();

    let eval_x = univariate_points(zx)?;
    let eval_y = univariate_points(zy)?;
    let eval_xy = bivariate_points(zx, zy)?;

    // single final state: burn sweeps-1, save 1
    let mcmc = McmcSettings::new(sweeps - 1, 1, 1);
    let seed = rng.random::<u64>();
    let sub = RngStream::new(seed);

    let (_, fx) = run_chain(
        &univariate_points(&x_sub)?,
        marginal_config,
        &mcmc,
        &eval_x,
        sub.substream(1),
    )?;
    let (_, fy) = run_chain(
        &univariate_points(&y_sub)?,
        marginal_config,
        &mcmc,
        &eval_y,
        sub.substream(2),
    )?;
    let (_, fxy) = run_chain(
        &bivariate_points(&xy_sub_x, &xy_sub_y)?,
        joint_config,
        &mcmc,
        &eval_xy,
        sub.substream(3),
    )?;

    Ok((
        fxy.density.iter().map(|d| d.ln()).collect(),
        fx.density.iter().map(|d| d.ln()).collect(),
        fy.density.iter().map(|d| d.ln()).collect(),
    ))
}
