//! Dirichlet process mixtures of Gaussians (univariate and bivariate) fit by
//! collapsed Gibbs sampling.
//!
//! The random mixing measure is never represented: allocations are drawn
//! from the urn predictive with the kernel parameters integrated against the
//! conjugate base, then the per-cluster parameters are redrawn explicitly so
//! the base-measure hyperparameters and the concentration can be updated in
//! turn. Chains expose their per-iteration cluster allocations (the raw
//! material of the contingency-table screen) and an averaged posterior
//! predictive density (the raw material of the ensemble screen).

mod chain;
mod cluster;
mod config;
mod state;
mod sweep;

pub use chain::{canonicalize_labels, run_chain, run_chain_keyed, AllocationTrace, PredictivePoints};
pub use config::{
    defaults, ConcentrationSpec, DpmConfig, K0Spec, McmcSettings, Mu0Spec, PsiSpec,
};
pub use state::{allocation_weights, polya_urn_weights, DpmState};
pub use sweep::gibbs_sweep;

use crate::{Error, Result};

/// Packs univariate or paired samples into the fixed-width point layout used
/// by the engine (the second coordinate is zero in one dimension).
pub fn univariate_points(xs: &[f64]) -> Result<Vec<[f64; 2]>> {
    if xs.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("data must be finite"));
    }
    Ok(xs.iter().map(|&x| [x, 0.0]).collect())
}

pub fn bivariate_points(xs: &[f64], ys: &[f64]) -> Result<Vec<[f64; 2]>> {
    if xs.len() != ys.len() {
        return Err(Error::invalid(format!(
            "paired samples must have equal length, got {} and {}",
            xs.len(),
            ys.len()
        )));
    }
    if xs.iter().chain(ys.iter()).any(|v| !v.is_finite()) {
        return Err(Error::invalid("data must be finite"));
    }
    Ok(xs.iter().zip(ys).map(|(&x, &y)| [x, y]).collect())
}
