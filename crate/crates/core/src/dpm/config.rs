//! Model and MCMC configuration for the Dirichlet process mixture engine.

use serde::{Deserialize, Serialize};

use crate::stats::SymMatrix;
use crate::{Error, Result};

/// Paper-default constants, kept in one place so the CLI help text and the
/// unit tests assert the exact same numbers.
pub mod defaults {
    /// Fixed concentration for the per-variable marginal chains used by the
    /// contingency-table screen.
    pub const CTBF_CONCENTRATION: f64 = 10.0;
    pub const CTBF_MU0_MEAN: f64 = 0.0;
    pub const CTBF_MU0_VARIANCE: f64 = 1.0;
    pub const CTBF_NU: f64 = 3.0;
    /// ψ hyperprior for the contingency-table marginals: IGa(1/2, 5).
    pub const CTBF_PSI_SHAPE: f64 = 0.5;
    pub const CTBF_PSI_RATE: f64 = 5.0;

    /// k0 ~ Gamma(1/2, 100/2) shared by every chain flavour.
    pub const K0_SHAPE: f64 = 0.5;
    pub const K0_RATE: f64 = 50.0;

    /// Concentration hyperprior for the ensemble chains: Gamma(1, 1).
    pub const MIXMOD_CONCENTRATION_SHAPE: f64 = 1.0;
    pub const MIXMOD_CONCENTRATION_RATE: f64 = 1.0;
    pub const MIXMOD_MU0_VARIANCE: f64 = 100.0;
    /// Ψ ~ IW(ν, 0.1·I_d) with ν = d + 2 for the ensemble chains.
    pub const MIXMOD_PSI_SCALE: f64 = 0.1;

    pub const MCMC_BURN: usize = 1000;
    pub const MCMC_SAVE: usize = 1800;
    pub const MCMC_THIN: usize = 5;

    pub const CELL_ALPHA: f64 = 0.5;
    pub const ENSEMBLE_A0: f64 = 0.5;
    pub const ENSEMBLE_B0: f64 = 0.5;
    pub const ENSEMBLE_ETA: f64 = 1e-4;
    pub const MI_NEIGHBOURS: usize = 20;
    pub const MIN_COMPLETE_ROWS: usize = 10;

    /// Cluster variances are floored here to keep degenerate data sampleable.
    pub const VARIANCE_FLOOR: f64 = 1e-10;
}

/// Concentration parameter: fixed, or given a Gamma(shape, rate) hyperprior
/// updated by the usual beta-augmentation step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum ConcentrationSpec {
    Fixed(f64),
    Gamma { shape: f64, rate: f64 },
}

/// Base-measure location hyperparameter μ0: fixed or N(mean, variance·I_d).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Mu0Spec {
    Fixed([f64; 2]),
    Normal { mean: [f64; 2], variance: f64 },
}

/// Base-measure precision-scaling hyperparameter k0: fixed or Gamma(shape, rate).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum K0Spec {
    Fixed(f64),
    Gamma { shape: f64, rate: f64 },
}

/// Base-measure scale hyperparameter ψ (d=1) or Ψ (d=2): fixed, or an
/// inverse-Wishart hyperprior. In one dimension IW(ν, s) is the inverse
/// gamma IGa(ν/2, s/2), so [`PsiSpec::inverse_gamma`] is provided for the
/// shape–rate form.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum PsiSpec {
    Fixed(SymMatrix),
    InverseWishart { dof: f64, scale: SymMatrix },
}

impl PsiSpec {
    /// IGa(shape, rate) hyperprior on the scalar ψ, expressed as IW(2·shape, 2·rate).
    pub fn inverse_gamma(shape: f64, rate: f64) -> PsiSpec {
        PsiSpec::InverseWishart { dof: 2.0 * shape, scale: SymMatrix::new_1d(2.0 * rate) }
    }
}

/// Prior configuration of one chain.
///
/// The kernel-parameter base measure is N(μ | μ0, Σ/k0) paired with
/// IGa(σ² | ν/2 − 1, ψ/2) in one dimension and IW(Σ | ν, Ψ) in two; both are
/// handled by the same conjugate algebra through the effective degrees of
/// freedom [`DpmConfig::nu_eff`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DpmConfig {
    pub dim: usize,
    pub concentration: ConcentrationSpec,
    pub mu0: Mu0Spec,
    pub k0: K0Spec,
    /// Kernel degrees of freedom ν as written above (not the effective value).
    pub nu: f64,
    pub psi: PsiSpec,
}

impl DpmConfig {
    /// Defaults for the per-variable marginal chains of the contingency-table
    /// screen: c = 10 fixed, μ0 ~ N(0, 1), k0 ~ Ga(1/2, 50), ν = 3,
    /// ψ ~ IGa(1/2, 5).
    pub fn ctbf_marginal() -> DpmConfig {
        DpmConfig {
            dim: 1,
            concentration: ConcentrationSpec::Fixed(defaults::CTBF_CONCENTRATION),
            mu0: Mu0Spec::Normal {
                mean: [defaults::CTBF_MU0_MEAN, 0.0],
                variance: defaults::CTBF_MU0_VARIANCE,
            },
            k0: K0Spec::Gamma { shape: defaults::K0_SHAPE, rate: defaults::K0_RATE },
            nu: defaults::CTBF_NU,
            psi: PsiSpec::inverse_gamma(defaults::CTBF_PSI_SHAPE, defaults::CTBF_PSI_RATE),
        }
    }

    /// Defaults for the univariate chains of the predictive ensemble:
    /// c ~ Ga(1, 1), μ0 ~ N(0, 100), k0 ~ Ga(1/2, 50), ν = 3,
    /// ψ ~ IW(3, 0.1).
    pub fn mixmod_marginal() -> DpmConfig {
        DpmConfig {
            dim: 1,
            concentration: ConcentrationSpec::Gamma {
                shape: defaults::MIXMOD_CONCENTRATION_SHAPE,
                rate: defaults::MIXMOD_CONCENTRATION_RATE,
            },
            mu0: Mu0Spec::Normal { mean: [0.0, 0.0], variance: defaults::MIXMOD_MU0_VARIANCE },
            k0: K0Spec::Gamma { shape: defaults::K0_SHAPE, rate: defaults::K0_RATE },
            nu: 3.0,
            psi: PsiSpec::InverseWishart {
                dof: 3.0,
                scale: SymMatrix::new_1d(defaults::MIXMOD_PSI_SCALE),
            },
        }
    }

    /// Defaults for the bivariate joint chain of the predictive ensemble:
    /// same as the marginals with ν = d + 2 = 4 and Ψ ~ IW(4, 0.1·I₂).
    pub fn mixmod_joint() -> DpmConfig {
        DpmConfig {
            dim: 2,
            concentration: ConcentrationSpec::Gamma {
                shape: defaults::MIXMOD_CONCENTRATION_SHAPE,
                rate: defaults::MIXMOD_CONCENTRATION_RATE,
            },
            mu0: Mu0Spec::Normal { mean: [0.0, 0.0], variance: defaults::MIXMOD_MU0_VARIANCE },
            k0: K0Spec::Gamma { shape: defaults::K0_SHAPE, rate: defaults::K0_RATE },
            nu: 4.0,
            psi: PsiSpec::InverseWishart {
                dof: 4.0,
                scale: SymMatrix::scaled_identity(2, defaults::MIXMOD_PSI_SCALE),
            },
        }
    }

    /// Effective inverse-Wishart degrees of freedom of the kernel scale
    /// prior: the univariate IGa(ν/2 − 1, ψ/2) corresponds to IW(ν − 2, ψ).
    pub fn nu_eff(&self) -> f64 {
        if self.dim == 1 {
            self.nu - 2.0
        } else {
            self.nu
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim != 1 && self.dim != 2 {
            return Err(Error::invalid(format!("dim must be 1 or 2, got {}", self.dim)));
        }
        match self.concentration {
            ConcentrationSpec::Fixed(c) if !(c > 0.0 && c.is_finite()) => {
                return Err(Error::invalid(format!("concentration must be > 0, got {c}")));
            }
            ConcentrationSpec::Gamma { shape, rate }
                if !(shape > 0.0 && shape.is_finite() && rate > 0.0 && rate.is_finite()) =>
            {
                return Err(Error::invalid("concentration Gamma prior must be positive"));
            }
            _ => {}
        }
        match self.mu0 {
            Mu0Spec::Fixed(m) => {
                if !m[0].is_finite() || (self.dim == 2 && !m[1].is_finite()) {
                    return Err(Error::invalid("mu0 must be finite"));
                }
            }
            Mu0Spec::Normal { mean, variance } => {
                if !mean[0].is_finite()
                    || (self.dim == 2 && !mean[1].is_finite())
                    || !(variance > 0.0 && variance.is_finite())
                {
                    return Err(Error::invalid("mu0 prior must have finite mean, variance > 0"));
                }
            }
        }
        match self.k0 {
            K0Spec::Fixed(k) if !(k > 0.0 && k.is_finite()) => {
                return Err(Error::invalid(format!("k0 must be > 0, got {k}")));
            }
            K0Spec::Gamma { shape, rate }
                if !(shape > 0.0 && shape.is_finite() && rate > 0.0 && rate.is_finite()) =>
            {
                return Err(Error::invalid("k0 Gamma prior must be positive"));
            }
            _ => {}
        }
        // d=1 needs IGa shape ν/2 − 1 > 0; d=2 needs ν > d − 1.
        let min_nu = if self.dim == 1 { 2.0 } else { self.dim as f64 - 1.0 };
        if !(self.nu.is_finite() && self.nu > min_nu) {
            return Err(Error::invalid(format!(
                "nu must exceed {min_nu} for dim {}, got {}",
                self.dim, self.nu
            )));
        }
        let scale = match self.psi {
            PsiSpec::Fixed(s) => s,
            PsiSpec::InverseWishart { dof, scale } => {
                if !(dof.is_finite() && dof > self.dim as f64 - 1.0) {
                    return Err(Error::invalid(format!(
                        "psi hyperprior dof must exceed d-1, got {dof}"
                    )));
                }
                scale
            }
        };
        if scale.dim() != self.dim {
            return Err(Error::invalid(format!(
                "psi scale dimension {} does not match dim {}",
                scale.dim(),
                self.dim
            )));
        }
        if !scale.is_positive_definite() {
            return Err(Error::invalid("psi scale must be positive definite"));
        }
        Ok(())
    }
}

/// Sweep schedule: `n_burn` discarded sweeps, then every `thin`-th sweep is
/// recorded until `n_save` states are stored.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct McmcSettings {
    pub n_burn: usize,
    pub n_save: usize,
    pub thin: usize,
}

impl Default for McmcSettings {
    fn default() -> Self {
        McmcSettings {
            n_burn: defaults::MCMC_BURN,
            n_save: defaults::MCMC_SAVE,
            thin: defaults::MCMC_THIN,
        }
    }
}

impl McmcSettings {
    pub fn new(n_burn: usize, n_save: usize, thin: usize) -> McmcSettings {
        McmcSettings { n_burn, n_save, thin }
    }

    pub fn total_sweeps(&self) -> usize {
        self.n_burn + self.n_save * self.thin
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_save == 0 {
            return Err(Error::NoSavedIterations);
        }
        if self.thin == 0 {
            return Err(Error::invalid("thin must be >= 1"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_configs_validate() {
        assert!(DpmConfig::ctbf_marginal().validate().is_ok());
        assert!(DpmConfig::mixmod_marginal().validate().is_ok());
        assert!(DpmConfig::mixmod_joint().validate().is_ok());
        // total sweeps of the default schedule reproduce the headline run length
        assert_eq!(McmcSettings::default().total_sweeps(), 10_000);
    }

    #[test]
    fn nu_bounds_enforced() {
        let mut cfg = DpmConfig::ctbf_marginal();
        cfg.nu = 2.0; // IGa shape would be 0
        assert!(cfg.validate().is_err());
        let mut cfg = DpmConfig::mixmod_joint();
        cfg.nu = 0.5;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn zero_save_is_rejected() {
        assert!(matches!(
            McmcSettings::new(10, 0, 1).validate(),
            Err(crate::Error::NoSavedIterations)
        ));
    }
}
