//! Per-cluster sufficient statistics and the collapsed conjugate algebra.
//!
//! The kernel base measure is N(μ | μ0, Σ/k0) · IW(Σ | ν_eff, ψ) with the
//! univariate case expressed through the same algebra (ν_eff = ν − 2 there,
//! matching IGa(ν/2 − 1, ψ/2)). A cluster keeps its running count, sum and
//! raw scatter so points can be added and removed in O(1), plus the current
//! explicit kernel parameters and a cached Student-t posterior predictive.

use crate::stats::{lgamma_raw, SymMatrix};
use crate::{Error, Result};

const LN_PI: f64 = 1.1447298858494001741;

/// Running sufficient statistics: count, Σx, and raw scatter Σ x xᵀ.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct ClusterStats {
    pub count: usize,
    pub sum: [f64; 2],
    pub scatter: [f64; 3],
}

impl ClusterStats {
    pub fn single(x: [f64; 2]) -> ClusterStats {
        let mut s = ClusterStats::default();
        s.add(x);
        s
    }

    pub fn add(&mut self, x: [f64; 2]) {
        self.count += 1;
        self.sum[0] += x[0];
        self.sum[1] += x[1];
        self.scatter[0] += x[0] * x[0];
        self.scatter[1] += x[0] * x[1];
        self.scatter[2] += x[1] * x[1];
    }

    pub fn remove(&mut self, x: [f64; 2]) {
        debug_assert!(self.count > 0);
        self.count -= 1;
        self.sum[0] -= x[0];
        self.sum[1] -= x[1];
        self.scatter[0] -= x[0] * x[0];
        self.scatter[1] -= x[0] * x[1];
        self.scatter[2] -= x[1] * x[1];
    }
}

/// Current base-measure hyperparameters of a chain.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Hypers {
    pub mu0: [f64; 2],
    pub k0: f64,
    pub psi: SymMatrix,
    pub nu_eff: f64,
}

/// Normal–inverse-Wishart posterior parameters of one cluster.
#[derive(Clone, Copy, Debug)]
pub(crate) struct NiwPosterior {
    pub kappa: f64,
    pub mean: [f64; 2],
    pub nu: f64,
    pub psi: SymMatrix,
}

pub(crate) fn niw_posterior(dim: usize, h: &Hypers, stats: &ClusterStats) -> NiwPosterior {
    let m = stats.count as f64;
    let kappa = h.k0 + m;
    if stats.count == 0 {
        return NiwPosterior { kappa, mean: h.mu0, nu: h.nu_eff, psi: h.psi };
    }
    let xbar = [stats.sum[0] / m, stats.sum[1] / m];
    let mean = [
        (h.k0 * h.mu0[0] + stats.sum[0]) / kappa,
        (h.k0 * h.mu0[1] + stats.sum[1]) / kappa,
    ];
    // centred scatter; the diagonal is clamped against fp cancellation
    let s00 = (stats.scatter[0] - m * xbar[0] * xbar[0]).max(0.0);
    let s11 = (stats.scatter[2] - m * xbar[1] * xbar[1]).max(0.0);
    let s01 = stats.scatter[1] - m * xbar[0] * xbar[1];
    let centred = if dim == 1 {
        SymMatrix::new_1d(s00)
    } else {
        SymMatrix::new_2d(s00, s01, s11)
    };
    let delta = [xbar[0] - h.mu0[0], xbar[1] - h.mu0[1]];
    let psi = h.psi.add(&centred).add_outer(delta, h.k0 * m / kappa);
    NiwPosterior { kappa, mean, nu: h.nu_eff + m, psi }
}

/// Cached Student-t posterior predictive density of a cluster (or of the
/// empty cluster, i.e. the prior predictive).
#[derive(Clone, Copy, Debug)]
pub(crate) enum StudentPred {
    One { loc: f64, inv_dof_s2: f64, coef: f64, log_norm: f64 },
    Two { loc: [f64; 2], prec: [f64; 3], coef: f64, log_norm: f64 },
}

impl StudentPred {
    pub fn from_posterior(dim: usize, post: &NiwPosterior) -> Result<StudentPred> {
        let dof = post.nu - dim as f64 + 1.0;
        if !(dof > 0.0) {
            return Err(Error::domain(format!("predictive dof must be positive, got {dof}")));
        }
        let factor = (post.kappa + 1.0) / (post.kappa * dof);
        if dim == 1 {
            let s2 = post.psi.get(0, 0) * factor;
            if !(s2 > 0.0 && s2.is_finite()) {
                return Err(Error::domain(format!("predictive scale must be positive, got {s2}")));
            }
            Ok(StudentPred::One {
                loc: post.mean[0],
                inv_dof_s2: 1.0 / (dof * s2),
                coef: 0.5 * (dof + 1.0),
                log_norm: lgamma_raw(0.5 * (dof + 1.0))
                    - lgamma_raw(0.5 * dof)
                    - 0.5 * (dof.ln() + LN_PI + s2.ln()),
            })
        } else {
            let scale = post.psi.scale(factor);
            let det = scale.det();
            if !(det > 0.0 && det.is_finite()) {
                return Err(Error::domain("predictive scale not positive definite"));
            }
            let inv = scale.inverse()?;
            Ok(StudentPred::Two {
                loc: post.mean,
                prec: [
                    inv.get(0, 0) / dof,
                    inv.get(0, 1) / dof,
                    inv.get(1, 1) / dof,
                ],
                coef: 0.5 * (dof + 2.0),
                log_norm: lgamma_raw(0.5 * (dof + 2.0))
                    - lgamma_raw(0.5 * dof)
                    - (dof.ln() + LN_PI)
                    - 0.5 * det.ln(),
            })
        }
    }

    #[inline]
    pub fn logpdf(&self, x: [f64; 2]) -> f64 {
        match *self {
            StudentPred::One { loc, inv_dof_s2, coef, log_norm } => {
                let d = x[0] - loc;
                log_norm - coef * (d * d * inv_dof_s2).ln_1p()
            }
            StudentPred::Two { loc, prec, coef, log_norm } => {
                let d0 = x[0] - loc[0];
                let d1 = x[1] - loc[1];
                let q = prec[0] * d0 * d0 + 2.0 * prec[1] * d0 * d1 + prec[2] * d1 * d1;
                log_norm - coef * q.ln_1p()
            }
        }
    }
}

/// Cached Gaussian kernel density for the explicit cluster parameters.
#[derive(Clone, Copy, Debug)]
pub(crate) enum GaussKernel {
    One { mean: f64, half_inv_var: f64, log_norm: f64 },
    Two { mean: [f64; 2], half_prec: [f64; 3], log_norm: f64 },
}

impl GaussKernel {
    pub fn new(dim: usize, mean: [f64; 2], cov: &SymMatrix) -> Result<GaussKernel> {
        const LN_2PI: f64 = 1.8378770664093454836;
        if dim == 1 {
            let v = cov.get(0, 0);
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::domain(format!("kernel variance must be positive, got {v}")));
            }
            Ok(GaussKernel::One {
                mean: mean[0],
                half_inv_var: 0.5 / v,
                log_norm: -0.5 * (LN_2PI + v.ln()),
            })
        } else {
            let det = cov.det();
            if !(det > 0.0 && det.is_finite()) {
                return Err(Error::domain("kernel covariance not positive definite"));
            }
            let inv = cov.inverse()?;
            Ok(GaussKernel::Two {
                mean,
                half_prec: [
                    0.5 * inv.get(0, 0),
                    0.5 * inv.get(0, 1),
                    0.5 * inv.get(1, 1),
                ],
                log_norm: -(LN_2PI + 0.5 * det.ln()),
            })
        }
    }

    #[inline]
    pub fn logpdf(&self, x: [f64; 2]) -> f64 {
        match *self {
            GaussKernel::One { mean, half_inv_var, log_norm } => {
                let d = x[0] - mean;
                log_norm - d * d * half_inv_var
            }
            GaussKernel::Two { mean, half_prec, log_norm } => {
                let d0 = x[0] - mean[0];
                let d1 = x[1] - mean[1];
                log_norm
                    - (half_prec[0] * d0 * d0 + 2.0 * half_prec[1] * d0 * d1 + half_prec[2] * d1 * d1)
            }
        }
    }
}

/// One mixture component: sufficient statistics plus explicit parameters.
#[derive(Clone, Debug)]
pub(crate) struct Cluster {
    pub stats: ClusterStats,
    pub mean: [f64; 2],
    pub cov: SymMatrix,
    pub pred: StudentPred,
}
