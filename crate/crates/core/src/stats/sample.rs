//! Seeded samplers and log densities for the distributions used by the
//! mixture engine: normal / multivariate normal, (inverse) gamma, beta,
//! Dirichlet, categorical, (inverse) Wishart, and Student-t densities.
//!
//! All samplers are deterministic given the generator state and validate
//! their parameters up front.

use rand::Rng;
use rand_distr::Distribution;

use super::matrix::SymMatrix;
use super::special::lgamma_raw;
use crate::{Error, Result};

const LN_PI: f64 = 1.1447298858494001741;
const LN_2PI: f64 = 1.8378770664093454836;

pub fn sample_normal<R: Rng>(mean: f64, variance: f64, rng: &mut R) -> Result<f64> {
    if !mean.is_finite() || !variance.is_finite() || variance < 0.0 {
        return Err(Error::domain(format!(
            "normal requires finite mean and variance >= 0, got ({mean}, {variance})"
        )));
    }
    if variance == 0.0 {
        return Ok(mean);
    }
    let dist = rand_distr::Normal::new(mean, variance.sqrt())
        .map_err(|e| Error::domain(e.to_string()))?;
    Ok(dist.sample(rng))
}

pub fn sample_mvnormal<R: Rng>(mean: [f64; 2], cov: &SymMatrix, rng: &mut R) -> Result<[f64; 2]> {
    let chol = cov.cholesky()?;
    let z = [
        sample_normal(0.0, 1.0, rng)?,
        if cov.dim() == 2 { sample_normal(0.0, 1.0, rng)? } else { 0.0 },
    ];
    let lz = chol.mul_vec(z);
    Ok([mean[0] + lz[0], mean[1] + lz[1]])
}

/// Gamma in shape–rate form: density ∝ x^{shape-1} e^{-rate x}.
pub fn sample_gamma<R: Rng>(shape: f64, rate: f64, rng: &mut R) -> Result<f64> {
    if !(shape > 0.0 && shape.is_finite() && rate > 0.0 && rate.is_finite()) {
        return Err(Error::domain(format!(
            "gamma requires shape > 0 and rate > 0, got ({shape}, {rate})"
        )));
    }
    let dist = rand_distr::Gamma::new(shape, 1.0 / rate).map_err(|e| Error::domain(e.to_string()))?;
    Ok(dist.sample(rng))
}

/// Inverse gamma in shape–rate form: density ∝ x^{-shape-1} e^{-rate/x}.
pub fn sample_inverse_gamma<R: Rng>(shape: f64, rate: f64, rng: &mut R) -> Result<f64> {
    let g = sample_gamma(shape, rate, rng)?;
    Ok(1.0 / g)
}

pub fn sample_beta<R: Rng>(a: f64, b: f64, rng: &mut R) -> Result<f64> {
    if !(a > 0.0 && a.is_finite() && b > 0.0 && b.is_finite()) {
        return Err(Error::domain(format!("beta requires a, b > 0, got ({a}, {b})")));
    }
    let dist = rand_distr::Beta::new(a, b).map_err(|e| Error::domain(e.to_string()))?;
    Ok(dist.sample(rng))
}

pub fn sample_dirichlet<R: Rng>(alpha: &[f64], rng: &mut R) -> Result<Vec<f64>> {
    if alpha.is_empty() {
        return Err(Error::domain("dirichlet requires at least one weight".to_string()));
    }
    if alpha.iter().any(|&a| !(a > 0.0 && a.is_finite())) {
        return Err(Error::domain("dirichlet weights must be positive".to_string()));
    }
    let mut draws = Vec::with_capacity(alpha.len());
    let mut total = 0.0;
    for &a in alpha {
        let g = sample_gamma(a, 1.0, rng)?;
        total += g;
        draws.push(g);
    }
    if total <= 0.0 {
        // possible only by extreme underflow with tiny shapes
        let k = alpha.len() as f64;
        return Ok(vec![1.0 / k; alpha.len()]);
    }
    for d in &mut draws {
        *d /= total;
    }
    Ok(draws)
}

pub fn sample_categorical<R: Rng>(weights: &[f64], rng: &mut R) -> Result<usize> {
    if weights.is_empty() {
        return Err(Error::domain("categorical requires at least one weight".to_string()));
    }
    if weights.iter().any(|&w| w < 0.0 || !w.is_finite()) {
        return Err(Error::domain("categorical weights must be finite and >= 0".to_string()));
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::domain("categorical weights must not all be zero".to_string()));
    }
    let u: f64 = rng.random::<f64>() * total;
    let mut cum = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        cum += w;
        if u < cum {
            return Ok(i);
        }
    }
    Ok(weights.len() - 1)
}

/// Wishart(dof, scale) by the Bartlett decomposition; requires dof > d - 1.
pub fn sample_wishart<R: Rng>(dof: f64, scale: &SymMatrix, rng: &mut R) -> Result<SymMatrix> {
    let d = scale.dim();
    if !(dof.is_finite() && dof > d as f64 - 1.0) {
        return Err(Error::domain(format!("wishart requires dof > d-1, got {dof} (d={d})")));
    }
    let l = scale.cholesky()?;
    // A lower-triangular: A_ii^2 ~ chi^2_{dof-i+1}, A_21 ~ N(0,1)
    let a00 = sample_gamma(0.5 * dof, 0.5, rng)?.sqrt();
    if d == 1 {
        let la = l.mul_vec([a00, 0.0]);
        return Ok(SymMatrix::new_1d(la[0] * la[0]));
    }
    let a11 = sample_gamma(0.5 * (dof - 1.0), 0.5, rng)?.sqrt();
    let a10 = sample_normal(0.0, 1.0, rng)?;
    // columns of L*A
    let c0 = l.mul_vec([a00, a10]);
    let c1 = l.mul_vec([0.0, a11]);
    Ok(SymMatrix::new_2d(
        c0[0] * c0[0] + c1[0] * c1[0],
        c0[0] * c0[1] + c1[0] * c1[1],
        c0[1] * c0[1] + c1[1] * c1[1],
    ))
}

/// Inverse Wishart with scale Ψ and mean Ψ / (dof − d − 1) for dof > d + 1.
pub fn sample_inverse_wishart<R: Rng>(dof: f64, psi: &SymMatrix, rng: &mut R) -> Result<SymMatrix> {
    let w = sample_wishart(dof, &psi.inverse()?, rng)?;
    w.inverse()
}

pub fn logpdf_mvnormal(x: &[f64], mean: &[f64], cov: &SymMatrix) -> Result<f64> {
    let d = cov.dim();
    if x.len() != d || mean.len() != d {
        return Err(Error::invalid(format!(
            "dimension mismatch: point {}, mean {}, cov {d}",
            x.len(),
            mean.len()
        )));
    }
    let chol = cov.cholesky()?;
    let diff = [x[0] - mean[0], if d == 2 { x[1] - mean[1] } else { 0.0 }];
    let w = chol.forward_solve(diff);
    let maha = w[0] * w[0] + w[1] * w[1];
    Ok(-0.5 * (d as f64 * LN_2PI + chol.log_det() + maha))
}

/// Multivariate Student-t log density with `dof` degrees of freedom,
/// location `loc` and scale matrix `scale` (dimension from the matrix).
pub fn logpdf_student_t(x: &[f64], dof: f64, loc: &[f64], scale: &SymMatrix) -> Result<f64> {
    let d = scale.dim();
    if x.len() != d || loc.len() != d {
        return Err(Error::invalid("dimension mismatch in student-t logpdf".to_string()));
    }
    if !(dof > 0.0 && dof.is_finite()) {
        return Err(Error::domain(format!("student-t requires dof > 0, got {dof}")));
    }
    let chol = scale.cholesky()?;
    let diff = [x[0] - loc[0], if d == 2 { x[1] - loc[1] } else { 0.0 }];
    let w = chol.forward_solve(diff);
    let maha = w[0] * w[0] + w[1] * w[1];
    let dd = d as f64;
    Ok(lgamma_raw(0.5 * (dof + dd)) - lgamma_raw(0.5 * dof)
        - 0.5 * dd * (dof.ln() + LN_PI)
        - 0.5 * chol.log_det()
        - 0.5 * (dof + dd) * (maha / dof).ln_1p())
}

/// One univariate slice-sampling update (stepping-out then shrinkage) for a
/// log density evaluated by `logf`. Returns a new point with the correct
/// stationary distribution given the current point `x0`.
pub fn slice_sample_1d<R: Rng, F: Fn(f64) -> f64>(
    logf: F,
    x0: f64,
    width: f64,
    max_steps: usize,
    rng: &mut R,
) -> f64 {
    let f0 = logf(x0);
    if !f0.is_finite() {
        return x0;
    }
    let y = f0 + rng.random::<f64>().max(f64::MIN_POSITIVE).ln();
    let u: f64 = rng.random();
    let mut lo = x0 - width * u;
    let mut hi = lo + width;
    let mut budget = max_steps;
    while budget > 0 && logf(lo) > y {
        lo -= width;
        budget -= 1;
    }
    let mut budget = max_steps;
    while budget > 0 && logf(hi) > y {
        hi += width;
        budget -= 1;
    }
    for _ in 0..200 {
        let x1 = lo + rng.random::<f64>() * (hi - lo);
        let f1 = logf(x1);
        if f1 > y {
            return x1;
        }
        if x1 < x0 {
            lo = x1;
        } else {
            hi = x1;
        }
    }
    x0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::RngStream;

    fn rng() -> crate::stats::StreamRng {
        RngStream::new(20240817).rng()
    }

    #[test]
    fn normal_degenerate_variance_returns_mean() {
        let mut r = rng();
        for _ in 0..10 {
            assert_eq!(sample_normal(3.25, 0.0, &mut r).unwrap(), 3.25);
        }
        assert!(sample_normal(0.0, -1.0, &mut r).is_err());
        assert!(sample_normal(f64::NAN, 1.0, &mut r).is_err());
    }

    #[test]
    fn dirichlet_mean_matches_law_of_large_numbers() {
        let mut r = rng();
        let n = 100_000;
        let mut m = [0.0, 0.0];
        for _ in 0..n {
            let d = sample_dirichlet(&[1.0, 1.0], &mut r).unwrap();
            m[0] += d[0];
            m[1] += d[1];
        }
        assert!((m[0] / n as f64 - 0.5).abs() < 0.01);
        assert!((m[1] / n as f64 - 0.5).abs() < 0.01);
    }

    #[test]
    fn inverse_wishart_mean_identity() {
        // mean of IW(dof=4, I_2) is I_2 / (4 - 2 - 1) = I_2
        let mut r = rng();
        let n = 100_000;
        let mut acc = [0.0; 3];
        for _ in 0..n {
            let s = sample_inverse_wishart(4.0, &SymMatrix::identity(2), &mut r).unwrap();
            acc[0] += s.get(0, 0);
            acc[1] += s.get(0, 1);
            acc[2] += s.get(1, 1);
        }
        let scale = 1.0 / n as f64;
        assert!((acc[0] * scale - 1.0).abs() < 0.05, "m00 {}", acc[0] * scale);
        assert!((acc[1] * scale).abs() < 0.05, "m01 {}", acc[1] * scale);
        assert!((acc[2] * scale - 1.0).abs() < 0.05, "m11 {}", acc[2] * scale);
    }

    #[test]
    fn sampler_moments_within_four_standard_errors() {
        let mut r = rng();
        let n = 100_000usize;
        let nf = n as f64;

        // gamma(3, 2): mean 1.5, var 0.75
        let mut s = 0.0;
        for _ in 0..n {
            s += sample_gamma(3.0, 2.0, &mut r).unwrap();
        }
        let se = (0.75f64 / nf).sqrt();
        assert!((s / nf - 1.5).abs() < 4.0 * se);

        // beta(2, 5): mean 2/7, var 10/392
        let mut s = 0.0;
        for _ in 0..n {
            s += sample_beta(2.0, 5.0, &mut r).unwrap();
        }
        let se = ((10.0 / 392.0f64) / nf).sqrt();
        assert!((s / nf - 2.0 / 7.0).abs() < 4.0 * se);

        // normal(−1, 4): mean −1, var 4
        let mut s = 0.0;
        for _ in 0..n {
            s += sample_normal(-1.0, 4.0, &mut r).unwrap();
        }
        let se = (4.0f64 / nf).sqrt();
        assert!((s / nf + 1.0).abs() < 4.0 * se);

        // mvnormal mean and covariance
        let cov = SymMatrix::new_2d(2.0, 0.8, 1.0);
        let mut mean = [0.0, 0.0];
        let mut c01 = 0.0;
        for _ in 0..n {
            let v = sample_mvnormal([1.0, -2.0], &cov, &mut r).unwrap();
            mean[0] += v[0];
            mean[1] += v[1];
            c01 += (v[0] - 1.0) * (v[1] + 2.0);
        }
        assert!((mean[0] / nf - 1.0).abs() < 4.0 * (2.0f64 / nf).sqrt());
        assert!((mean[1] / nf + 2.0).abs() < 4.0 * (1.0f64 / nf).sqrt());
        // var of the cross product term for a Gaussian: c00*c11 + c01^2
        let se = ((2.0 * 1.0 + 0.64f64) / nf).sqrt();
        assert!((c01 / nf - 0.8).abs() < 4.0 * se);
    }

    #[test]
    fn categorical_respects_weights() {
        let mut r = rng();
        let w = [0.0, 2.0, 0.0, 6.0];
        let mut counts = [0usize; 4];
        for _ in 0..40_000 {
            counts[sample_categorical(&w, &mut r).unwrap()] += 1;
        }
        assert_eq!(counts[0], 0);
        assert_eq!(counts[2], 0);
        let frac = counts[1] as f64 / 40_000.0;
        assert!((frac - 0.25).abs() < 0.01);
        assert!(sample_categorical(&[0.0, 0.0], &mut r).is_err());
        assert!(sample_categorical(&[], &mut r).is_err());
    }

    #[test]
    fn mvnormal_logpdf_known_value_and_symmetry() {
        // at the mean with identity covariance in d=2 the density is 1/(2π)
        let v = logpdf_mvnormal(&[0.3, -0.7], &[0.3, -0.7], &SymMatrix::identity(2)).unwrap();
        assert!((v - (-LN_2PI)).abs() < 1e-12);
        // symmetric pair about the mean
        let cov = SymMatrix::new_2d(1.3, 0.4, 2.2);
        let mu = [0.5, -1.5];
        let delta = [0.7, 0.2];
        let a = logpdf_mvnormal(&[mu[0] + delta[0], mu[1] + delta[1]], &mu, &cov).unwrap();
        let b = logpdf_mvnormal(&[mu[0] - delta[0], mu[1] - delta[1]], &mu, &cov).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn student_t_approaches_normal_for_large_dof() {
        let scale = SymMatrix::new_2d(1.5, -0.2, 0.9);
        let mu = [0.1, 0.4];
        for point in [[0.0, 0.0], [1.2, -0.8], [-2.0, 1.0]] {
            let t = logpdf_student_t(&point, 1e6, &mu, &scale).unwrap();
            let n = logpdf_mvnormal(&point, &mu, &scale).unwrap();
            assert!((t - n).abs() < 1e-6, "dof limit: {t} vs {n}");
        }
        // univariate case agrees with the textbook formula
        let t1 = logpdf_student_t(&[1.0], 3.0, &[0.0], &SymMatrix::new_1d(1.0)).unwrap();
        let expect = lgamma_raw(2.0) - lgamma_raw(1.5) - 0.5 * (3.0 * std::f64::consts::PI).ln()
            - 2.0 * (1.0 + 1.0 / 3.0f64).ln();
        assert!((t1 - expect).abs() < 1e-12);
    }

    #[test]
    fn densities_integrate_to_one() {
        // d=1 normal and student-t on a fine grid over ±40 (heavy tails)
        let step = 0.002;
        let m = (80.0 / step) as usize;
        let mut total_n = 0.0;
        let mut total_t = 0.0;
        let scale = SymMatrix::new_1d(1.7);
        for j in 0..m {
            let x = -40.0 + (j as f64 + 0.5) * step;
            total_n += logpdf_mvnormal(&[x], &[0.3], &scale).unwrap().exp() * step;
            total_t += logpdf_student_t(&[x], 3.0, &[0.3], &scale).unwrap().exp() * step;
        }
        assert!((total_n - 1.0).abs() < 1e-3, "normal mass {total_n}");
        assert!((total_t - 1.0).abs() < 5e-3, "student mass {total_t}");

        // d=2 normal on a coarse grid
        let step = 0.05;
        let m = (24.0 / step) as usize;
        let cov = SymMatrix::new_2d(1.0, 0.3, 0.8);
        let mut total = 0.0;
        for i in 0..m {
            let x = -12.0 + (i as f64 + 0.5) * step;
            for j in 0..m {
                let y = -12.0 + (j as f64 + 0.5) * step;
                total += logpdf_mvnormal(&[x, y], &[0.0, 0.0], &cov).unwrap().exp() * step * step;
            }
        }
        assert!((total - 1.0).abs() < 1e-2, "bivariate mass {total}");
    }

    #[test]
    fn slice_sampler_targets_gamma() {
        // slice-sample a Gamma(3, 1) log density and check the mean
        let logf = |x: f64| if x > 0.0 { 2.0 * x.ln() - x } else { f64::NEG_INFINITY };
        let mut r = rng();
        let mut x = 1.0;
        let mut total = 0.0;
        let n = 20_000;
        for _ in 0..n {
            x = slice_sample_1d(&logf, x, 2.0, 50, &mut r);
            total += x;
        }
        let mean = total / n as f64;
        assert!((mean - 3.0).abs() < 0.1, "slice mean {mean}");
    }
}
