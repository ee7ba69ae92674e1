//! Deterministic special functions, small symmetric matrices, and seeded
//! samplers shared by every other module.

mod matrix;
mod rng;
mod sample;
mod special;

pub use matrix::{CholFactor, SymMatrix, SYMMETRY_TOL};
pub use rng::{mix64, splitmix64, stable_hash64, RngStream, StreamRng};
pub use sample::{
    logpdf_mvnormal, logpdf_student_t, sample_beta, sample_categorical, sample_dirichlet,
    sample_gamma, sample_inverse_gamma, sample_inverse_wishart, sample_mvnormal, sample_normal,
    sample_wishart, slice_sample_1d,
};
pub use special::{
    digamma, log_beta, log_beta_pdf, log_gamma, normal_cdf, reg_gamma_lower, reg_gamma_upper,
    reg_inc_beta,
};

pub(crate) use special::lgamma_raw;

/// Centers and scales by the sample standard deviation (n−1 denominator).
/// Returns the transformed values together with (mean, sd). A constant
/// column keeps sd = 0 and is only centered.
pub fn standardize(values: &[f64]) -> (Vec<f64>, f64, f64) {
    let n = values.len();
    if n == 0 {
        return (Vec::new(), 0.0, 0.0);
    }
    // reductions run over sorted copies so the result is exactly invariant
    // to the row order of the input
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let mean = sorted.iter().sum::<f64>() / n as f64;
    let sd = if n > 1 {
        let ss: f64 = sorted.iter().map(|v| (v - mean) * (v - mean)).sum();
        (ss / (n as f64 - 1.0)).sqrt()
    } else {
        0.0
    };
    let out = if sd > 0.0 {
        values.iter().map(|v| (v - mean) / sd).collect()
    } else {
        values.iter().map(|v| v - mean).collect()
    };
    (out, mean, sd)
}
