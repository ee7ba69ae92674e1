//! Special functions needed by the conjugate algebra: log-gamma, digamma,
//! regularized incomplete gamma, and the normal CDF derived from it.

use crate::{Error, Result};

const LN_2PI: f64 = 1.8378770664093454836;

// Asymptotic (Stirling) coefficients B_{2n} / (2n (2n-1)).
const STIRLING: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
];

/// Natural log of the gamma function for x > 0.
///
/// Uses the Stirling series after shifting the argument above 10 by the
/// recurrence ln Γ(x) = ln Γ(x+1) − ln x; relative error is far below 1e-12
/// over the range exercised here.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::domain(format!("log_gamma requires x > 0, got {x}")));
    }
    Ok(lgamma_raw(x))
}

/// Unchecked log-gamma for arguments already known to be positive.
pub(crate) fn lgamma_raw(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    let mut shift = 0.0;
    let mut z = x;
    while z < 10.0 {
        shift -= z.ln();
        z += 1.0;
    }
    let inv = 1.0 / z;
    let inv2 = inv * inv;
    let mut series = 0.0;
    let mut term = inv;
    for c in STIRLING {
        series += c * term;
        term *= inv2;
    }
    (z - 0.5) * z.ln() - z + 0.5 * LN_2PI + series + shift
}

/// Digamma function ψ(x) = d/dx ln Γ(x) for x > 0, accurate to ~1e-12.
pub fn digamma(x: f64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::domain(format!("digamma requires x > 0, got {x}")));
    }
    let mut shift = 0.0;
    let mut z = x;
    while z < 10.0 {
        shift -= 1.0 / z;
        z += 1.0;
    }
    // ψ(z) ~ ln z − 1/(2z) − Σ B_{2n} / (2n z^{2n})
    const COEF: [f64; 7] = [
        1.0 / 12.0,
        -1.0 / 120.0,
        1.0 / 252.0,
        -1.0 / 240.0,
        1.0 / 132.0,
        -691.0 / 32760.0,
        1.0 / 12.0,
    ];
    let inv2 = 1.0 / (z * z);
    let mut series = 0.0;
    let mut term = inv2;
    for c in COEF {
        series += c * term;
        term *= inv2;
    }
    Ok(z.ln() - 0.5 / z - series + shift)
}

/// ln B(a, b) = ln Γ(a) + ln Γ(b) − ln Γ(a+b).
pub fn log_beta(a: f64, b: f64) -> Result<f64> {
    Ok(log_gamma(a)? + log_gamma(b)? - lgamma_raw(a + b))
}

/// Log density of the Beta(a, b) distribution at x in (0, 1).
pub fn log_beta_pdf(x: f64, a: f64, b: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::domain(format!("beta pdf requires x in [0,1], got {x}")));
    }
    Ok((a - 1.0) * x.ln() + (b - 1.0) * (1.0 - x).ln() - log_beta(a, b)?)
}

/// Regularized lower incomplete gamma P(s, x) = γ(s, x) / Γ(s).
pub fn reg_gamma_lower(s: f64, x: f64) -> Result<f64> {
    if !s.is_finite() || s <= 0.0 || !x.is_finite() || x < 0.0 {
        return Err(Error::domain(format!(
            "regularized gamma requires s > 0, x >= 0, got s={s}, x={x}"
        )));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x < s + 1.0 {
        Ok(gamma_series(s, x))
    } else {
        Ok(1.0 - gamma_cont_frac(s, x))
    }
}

/// Regularized upper incomplete gamma Q(s, x) = 1 − P(s, x).
pub fn reg_gamma_upper(s: f64, x: f64) -> Result<f64> {
    if !s.is_finite() || s <= 0.0 || !x.is_finite() || x < 0.0 {
        return Err(Error::domain(format!(
            "regularized gamma requires s > 0, x >= 0, got s={s}, x={x}"
        )));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    if x < s + 1.0 {
        Ok(1.0 - gamma_series(s, x))
    } else {
        Ok(gamma_cont_frac(s, x))
    }
}

// Series representation of P(s, x), converges fast for x < s + 1.
fn gamma_series(s: f64, x: f64) -> f64 {
    let mut ap = s;
    let mut sum = 1.0 / s;
    let mut del = sum;
    for _ in 0..500 {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if del.abs() < sum.abs() * 1e-16 {
            break;
        }
    }
    sum * (-x + s * x.ln() - lgamma_raw(s)).exp()
}

// Continued fraction for Q(s, x) by modified Lentz, for x >= s + 1.
fn gamma_cont_frac(s: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - s;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..500 {
        let an = -(i as f64) * (i as f64 - s);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h * (-x + s * x.ln() - lgamma_raw(s)).exp()
}

/// Regularized incomplete beta I_x(a, b) by the standard continued
/// fraction, accurate to ~1e-13.
pub fn reg_inc_beta(x: f64, a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && a.is_finite() && b > 0.0 && b.is_finite()) {
        return Err(Error::domain(format!("incomplete beta requires a, b > 0, got ({a}, {b})")));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::domain(format!("incomplete beta requires x in [0,1], got {x}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == 1.0 {
        return Ok(1.0);
    }
    let front = (a * x.ln() + b * (1.0 - x).ln()
        - (lgamma_raw(a) + lgamma_raw(b) - lgamma_raw(a + b)))
    .exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        Ok(front * beta_cont_frac(x, a, b) / a)
    } else {
        Ok(1.0 - front * beta_cont_frac(1.0 - x, b, a) / b)
    }
}

// Lentz evaluation of the incomplete-beta continued fraction.
fn beta_cont_frac(x: f64, a: f64, b: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..300 {
        let mf = m as f64;
        let m2 = 2.0 * mf;
        let aa = mf * (b - mf) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + mf) * (qab + mf) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-15 {
            break;
        }
    }
    h
}

/// Standard normal CDF via the incomplete gamma function.
pub fn normal_cdf(z: f64) -> f64 {
    if z == 0.0 {
        return 0.5;
    }
    let p = reg_gamma_lower(0.5, 0.5 * z * z).expect("fixed valid arguments");
    if z > 0.0 {
        0.5 * (1.0 + p)
    } else {
        0.5 * (1.0 - p)
    }
}
