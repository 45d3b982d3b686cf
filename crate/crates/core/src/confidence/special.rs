//! Special functions behind the Clopper–Pearson and Wilson intervals.

use std::f64::consts::{PI, SQRT_2};

use crate::error::{domain, Result};

const CF_MAX_ITER: usize = 300;
const CF_TINY: f64 = 1e-300;

pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// Regularized incomplete beta function `I_x(a, b)` for `a, b > 0`, `x ∈ [0, 1]`.
pub fn beta_inc(a: f64, b: f64, x: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) {
        return domain(format!("beta shape parameters must be positive, got ({a}, {b})"));
    }
    if !(0.0..=1.0).contains(&x) {
        return domain(format!("x = {x} is outside [0, 1]"));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == 1.0 {
        return Ok(1.0);
    }
    // The continued fraction converges quickly below the mean; use the
    // reflection I_x(a, b) = 1 - I_{1-x}(b, a) above it.
    if x > (a + 1.0) / (a + b + 2.0) {
        Ok(1.0 - beta_cf(b, a, 1.0 - x))
    } else {
        Ok(beta_cf(a, b, x))
    }
}

/// Modified Lentz evaluation of the incomplete beta continued fraction.
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    let ln_prefix = a * x.ln() + b * (1.0 - x).ln() - ln_beta(a, b);
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;

    let clamp = |v: f64| if v.abs() < CF_TINY { CF_TINY } else { v };
    let mut c = 1.0;
    let mut d = 1.0 / clamp(1.0 - qab * x / qap);
    let mut h = d;
    for m in 1..=CF_MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 / clamp(1.0 + aa * d);
        c = clamp(1.0 + aa / c);
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 / clamp(1.0 + aa * d);
        c = clamp(1.0 + aa / c);
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (ln_prefix.exp() * h / a).clamp(0.0, 1.0)
}

/// Beta density, used for Newton steps in [`beta_quantile`].
fn beta_pdf(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    ((a - 1.0) * x.ln() + (b - 1.0) * (1.0 - x).ln() - ln_beta(a, b)).exp()
}

/// The `p`-th quantile of the Beta(a, b) distribution.
///
/// Upper quantiles are computed through the reflection
/// `Q(p; a, b) = 1 - Q(1 - p; b, a)` so the search always runs in the lower
/// tail, where the answer has full relative precision.
pub fn beta_quantile(p: f64, a: f64, b: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return domain(format!("probability {p} is outside [0, 1]"));
    }
    if !(a > 0.0 && b > 0.0) {
        return domain(format!("beta shape parameters must be positive, got ({a}, {b})"));
    }
    if p == 0.0 {
        return Ok(0.0);
    }
    if p == 1.0 {
        return Ok(1.0);
    }
    if p > 0.5 {
        return Ok(1.0 - lower_quantile(1.0 - p, b, a)?);
    }
    lower_quantile(p, a, b)
}

/// Newton iteration safeguarded by a bisection bracket; every iterate stays
/// inside the bracket, which shrinks until it is relatively tight or the
/// Newton step stalls.
fn lower_quantile(p: f64, a: f64, b: f64) -> Result<f64> {
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    let mut x = a / (a + b);
    for _ in 0..400 {
        let g = beta_inc(a, b, x)? - p;
        if g == 0.0 {
            return Ok(x);
        }
        if g < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
        let slope = beta_pdf(a, b, x);
        let newton = x - g / slope;
        let next = if slope > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - x).abs() < 1e-15 * x.max(1e-300) {
            return Ok(next);
        }
        x = next;
    }
    Ok(x)
}

/// Standard normal upper tail `1 - Φ(z)`.
pub fn normal_sf(z: f64) -> f64 {
    0.5 * libm::erfc(z / SQRT_2)
}

/// `z` with `Φ(z) = 1 - c`, i.e. the upper `c` quantile of the standard normal.
///
/// Acklam's rational approximation followed by one Halley correction on the
/// complementary error function.
pub fn normal_quantile(c: f64) -> Result<f64> {
    if !(c > 0.0 && c < 1.0) {
        return domain(format!("tail probability {c} is outside (0, 1)"));
    }
    // x = Φ⁻¹(c); the result is -x.
    let x = acklam(c);
    let err = 0.5 * libm::erfc(-x / SQRT_2) - c;
    let u = err * (2.0 * PI).sqrt() * (0.5 * x * x).exp();
    let x = x - u / (1.0 + 0.5 * x * u);
    Ok(-x)
}

fn acklam(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;
    let tail = |q: f64| {
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    if p < P_LOW {
        tail((-2.0 * p.ln()).sqrt())
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -tail((-2.0 * (1.0 - p).ln()).sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bisect_normal(c: f64) -> f64 {
        let (mut lo, mut hi) = (-40.0, 40.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if normal_sf(mid) > c {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn normal_quantile_examples() {
        assert!(normal_quantile(0.5).unwrap().abs() < 1e-12);
        let z = normal_quantile(0.025).unwrap();
        assert!((z - bisect_normal(0.025)).abs() < 1e-9);
        assert!((z - 1.95996398).abs() < 1e-8);
        assert!((normal_quantile(0.1587).unwrap() - 1.0).abs() < 2e-3);
        assert!(normal_quantile(0.0).is_err());
        assert!(normal_quantile(1.0).is_err());
    }

    #[test]
    fn normal_quantile_matches_bisection() {
        for &c in &[1e-12, 1e-8, 1e-5, 0.001, 0.01, 0.02425, 0.1, 0.3, 0.7, 0.9, 0.99, 0.999] {
            let z = normal_quantile(c).unwrap();
            assert!((z - bisect_normal(c)).abs() < 1e-9, "c={c}");
        }
    }

    #[test]
    fn beta_inc_known_values() {
        assert!((beta_inc(1.0, 1.0, 0.3).unwrap() - 0.3).abs() < 1e-14);
        // I_x(a, 1) = x^a
        assert!((beta_inc(3.0, 1.0, 0.4).unwrap() - 0.064).abs() < 1e-14);
        // I_x(1, b) = 1 - (1-x)^b
        assert!((beta_inc(1.0, 4.0, 0.2).unwrap() - (1.0 - 0.8f64.powi(4))).abs() < 1e-14);
        // Symmetry I_x(a, b) = 1 - I_{1-x}(b, a)
        let v = beta_inc(2.5, 7.0, 0.35).unwrap();
        let w = beta_inc(7.0, 2.5, 0.65).unwrap();
        assert!((v + w - 1.0).abs() < 1e-14);
        assert!(beta_inc(0.0, 1.0, 0.5).is_err());
    }

    #[test]
    fn beta_quantile_inverts_beta_inc() {
        for &(a, b) in &[(1.0, 10.0), (5.0, 6.0), (0.5, 0.5), (40.0, 3.0), (200.0, 250.0)] {
            for &p in &[1e-6, 0.025, 0.3, 0.5, 0.975, 1.0 - 1e-6] {
                let x = beta_quantile(p, a, b).unwrap();
                assert!((beta_inc(a, b, x).unwrap() - p).abs() < 1e-10, "a={a} b={b} p={p}");
            }
        }
    }
}
