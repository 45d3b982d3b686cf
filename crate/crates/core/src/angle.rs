//! Breakpoint geometry behind the refinement step.
//!
//! For an odd factor `L`, the amplitudes `sin²(lπ/(2L))`, `l = 1..L-1`, are
//! exactly the values at which the scaled angle `L·K·theta` crosses a
//! quarter-period boundary. An amplitude interval `[a-ε, a+ε]` can be pushed
//! through a factor `L` without straddling a boundary iff it avoids every
//! breakpoint of `L`, which is what [`e_l`] and [`e`] measure.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::Serialize;

use crate::error::{domain, Result};

/// Refinement factors, in the order they are tried.
pub const REFINE_FACTORS: [u64; 3] = [7, 5, 3];

/// Fundamental constants of both estimators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Constants {
    /// Largest amplitude half-width for which every interval is refinable.
    #[serde(rename = "E")]
    pub e: f64,
    /// Worst angle half-width of a bracket built from a `±E` amplitude interval.
    #[serde(rename = "F")]
    pub f: f64,
    /// Round-budget scale for the fixed-shot estimator, `4/(6F+π)`.
    #[serde(rename = "C_alg1")]
    pub c_alg1: f64,
    /// Round-budget scale for the accelerated estimator, `8/(3π)`.
    #[serde(rename = "C_alg2")]
    pub c_alg2: f64,
}

pub fn constants() -> Constants {
    let e = 0.5 * (sin2(3.0 * PI / 14.0) - sin2(PI / 6.0));
    let f = 0.5 * (2.0 * e).sqrt().asin();
    Constants {
        e,
        f,
        c_alg1: 4.0 / (6.0 * f + PI),
        c_alg2: 8.0 / (3.0 * PI),
    }
}

#[inline]
pub(crate) fn sin2(x: f64) -> f64 {
    let s = x.sin();
    s * s
}

fn check_amplitude(a: f64, name: &str) -> Result<()> {
    if (0.0..=1.0).contains(&a) {
        Ok(())
    } else {
        domain(format!("{name} = {a} is outside [0, 1]"))
    }
}

/// The breakpoints `sin²(lπ/(2L))` for `l = 1..L-1`, ascending.
pub fn breakpoints(l: u64) -> Vec<f64> {
    (1..l)
        .map(|j| sin2(j as f64 * FRAC_PI_2 / l as f64))
        .collect()
}

/// Distance from `a` to the nearest breakpoint of the odd factor `l`.
pub fn e_l(a: f64, l: u64) -> Result<f64> {
    check_amplitude(a, "a")?;
    if l < 3 || l % 2 == 0 {
        return domain(format!("L = {l} must be odd and at least 3"));
    }
    Ok(breakpoints(l)
        .into_iter()
        .map(|b| (a - b).abs())
        .fold(f64::INFINITY, f64::min))
}

/// `max(e_3(a), e_5(a), e_7(a))`; larger odd factors never attain the maximum.
pub fn e(a: f64) -> Result<f64> {
    check_amplitude(a, "a")?;
    let mut best = 0.0_f64;
    for l in [3, 5, 7] {
        best = best.max(e_l(a, l)?);
    }
    Ok(best)
}

/// Angle half-width of the bracket built from the amplitude interval `a ± eps`
/// (clipped to [0, 1]). Independent of the quarter-period index.
pub fn f(a: f64, eps: f64) -> Result<f64> {
    check_amplitude(a, "a")?;
    if !(eps >= 0.0) {
        return domain(format!("eps = {eps} must be non-negative"));
    }
    let hi = (a + eps).min(1.0);
    let lo = (a - eps).max(0.0);
    Ok(0.5 * (hi.sqrt().asin() - lo.sqrt().asin()))
}

/// A certified angle interval together with the Grover scale it was measured at.
///
/// `K·theta_lo` and `K·theta_hi` lie in the quarter period
/// `[m·π/2, (m+1)·π/2]`. The offsets into that quarter period are kept
/// alongside the absolute angles so that refinement does not lose precision
/// to cancellation once `m` is large.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AngleBracket {
    #[serde(rename = "K")]
    pub k: u64,
    pub m: u64,
    pub theta_lo: f64,
    pub theta_hi: f64,
    #[serde(skip)]
    phase_lo: f64,
    #[serde(skip)]
    phase_hi: f64,
}

impl AngleBracket {
    /// The whole range `[0, π/2]` at `K = 1`.
    pub fn initial() -> Self {
        Self::from_phases(1, 0, 0.0, FRAC_PI_2)
    }

    fn from_phases(k: u64, m: u64, phase_lo: f64, phase_hi: f64) -> Self {
        let base = m as f64 * FRAC_PI_2;
        let kf = k as f64;
        Self {
            k,
            m,
            theta_lo: (base + phase_lo) / kf,
            theta_hi: (base + phase_hi) / kf,
            phase_lo,
            phase_hi,
        }
    }

    /// `(K·theta_lo - m·π/2, K·theta_hi - m·π/2)`, both in `[0, π/2]`.
    pub fn phases(&self) -> (f64, f64) {
        (self.phase_lo, self.phase_hi)
    }

    pub fn width(&self) -> f64 {
        (self.phase_hi - self.phase_lo) / self.k as f64
    }

    pub fn midpoint(&self) -> f64 {
        (self.m as f64 * FRAC_PI_2 + 0.5 * (self.phase_lo + self.phase_hi)) / self.k as f64
    }

    /// Amplitude estimate `sin²` of the midpoint angle.
    pub fn amplitude_estimate(&self) -> f64 {
        sin2(self.midpoint())
    }

    pub fn contains(&self, theta: f64) -> bool {
        self.theta_lo <= theta && theta <= self.theta_hi
    }
}

/// Outcome of a successful refinement: the factor and the next quarter index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Refinement {
    #[serde(rename = "L")]
    pub l: u64,
    pub m_next: u64,
}

fn check_scale(k: u64, m: u64) -> Result<()> {
    if k == 0 || k % 2 == 0 {
        return domain(format!("K = {k} must be odd and positive"));
    }
    if m >= k {
        return domain(format!("m = {m} must not exceed K - 1 = {}", k - 1));
    }
    Ok(())
}

/// Angles in the quarter period `m` of scale `K` whose `sin²(K·theta)` equal
/// `v_lo` and `v_hi`, normalized so that `theta_lo <= theta_hi`.
///
/// On even quarters `K·theta = m·π/2 + asin√v` grows with `v`; on odd quarters
/// `K·theta = (m+1)·π/2 - asin√v` shrinks, and the endpoints swap.
pub fn solve_bracket(v_lo: f64, v_hi: f64, k: u64, m: u64) -> Result<AngleBracket> {
    check_amplitude(v_lo, "v_lo")?;
    check_amplitude(v_hi, "v_hi")?;
    if v_lo > v_hi {
        return domain(format!("v_lo = {v_lo} exceeds v_hi = {v_hi}"));
    }
    check_scale(k, m)?;
    let lo = v_lo.sqrt().asin();
    let hi = v_hi.sqrt().asin();
    let (phase_lo, phase_hi) = if m % 2 == 0 {
        (lo, hi)
    } else {
        (FRAC_PI_2 - hi, FRAC_PI_2 - lo)
    };
    Ok(AngleBracket::from_phases(k, m, phase_lo, phase_hi))
}

/// Find a factor `L ∈ {7, 5, 3}` (tried in that order) such that the scaled
/// bracket `[L·K·theta_lo, L·K·theta_hi]` fits inside one quarter period
/// `[m'·π/2, (m'+1)·π/2]` with `m' ∈ L·m + {0, …, L-1}`.
///
/// Containment is decided with exact comparisons on the quarter-period offsets.
pub fn refine(bracket: &AngleBracket) -> Option<Refinement> {
    let (lo, hi) = bracket.phases();
    let u_lo = (lo / FRAC_PI_2).clamp(0.0, 1.0);
    let u_hi = (hi / FRAC_PI_2).clamp(0.0, 1.0);
    for l in REFINE_FACTORS {
        let lf = l as f64;
        let j = ((lf * u_lo).floor() as u64).min(l - 1);
        if lf * u_hi <= (j + 1) as f64 {
            let m_next = l.checked_mul(bracket.m).and_then(|v| v.checked_add(j));
            if let Some(m_next) = m_next {
                return Some(Refinement { l, m_next });
            }
        }
    }
    None
}
