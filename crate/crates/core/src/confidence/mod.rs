//! Confidence intervals for a binomial success probability.

mod special;

pub use special::{beta_inc, beta_quantile, ln_gamma, normal_quantile, normal_sf};

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{domain, Error, Result};

/// Interval construction used in each round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CiMethod {
    Hoeffding,
    ClopperPearson,
    Wilson,
}

impl CiMethod {
    pub const ALL: [CiMethod; 3] = [CiMethod::Hoeffding, CiMethod::ClopperPearson, CiMethod::Wilson];

    pub fn name(self) -> &'static str {
        match self {
            CiMethod::Hoeffding => "hoeffding",
            CiMethod::ClopperPearson => "clopperpearson",
            CiMethod::Wilson => "wilson",
        }
    }
}

impl fmt::Display for CiMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CiMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hoeffding" | "h" => Ok(CiMethod::Hoeffding),
            "clopperpearson" | "clopper-pearson" | "cp" => Ok(CiMethod::ClopperPearson),
            "wilson" | "w" => Ok(CiMethod::Wilson),
            other => domain(format!("unknown confidence interval method '{other}'")),
        }
    }
}

/// Closed amplitude interval `[lo, hi] ⊆ [0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AmplitudeInterval {
    pub lo: f64,
    pub hi: f64,
}

impl AmplitudeInterval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(0.0 <= lo && lo <= hi && hi <= 1.0) {
            return domain(format!("[{lo}, {hi}] is not an interval inside [0, 1]"));
        }
        Ok(Self { lo, hi })
    }

    /// `[center - half, center + half]` clipped to [0, 1].
    pub fn symmetric(center: f64, half: f64) -> Self {
        Self {
            lo: (center - half).max(0.0),
            hi: (center + half).min(1.0),
        }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, p: f64) -> bool {
        self.lo <= p && p <= self.hi
    }

    /// Intersection; `None` when disjoint.
    pub fn intersect(&self, other: &Self) -> Option<Self> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(Self { lo, hi })
    }
}

fn check_budget(alpha_i: f64, upper: f64) -> Result<()> {
    if !(alpha_i > 0.0 && alpha_i < upper) {
        return domain(format!("round budget {alpha_i} is outside (0, {upper})"));
    }
    Ok(())
}

fn check_counts(n: u64, shots: u64) -> Result<()> {
    if shots == 0 || n > shots {
        return domain(format!("need 0 <= n <= N with N >= 1, got n={n}, N={shots}"));
    }
    Ok(())
}

/// Hoeffding half-width `√(ln(2/α_i) / (2N))`.
pub fn hoeffding_halfwidth(shots: u64, alpha_i: f64) -> Result<f64> {
    check_budget(alpha_i, 2.0)?;
    if shots == 0 {
        return domain("N must be at least 1");
    }
    Ok(((2.0 / alpha_i).ln() / (2.0 * shots as f64)).sqrt())
}

/// Smallest `N` with `2·exp(-2·N·E²) <= α_i`, i.e. `⌈ln(2/α_i) / (2E²)⌉`.
pub fn hoeffding_shots(alpha_i: f64, half_width: f64) -> Result<u64> {
    check_budget(alpha_i, 2.0)?;
    if !(half_width > 0.0) {
        return domain(format!("half-width {half_width} must be positive"));
    }
    let n = ((2.0 / alpha_i).ln() / (2.0 * half_width * half_width)).ceil();
    Ok((n as u64).max(1))
}

/// Exact (Clopper–Pearson) interval from Beta quantiles.
pub fn clopper_pearson(n: u64, shots: u64, alpha_i: f64) -> Result<AmplitudeInterval> {
    check_counts(n, shots)?;
    check_budget(alpha_i, 1.0)?;
    let (nf, total) = (n as f64, shots as f64);
    let lo = if n == 0 {
        0.0
    } else {
        beta_quantile(alpha_i / 2.0, nf, total - nf + 1.0)?
    };
    let hi = if n == shots {
        1.0
    } else {
        beta_quantile(1.0 - alpha_i / 2.0, nf + 1.0, total - nf)?
    };
    Ok(AmplitudeInterval { lo, hi: hi.max(lo) })
}

/// Wilson score interval with `z = z_{α_i/2}`.
pub fn wilson(n: u64, shots: u64, alpha_i: f64) -> Result<AmplitudeInterval> {
    check_counts(n, shots)?;
    check_budget(alpha_i, 1.0)?;
    let z = normal_quantile(alpha_i / 2.0)?;
    Ok(wilson_with_z(n, shots, z))
}

pub(crate) fn wilson_with_z(n: u64, shots: u64, z: f64) -> AmplitudeInterval {
    let total = shots as f64;
    let p = n as f64 / total;
    let z2 = z * z;
    let center = p + z2 / (2.0 * total);
    let spread = z * (p * (1.0 - p) / total + z2 / (4.0 * total * total)).sqrt();
    let denom = 1.0 + z2 / total;
    let lo = ((center - spread) / denom).clamp(0.0, 1.0);
    let hi = ((center + spread) / denom).clamp(0.0, 1.0);
    AmplitudeInterval { lo, hi: hi.max(lo) }
}
