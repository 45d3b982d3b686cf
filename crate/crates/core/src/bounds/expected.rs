//! Expected inner-loop length of the accelerated estimator.
//!
//! With Hoeffding intervals, a round that has taken `J` shots stops as soon as
//! the estimate `Â^J` lies in the feasible set `C(t_J) = {a : e(a) ≥ t_J}`,
//! `t_J = √(ln(2/α_i)/(2J))`. Taking any `J` and charging the full `N_i`
//! shots when `Â^J` is infeasible gives
//! `𝔼(N′) ≤ min_J J + (N_i − J)·P(Â^J ∉ C(t_J))`.

use rayon::prelude::*;
use serde::Serialize;

use crate::angle::{breakpoints, constants, REFINE_FACTORS};
use crate::confidence::hoeffding_shots;
use crate::error::{domain, Result};

/// Gaps narrower than this are closed when merging; they only arise from
/// rounding where two factors' feasible pieces meet exactly.
const MERGE_TOL: f64 = 4.0 * f64::EPSILON;

/// Sorted union of disjoint closed subintervals of [0, 1].
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
#[serde(transparent)]
pub struct IntervalUnion {
    intervals: Vec<[f64; 2]>,
}

impl IntervalUnion {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn full() -> Self {
        Self {
            intervals: vec![[0.0, 1.0]],
        }
    }

    /// Normalize arbitrary closed pieces: clip to [0, 1], sort, merge touching ones.
    pub fn from_pieces<I: IntoIterator<Item = [f64; 2]>>(pieces: I) -> Self {
        let mut v: Vec<[f64; 2]> = pieces
            .into_iter()
            .map(|[lo, hi]| [lo.max(0.0), hi.min(1.0)])
            .filter(|[lo, hi]| lo <= hi)
            .collect();
        v.sort_by(|a, b| a[0].total_cmp(&b[0]));
        let mut out: Vec<[f64; 2]> = Vec::with_capacity(v.len());
        for [lo, hi] in v {
            match out.last_mut() {
                Some(last) if lo <= last[1] + MERGE_TOL => last[1] = last[1].max(hi),
                _ => out.push([lo, hi]),
            }
        }
        Self { intervals: out }
    }

    pub fn intervals(&self) -> &[[f64; 2]] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn contains(&self, a: f64) -> bool {
        self.intervals.iter().any(|&[lo, hi]| lo <= a && a <= hi)
    }

    /// Total length.
    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(|[lo, hi]| hi - lo).sum()
    }

    pub fn union(&self, other: &Self) -> Self {
        Self::from_pieces(self.intervals.iter().chain(&other.intervals).copied())
    }
}

/// `{a ∈ [0, 1] : e_L(a) ≥ t}` as closed pieces.
fn feasible_for_factor(l: u64, t: f64) -> Vec<[f64; 2]> {
    let mut out = Vec::new();
    let mut cur = 0.0_f64;
    for b in breakpoints(l) {
        let (lo, hi) = (b - t, b + t);
        if cur <= lo {
            out.push([cur, lo]);
        }
        cur = cur.max(hi);
    }
    if cur <= 1.0 {
        out.push([cur, 1.0]);
    }
    out
}

/// `{a ∈ [0, 1] : e(a) ≥ t}`, built from the breakpoints of each factor.
pub fn feasible_set(t: f64) -> Result<IntervalUnion> {
    if !(t >= 0.0) {
        return domain(format!("threshold t = {t} must be non-negative"));
    }
    Ok(IntervalUnion::from_pieces(
        REFINE_FACTORS.iter().flat_map(|&l| feasible_for_factor(l, t)),
    ))
}

/// `ln n!` for `n = 0..=n_max`.
fn ln_factorials(n_max: u64) -> Vec<f64> {
    let mut v = Vec::with_capacity(n_max as usize + 1);
    let mut acc = 0.0;
    v.push(0.0);
    for n in 1..=n_max {
        acc += (n as f64).ln();
        v.push(acc);
    }
    v
}

/// Binomial pmf evaluated in log space.
struct Binomial<'a> {
    a: f64,
    ln_a: f64,
    ln_b: f64,
    lnf: &'a [f64],
}

impl<'a> Binomial<'a> {
    fn new(a: f64, lnf: &'a [f64]) -> Self {
        Self {
            a,
            ln_a: a.ln(),
            ln_b: (-a).ln_1p(),
            lnf,
        }
    }

    fn pmf(&self, n: u64, total: u64) -> f64 {
        if self.a == 0.0 {
            return (n == 0) as u8 as f64;
        }
        if self.a == 1.0 {
            return (n == total) as u8 as f64;
        }
        let (ni, ti) = (n as usize, total as usize);
        let ln = self.lnf[ti] - self.lnf[ni] - self.lnf[ti - ni]
            + n as f64 * self.ln_a
            + (total - n) as f64 * self.ln_b;
        ln.exp()
    }
}

fn check_prob(a: f64, shots: u64) -> Result<()> {
    if !(0.0..=1.0).contains(&a) {
        return domain(format!("amplitude {a} is outside [0, 1]"));
    }
    if shots == 0 {
        return domain("N must be at least 1");
    }
    Ok(())
}

/// `P(n/N ∈ feasible_set(t))` for `n ~ Binomial(N, A)`.
pub fn hit_probability(a: f64, shots: u64, t: f64) -> Result<f64> {
    check_prob(a, shots)?;
    let set = feasible_set(t)?;
    let lnf = ln_factorials(shots);
    let binom = Binomial::new(a, &lnf);
    let total: f64 = (0..=shots)
        .filter(|&n| set.contains(n as f64 / shots as f64))
        .map(|n| binom.pmf(n, shots))
        .sum();
    Ok(total.min(1.0))
}

fn miss_with(binom: &Binomial<'_>, shots: u64, set: &IntervalUnion) -> f64 {
    // Sum only over outcomes inside the gaps between feasible pieces.
    let nf = shots as f64;
    let mut gaps = Vec::new();
    let mut cur = 0.0_f64;
    let mut first = true;
    for &[lo, hi] in set.intervals() {
        if first && lo > 0.0 {
            gaps.push((0.0, lo));
        } else if !first {
            gaps.push((cur, lo));
        }
        cur = hi;
        first = false;
    }
    if first {
        gaps.push((0.0, 1.0));
    } else if cur < 1.0 {
        gaps.push((cur, 1.0));
    }
    let mut total = 0.0;
    let mut next = 0u64;
    for (lo, hi) in gaps {
        let start = ((lo * nf).floor() as u64).max(next);
        let end = ((hi * nf).ceil() as u64).min(shots);
        next = end + 1;
        for n in start..=end {
            if !set.contains(n as f64 / nf) {
                total += binom.pmf(n, shots);
            }
        }
    }
    total.min(1.0)
}

/// `P(n/N ∉ feasible_set(t))`, summed directly over the infeasible outcomes.
pub fn miss_probability(a: f64, shots: u64, t: f64) -> Result<f64> {
    check_prob(a, shots)?;
    let set = feasible_set(t)?;
    let lnf = ln_factorials(shots);
    Ok(miss_with(&Binomial::new(a, &lnf), shots, &set))
}

/// Planned shots `N_i` for a round budget.
pub fn shots_for_round(alpha_i: f64) -> Result<u64> {
    hoeffding_shots(alpha_i, constants().e)
}

/// A round budget whose planned shot count is exactly `n_i`.
pub fn budget_for_shots(n_i: u64) -> Result<f64> {
    if n_i == 0 {
        return domain("N_i must be at least 1");
    }
    let e = constants().e;
    Ok(2.0 * (-2.0 * e * e * (n_i as f64 - 0.5)).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpectedShots {
    #[serde(rename = "N_i")]
    pub n_i: u64,
    /// Minimizing `J`.
    #[serde(rename = "J")]
    pub j: u64,
    pub bound: f64,
}

/// The min-over-`J` bound on the expected shots of one accelerated round.
pub fn expected_shots_bound(a: f64, alpha_i: f64) -> Result<ExpectedShots> {
    let n_i = shots_for_round(alpha_i)?;
    check_prob(a, n_i)?;
    let lnf = ln_factorials(n_i);
    let binom = Binomial::new(a, &lnf);
    let log_term = (2.0 / alpha_i).ln();
    let mut best = ExpectedShots {
        n_i,
        j: n_i,
        bound: n_i as f64,
    };
    for j in 1..n_i {
        if j as f64 >= best.bound {
            break;
        }
        let t = (log_term / (2.0 * j as f64)).sqrt();
        let set = feasible_set(t)?;
        let v = j as f64 + (n_i - j) as f64 * miss_with(&binom, j, &set);
        if v < best.bound {
            best = ExpectedShots { n_i, j, bound: v };
        }
    }
    Ok(best)
}

/// Amplitudes `0, step, 2·step, …, 1`.
pub fn amplitude_grid(step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step <= 1.0) {
        return domain(format!("grid step {step} is outside (0, 1]"));
    }
    let count = (1.0 / step).round() as u64;
    if ((count as f64) * step - 1.0).abs() > 1e-9 {
        return domain(format!("grid step {step} does not divide [0, 1]"));
    }
    Ok((0..=count).map(|i| i as f64 / count as f64).collect())
}

/// Largest bound over the amplitude grid for a round with budget `alpha_i`;
/// returns the worst amplitude (the first one on ties) and its bound.
pub fn worst_expected_shots(alpha_i: f64, grid: &[f64]) -> Result<(f64, ExpectedShots)> {
    let results = grid
        .par_iter()
        .map(|&a| expected_shots_bound(a, alpha_i).map(|r| (a, r)))
        .collect::<Result<Vec<_>>>()?;
    let mut worst = *results.first().ok_or_else(|| crate::Error::Domain("empty amplitude grid".into()))?;
    for &(a, r) in &results[1..] {
        if r.bound > worst.1.bound {
            worst = (a, r);
        }
    }
    Ok(worst)
}
