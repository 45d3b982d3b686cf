//! Acceptance criteria. Each test prints one `PASS`/`FAIL` line and then
//! asserts, so `cargo test --test acceptance -- --nocapture` gives a summary.

use std::f64::consts::{FRAC_PI_4, PI};
use std::sync::OnceLock;

use aqae_core::bounds::{
    aqae_worst_bound, amplitude_grid, budget_for_shots, expected_m_bound, hit_probability,
    iqae_bound, miqae_bound, budget_exponent_bound, worst_expected_shots, Variant,
};
use aqae_core::confidence::clopper_pearson;
use aqae_core::oracle::GroverCircuit;
use aqae_core::sweep::BenchRow;
use aqae_core::{constants, e, refine, solve_bracket, Algorithm, CiMethod, SweepSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(id: u32, name: &str, pass: bool, detail: &str) {
    let tag = if pass { "PASS" } else { "FAIL" };
    println!("[{tag}] criterion {id:>2} {name}: {detail}");
    assert!(pass, "criterion {id} ({name}) failed: {detail}");
}

fn binom_pmf(p: f64, n: u64, total: u64) -> f64 {
    let mut c = 1.0;
    for k in 0..n {
        c *= (total - k) as f64 / (k + 1) as f64;
    }
    c * p.powi(n as i32) * (1.0 - p).powi((total - n) as i32)
}

fn binom_cdf(p: f64, n: u64, total: u64) -> f64 {
    (0..=n).map(|k| binom_pmf(p, k, total)).sum()
}

fn bisect(mut lo: f64, mut hi: f64, increasing: impl Fn(f64) -> f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if increasing(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn c01_constants() {
    let c = constants();
    let pass = (c.e - 0.06937).abs() <= 5e-5
        && (c.f - 0.19084).abs() <= 5e-5
        && (c.c_alg1 - 0.93314).abs() <= 5e-4
        && (c.c_alg2 - 0.84883).abs() <= 5e-5;
    let detail = format!(
        "E={:.8} F={:.8} C_alg1={:.8} C_alg2={:.8}",
        c.e, c.f, c.c_alg1, c.c_alg2
    );
    report(1, "constants", pass, &detail);
}

#[test]
fn c02_statevector_amplification() {
    let mut worst = 0.0_f64;
    for &theta in &[0.1, 0.3, 0.7, 1.2, FRAC_PI_4] {
        for width in 1..=3 {
            for unitary in [None, Some(width as u64 * 31 + 7)] {
                let mut circuit = GroverCircuit::new(theta, width, unitary).unwrap();
                for k in 0..=25u64 {
                    let expect = ((2 * k + 1) as f64 * theta).sin().powi(2);
                    worst = worst.max((circuit.probability(k).unwrap() - expect).abs());
                }
            }
        }
    }
    report(2, "statevector amplification", worst < 1e-10, &format!("max deviation {worst:.3e}"));
}

#[test]
fn c03_refinability() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut bad_ok = 0;
    for _ in 0..10_000 {
        let a: f64 = rng.random();
        let eps = e(a).unwrap() * (1.0 - rng.random::<f64>());
        if eps <= 0.0 {
            continue;
        }
        let b = solve_bracket((a - eps).max(0.0), (a + eps).min(1.0), 1, 0).unwrap();
        if refine(&b).is_none() {
            bad_ok += 1;
        }
    }
    let mut bad_wide = 0;
    for _ in 0..1_000 {
        let a: f64 = rng.random();
        let eps = 0.26 + rng.random::<f64>();
        let b = solve_bracket((a - eps).max(0.0), (a + eps).min(1.0), 1, 0).unwrap();
        if refine(&b).is_some() {
            bad_wide += 1;
        }
    }
    report(
        3,
        "refinability",
        bad_ok == 0 && bad_wide == 0,
        &format!("{bad_ok}/10000 narrow cases unrefinable, {bad_wide}/1000 wide cases refinable"),
    );
}

const SWEEP_TRIALS: u64 = 500;

fn desk_sweep() -> &'static [BenchRow] {
    static ROWS: OnceLock<Vec<BenchRow>> = OnceLock::new();
    ROWS.get_or_init(|| {
        SweepSpec {
            trials: SWEEP_TRIALS,
            a_true: 0.5,
            epsilons: vec![1e-3],
            alpha: 0.05,
            algorithms: Algorithm::ALL.to_vec(),
            ci_methods: CiMethod::ALL.to_vec(),
            seed: 20_240_601,
            jobs: None,
        }
        .run()
        .unwrap()
    })
}

#[test]
fn c04_coverage() {
    let rows = desk_sweep();
    let mut parts = Vec::new();
    let mut pass = true;
    for alg in Algorithm::ALL {
        for ci in CiMethod::ALL {
            let group: Vec<_> = rows
                .iter()
                .filter(|r| r.algorithm == alg && r.ci_method == ci)
                .collect();
            let cov = group.iter().filter(|r| r.within_eps == 1).count() as f64 / group.len() as f64;
            pass &= group.len() as u64 == SWEEP_TRIALS && cov >= 0.93;
            parts.push(format!("{alg}/{ci}={cov:.3}"));
        }
    }
    report(4, "coverage", pass, &parts.join(" "));
}

#[test]
fn c05_complexity_vs_bounds() {
    let rows: Vec<_> = desk_sweep()
        .iter()
        .filter(|r| r.algorithm == Algorithm::Aqae && r.ci_method == CiMethod::Hoeffding)
        .collect();
    let mean = rows.iter().map(|r| r.m as f64).sum::<f64>() / rows.len() as f64;
    let worst = aqae_worst_bound(1e-3, 0.05).unwrap();
    let under = rows.iter().filter(|r| r.m as f64 <= worst).count() as f64 / rows.len() as f64;
    report(
        5,
        "complexity vs bounds",
        mean < 57_940.0 && under >= 0.95,
        &format!("mean M {mean:.1} (< 57940), {:.1}% of trials <= {worst:.0}", 100.0 * under),
    );
}

#[test]
fn c06_budget_invariant() {
    let rows = desk_sweep();
    let violations = rows.iter().filter(|r| !(r.sum_alpha_i < r.alpha)).count();
    let max = rows.iter().map(|r| r.sum_alpha_i).fold(0.0, f64::max);
    report(
        6,
        "budget invariant",
        violations == 0,
        &format!("{violations} violations in {} trials, max sum {max:.6}", rows.len()),
    );
}

#[test]
fn c07_expected_shots_reproduction() {
    let grid = amplitude_grid(0.02).unwrap();
    let mut failures = Vec::new();
    let mut worst_gap = f64::NEG_INFINITY;
    for n_i in (50..=1400).step_by(50) {
        let (a, r) = worst_expected_shots(budget_for_shots(n_i).unwrap(), &grid).unwrap();
        assert_eq!(r.n_i, n_i);
        let reference = n_i as f64 / 6.0 + 40.0;
        worst_gap = worst_gap.max(r.bound - reference);
        if r.bound > reference {
            failures.push(format!("N_i={n_i}: {:.1} at A={a:.2}", r.bound));
        }
    }
    let detail = if failures.is_empty() {
        format!("all 28 rounds within N_i/6+40 (worst margin {worst_gap:.2})")
    } else {
        format!(
            "{} of 28 rounds exceed N_i/6+40, e.g. {}",
            failures.len(),
            failures[failures.len() - 1]
        )
    };
    report(7, "expected shots per round", failures.is_empty(), &detail);
}

#[test]
fn c08_oracle_equivalences() {
    let mut hit_err = 0.0_f64;
    for &a in &[0.0, 0.3, 0.5, 0.9] {
        for total in 1u64..=20 {
            for &t in &[0.05, 0.1, 0.2] {
                let brute: f64 = (0..=total)
                    .filter(|&n| e(n as f64 / total as f64).unwrap() >= t)
                    .map(|n| binom_pmf(a, n, total))
                    .sum();
                hit_err = hit_err.max((hit_probability(a, total, t).unwrap() - brute).abs());
            }
        }
    }
    let mut cp_err = 0.0_f64;
    for &alpha in &[0.05, 0.2] {
        for total in 1u64..=50 {
            for n in 0..=total {
                let iv = clopper_pearson(n, total, alpha).unwrap();
                let lo = if n == 0 {
                    0.0
                } else {
                    // P(X >= n; p) = α/2, increasing in p.
                    bisect(0.0, 1.0, |p| 1.0 - binom_cdf(p, n - 1, total) - alpha / 2.0)
                };
                let hi = if n == total {
                    1.0
                } else {
                    // P(X <= n; p) = α/2, decreasing in p.
                    bisect(0.0, 1.0, |p| alpha / 2.0 - binom_cdf(p, n, total))
                };
                cp_err = cp_err.max((iv.lo - lo).abs()).max((iv.hi - hi).abs());
            }
        }
    }
    report(
        8,
        "oracle equivalences",
        hit_err < 1e-12 && cp_err < 1e-9,
        &format!("hit probability {hit_err:.2e}, Clopper-Pearson {cp_err:.2e}"),
    );
}

#[test]
fn c09_budget_exponent_optimality() {
    let xs: Vec<f64> = (0..=55).map(|i| 0.25 + 0.05 * i as f64).collect();
    let mut parts = Vec::new();
    let mut pass = true;
    for &eps in &[1e-2, 1e-3] {
        for &alpha in &[0.05, 0.01] {
            for variant in [Variant::Qae, Variant::Aqae] {
                let best = xs
                    .iter()
                    .copied()
                    .min_by(|&x, &y| {
                        let fx = budget_exponent_bound(eps, alpha, x, variant).unwrap().1;
                        let fy = budget_exponent_bound(eps, alpha, y, variant).unwrap().1;
                        fx.total_cmp(&fy)
                    })
                    .unwrap();
                pass &= (best - 1.0).abs() < 1e-9;
                parts.push(format!("{variant:?}({eps},{alpha})->{best:.2}"));
            }
        }
    }
    report(9, "budget exponent optimality", pass, &parts.join(" "));
}

#[test]
fn c10_bound_ordering() {
    let mut parts = Vec::new();
    let mut pass = true;
    for &eps in &[1e-2, 1e-3, 1e-4] {
        let expected = expected_m_bound(eps, 0.05).unwrap();
        let worst = aqae_worst_bound(eps, 0.05).unwrap();
        let iqae = iqae_bound(eps, 0.05).unwrap();
        let miqae = miqae_bound(eps, 0.05).unwrap();
        let ok = expected < worst && worst < iqae.min(miqae);
        pass &= ok;
        parts.push(format!(
            "eps={eps}: {expected:.0} < {worst:.0} < min({iqae:.0}, {miqae:.0}) {}",
            if ok { "holds" } else { "violated" }
        ));
    }
    report(10, "bound ordering", pass, &parts.join("; "));
}

#[test]
fn c00_geometry_sanity() {
    // Not a numbered criterion: the constants behind every check above.
    let c = constants();
    assert!((c.c_alg2 - 8.0 / (3.0 * PI)).abs() < 1e-15);
    assert!((2.0 * c.f - (2.0 * c.e).sqrt().asin()).abs() < 1e-15);
}
