//! The fixed-shot (QAE) and accelerated (AQAE) estimators.
//!
//! Both keep a bracket `[theta_lo, theta_hi]` measured at Grover scale `K`
//! inside the quarter period `m`, and multiply `K` by a refinement factor
//! `L ∈ {3, 5, 7}` each round until the bracket is at most `2ε` wide. Round
//! `i` is allotted the failure budget `α_i = C·α·ε·K_i`.

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::angle::{constants, refine, solve_bracket, AngleBracket, Refinement};
use crate::confidence::{
    clopper_pearson, hoeffding_shots, normal_quantile, wilson_with_z, AmplitudeInterval, CiMethod,
};
use crate::error::{domain, Error, Result};
use crate::fmt::ser_f64;
use crate::oracle::OracleModel;

/// Largest accepted target accuracy.
pub const MAX_EPSILON: f64 = 0.1;
pub const DEFAULT_MAX_INNER_SHOTS_FACTOR: u64 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    /// Fixed number of shots per round.
    Qae,
    /// One shot at a time until the round's interval is refinable.
    Aqae,
}

impl Algorithm {
    pub const ALL: [Algorithm; 2] = [Algorithm::Qae, Algorithm::Aqae];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Qae => "qae",
            Algorithm::Aqae => "aqae",
        }
    }

    /// Round-budget scale `C`.
    pub fn budget_scale(self) -> f64 {
        let c = constants();
        match self {
            Algorithm::Qae => c.c_alg1,
            Algorithm::Aqae => c.c_alg2,
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "qae" => Ok(Algorithm::Qae),
            "aqae" => Ok(Algorithm::Aqae),
            other => domain(format!("unknown algorithm '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimatorConfig {
    #[serde(serialize_with = "ser_f64")]
    pub epsilon: f64,
    #[serde(serialize_with = "ser_f64")]
    pub alpha: f64,
    pub algorithm: Algorithm,
    pub ci_method: CiMethod,
    pub seed: u64,
    pub max_rounds: u64,
    pub max_inner_shots_factor: u64,
}

/// `⌈log₃(π/(4ε))⌉`, the most refinements a run can need.
pub fn round_horizon(epsilon: f64) -> u64 {
    let r = (std::f64::consts::PI / (4.0 * epsilon)).ln() / 3f64.ln();
    r.ceil().max(0.0) as u64
}

impl EstimatorConfig {
    /// Configuration with default guards (`max_rounds = ⌈log₃(π/(4ε))⌉ + 8`).
    pub fn new(
        epsilon: f64,
        alpha: f64,
        algorithm: Algorithm,
        ci_method: CiMethod,
        seed: u64,
    ) -> Result<Self> {
        let cfg = Self {
            epsilon,
            alpha,
            algorithm,
            ci_method,
            seed,
            max_rounds: if epsilon > 0.0 { round_horizon(epsilon) + 8 } else { 0 },
            max_inner_shots_factor: DEFAULT_MAX_INNER_SHOTS_FACTOR,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon <= MAX_EPSILON) {
            return domain(format!(
                "epsilon = {} is outside (0, {MAX_EPSILON}]",
                self.epsilon
            ));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return domain(format!("alpha = {} is outside (0, 1)", self.alpha));
        }
        let need = round_horizon(self.epsilon) + 2;
        if self.max_rounds < need {
            return domain(format!("max_rounds = {} is below {need}", self.max_rounds));
        }
        if self.max_inner_shots_factor == 0 {
            return domain("max_inner_shots_factor must be positive");
        }
        Ok(())
    }
}

/// One round of a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundRecord {
    pub i: u64,
    #[serde(rename = "K_i")]
    pub k: u64,
    #[serde(rename = "m_i")]
    pub m: u64,
    #[serde(serialize_with = "ser_f64")]
    pub alpha_i: f64,
    /// Planned shots `⌈ln(2/α_i)/(2E²)⌉`.
    #[serde(rename = "N_i")]
    pub planned_shots: u64,
    /// Shots behind the recorded estimate.
    #[serde(rename = "N_prime_i")]
    pub used_shots: u64,
    #[serde(rename = "n_i")]
    pub hits: u64,
    #[serde(rename = "A_hat_i", serialize_with = "ser_f64")]
    pub a_hat: f64,
    /// Half-width of the amplitude interval behind the bracket.
    #[serde(rename = "E_i", serialize_with = "ser_f64")]
    pub half_width: f64,
    #[serde(serialize_with = "ser_f64")]
    pub theta_lo: f64,
    #[serde(serialize_with = "ser_f64")]
    pub theta_hi: f64,
    /// Refinement factor applied after this round; absent on the final round.
    #[serde(rename = "L_i")]
    pub l: Option<u64>,
    /// Fixed-shot rounds repeated because the interval was not refinable.
    pub reruns: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimationResult {
    #[serde(serialize_with = "ser_f64")]
    pub a_hat: f64,
    #[serde(serialize_with = "ser_bracket")]
    pub final_bracket: AngleBracket,
    #[serde(rename = "M")]
    pub m: u64,
    pub shots: u64,
    pub rounds: u64,
    pub trace: Vec<RoundRecord>,
    #[serde(serialize_with = "ser_f64")]
    pub sum_alpha_i: f64,
}

fn ser_bracket<S: Serializer>(b: &AngleBracket, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeStruct;
    let mut st = s.serialize_struct("AngleBracket", 4)?;
    st.serialize_field("K", &b.k)?;
    st.serialize_field("m", &b.m)?;
    st.serialize_field("theta_lo", &crate::fmt::Sig::<17>(b.theta_lo))?;
    st.serialize_field("theta_hi", &crate::fmt::Sig::<17>(b.theta_hi))?;
    st.end()
}

impl EstimationResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("estimation results always serialize")
    }
}

/// Solve the bracket for `interval` at scale `(K, m)` and try to refine it.
pub fn post_round_update(
    k: u64,
    m: u64,
    interval: &AmplitudeInterval,
) -> Result<(AngleBracket, Option<Refinement>)> {
    let bracket = solve_bracket(interval.lo, interval.hi, k, m)?;
    let refinement = refine(&bracket);
    Ok((bracket, refinement))
}

/// Per-round state shared by both estimators.
struct Round {
    method: CiMethod,
    alpha_i: f64,
    planned: u64,
    log_term: f64,
    big_e: f64,
    z: f64,
}

impl Round {
    fn new(method: CiMethod, alpha_i: f64, big_e: f64) -> Result<Self> {
        let planned = hoeffding_shots(alpha_i, big_e)?;
        let z = match method {
            CiMethod::Wilson => normal_quantile(alpha_i / 2.0)?,
            _ => 0.0,
        };
        Ok(Self {
            method,
            alpha_i,
            planned,
            log_term: (2.0 / alpha_i).ln(),
            big_e,
            z,
        })
    }

    /// Interval after `shots` shots with `hits` successes. Once the planned
    /// shot count is reached, non-Hoeffding intervals are intersected with
    /// `Â ± E` so that the round is guaranteed to be refinable.
    fn interval(&self, hits: u64, shots: u64) -> Result<(AmplitudeInterval, f64)> {
        let a_hat = hits as f64 / shots as f64;
        let reached = shots >= self.planned;
        let iv = match self.method {
            CiMethod::Hoeffding => {
                let half = if reached {
                    self.big_e
                } else {
                    (self.log_term / (2.0 * shots as f64)).sqrt()
                };
                return Ok((AmplitudeInterval::symmetric(a_hat, half), half));
            }
            CiMethod::ClopperPearson => clopper_pearson(hits, shots, self.alpha_i)?,
            CiMethod::Wilson => wilson_with_z(hits, shots, self.z),
        };
        let iv = if reached {
            iv.intersect(&AmplitudeInterval::symmetric(a_hat, self.big_e))
                .ok_or_else(|| Error::Diagnostic("confidence interval excludes the estimate".into()))?
        } else {
            iv
        };
        Ok((iv, 0.5 * iv.width()))
    }
}

struct Runner<'a> {
    config: &'a EstimatorConfig,
    oracle: &'a mut OracleModel,
    trace: Vec<RoundRecord>,
    sum_alpha: f64,
}

impl Runner<'_> {
    fn budget(&self, k: u64) -> Result<f64> {
        let c = self.config.algorithm.budget_scale();
        let alpha_i = c * self.config.alpha * self.config.epsilon * k as f64;
        if !(alpha_i > 0.0 && alpha_i < 1.0) {
            return Err(Error::Diagnostic(format!("round budget {alpha_i} left (0, 1)")));
        }
        Ok(alpha_i)
    }

    fn finish(self, bracket: AngleBracket) -> EstimationResult {
        let ledger = self.oracle.ledger();
        EstimationResult {
            a_hat: bracket.amplitude_estimate(),
            final_bracket: bracket,
            m: ledger.q_applications,
            shots: ledger.shots,
            rounds: self.trace.len() as u64,
            trace: self.trace,
            sum_alpha_i: self.sum_alpha,
        }
    }

    fn run(mut self) -> Result<EstimationResult> {
        let big_e = constants().e;
        let two_eps = 2.0 * self.config.epsilon;
        let (mut k, mut m) = (1u64, 0u64);
        for i in 0..self.config.max_rounds {
            let alpha_i = self.budget(k)?;
            let round = Round::new(self.config.ci_method, alpha_i, big_e)?;
            let (record, bracket, refinement) = match self.config.algorithm {
                Algorithm::Qae => self.fixed_round(i, k, m, &round, two_eps)?,
                Algorithm::Aqae => self.incremental_round(i, k, m, &round)?,
            };
            self.sum_alpha += alpha_i;
            let done = bracket.width() <= two_eps;
            let mut record = record;
            if done {
                record.l = None;
                self.trace.push(record);
                return Ok(self.finish(bracket));
            }
            let r = refinement.expect("non-final rounds always refine");
            self.trace.push(record);
            k = k
                .checked_mul(r.l)
                .ok_or_else(|| Error::Diagnostic("Grover scale overflow".into()))?;
            m = r.m_next;
        }
        Err(Error::Diagnostic(format!(
            "no convergence within {} rounds",
            self.config.max_rounds
        )))
    }

    /// All planned shots at once; repeated with fresh shots if the bracket is
    /// neither final nor refinable.
    fn fixed_round(
        &mut self,
        i: u64,
        k: u64,
        m: u64,
        round: &Round,
        two_eps: f64,
    ) -> Result<(RoundRecord, AngleBracket, Option<Refinement>)> {
        let power = (k - 1) / 2;
        let shots = round.planned;
        for reruns in 0..self.config.max_inner_shots_factor {
            let hits = self.oracle.quant_circ(power, shots)?;
            let (iv, half) = round.interval(hits, shots)?;
            let (bracket, refinement) = post_round_update(k, m, &iv)?;
            if bracket.width() <= two_eps || refinement.is_some() {
                let record = record(i, k, m, round, shots, hits, half, &bracket, refinement, reruns);
                return Ok((record, bracket, refinement));
            }
        }
        Err(Error::Diagnostic(format!(
            "round {i}: no refinable interval in {} attempts",
            self.config.max_inner_shots_factor
        )))
    }

    /// One shot at a time until the interval is refinable.
    fn incremental_round(
        &mut self,
        i: u64,
        k: u64,
        m: u64,
        round: &Round,
    ) -> Result<(RoundRecord, AngleBracket, Option<Refinement>)> {
        let power = (k - 1) / 2;
        let limit = round.planned.saturating_mul(self.config.max_inner_shots_factor);
        let mut hits = 0;
        for shots in 1..=limit {
            hits += self.oracle.quant_circ(power, 1)?;
            let (iv, half) = round.interval(hits, shots)?;
            let (bracket, refinement) = post_round_update(k, m, &iv)?;
            if refinement.is_some() {
                let record = record(i, k, m, round, shots, hits, half, &bracket, refinement, 0);
                return Ok((record, bracket, refinement));
            }
        }
        Err(Error::Diagnostic(format!(
            "round {i}: inner loop exceeded {limit} shots"
        )))
    }
}

#[allow(clippy::too_many_arguments)]
fn record(
    i: u64,
    k: u64,
    m: u64,
    round: &Round,
    shots: u64,
    hits: u64,
    half: f64,
    bracket: &AngleBracket,
    refinement: Option<Refinement>,
    reruns: u64,
) -> RoundRecord {
    RoundRecord {
        i,
        k,
        m,
        alpha_i: round.alpha_i,
        planned_shots: round.planned,
        used_shots: shots,
        hits,
        a_hat: hits as f64 / shots as f64,
        half_width: half,
        theta_lo: bracket.theta_lo,
        theta_hi: bracket.theta_hi,
        l: refinement.map(|r| r.l),
        reruns,
    }
}

fn start<'a>(config: &'a EstimatorConfig, oracle: &'a mut OracleModel) -> Result<Runner<'a>> {
    config.validate()?;
    if oracle.ledger().shots != 0 {
        return domain("oracle ledger must be fresh");
    }
    Ok(Runner {
        config,
        oracle,
        trace: Vec::new(),
        sum_alpha: 0.0,
    })
}

/// Fixed-shot estimator, using `config.ci_method` for the round intervals.
pub fn run_qae(config: &EstimatorConfig, oracle: &mut OracleModel) -> Result<EstimationResult> {
    let mut cfg = *config;
    cfg.algorithm = Algorithm::Qae;
    start(&cfg, oracle)?.run()
}

/// Accelerated estimator, using `config.ci_method` for the round intervals.
pub fn run_aqae(config: &EstimatorConfig, oracle: &mut OracleModel) -> Result<EstimationResult> {
    let mut cfg = *config;
    cfg.algorithm = Algorithm::Aqae;
    start(&cfg, oracle)?.run()
}

/// Dispatch on `config.algorithm`.
pub fn run(config: &EstimatorConfig, oracle: &mut OracleModel) -> Result<EstimationResult> {
    match config.algorithm {
        Algorithm::Qae => run_qae(config, oracle),
        Algorithm::Aqae => run_aqae(config, oracle),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angle::sin2;
    use crate::confidence::hoeffding_halfwidth;
    use crate::oracle::Backend;

    fn cfg(eps: f64, alg: Algorithm, ci: CiMethod) -> EstimatorConfig {
        EstimatorConfig::new(eps, 0.05, alg, ci, 1).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(EstimatorConfig::new(0.5, 0.05, Algorithm::Qae, CiMethod::Hoeffding, 0).is_err());
        assert!(EstimatorConfig::new(0.0, 0.05, Algorithm::Qae, CiMethod::Hoeffding, 0).is_err());
        assert!(EstimatorConfig::new(0.01, 1.0, Algorithm::Qae, CiMethod::Hoeffding, 0).is_err());
        assert!(EstimatorConfig::new(0.01, 0.0, Algorithm::Qae, CiMethod::Hoeffding, 0).is_err());
        let mut c = cfg(1e-3, Algorithm::Aqae, CiMethod::Hoeffding);
        assert_eq!(c.max_rounds, round_horizon(1e-3) + 8);
        c.max_rounds = round_horizon(1e-3) + 1;
        assert!(c.validate().is_err());
    }

    #[test]
    fn post_round_update_examples() {
        let (b, r) = post_round_update(1, 0, &AmplitudeInterval::new(0.0, 1.0).unwrap()).unwrap();
        assert_eq!((b.theta_lo, b.theta_hi), (0.0, std::f64::consts::FRAC_PI_2));
        assert!(r.is_none());
        let (_, r) = post_round_update(1, 0, &AmplitudeInterval::new(0.45, 0.55).unwrap()).unwrap();
        let r = r.unwrap();
        assert_eq!((r.l, r.m_next), (7, 3));
        let big_e = constants().e;
        for i in 0..=1000 {
            let a = i as f64 / 1000.0;
            let iv = AmplitudeInterval::symmetric(a, big_e);
            assert!(post_round_update(1, 0, &iv).unwrap().1.is_some(), "a={a}");
        }
    }

    /// Replays the fixed-shot estimator for an oracle that never fires.
    fn replay_zero_qae(eps: f64, alpha: f64) -> (Vec<(u64, u64)>, AngleBracket, u64) {
        let c = constants();
        let (mut k, mut m, mut q) = (1u64, 0u64, 0u64);
        let mut ks = Vec::new();
        loop {
            let alpha_i = c.c_alg1 * alpha * eps * k as f64;
            let n = ((2.0 / alpha_i).ln() / (2.0 * c.e * c.e)).ceil() as u64;
            q += (k - 1) / 2 * n;
            ks.push((k, n));
            // Â = 0: sin²(K·θ) ∈ [0, E] inside quarter m = 0.
            let hi = c.e.sqrt().asin() / k as f64;
            let b = solve_bracket(0.0, c.e, k, m).unwrap();
            assert!((b.theta_hi - hi).abs() < 1e-15);
            if hi <= 2.0 * eps {
                return (ks, b, q);
            }
            let r = refine(&b).unwrap();
            k *= r.l;
            m = r.m_next;
        }
    }

    #[test]
    fn qae_zero_amplitude_replays_analytically() {
        let config = cfg(0.01, Algorithm::Qae, CiMethod::Hoeffding);
        let mut oracle = OracleModel::new(0.0, Backend::Bernoulli, 3, 0).unwrap();
        let res = run_qae(&config, &mut oracle).unwrap();
        let (ks, bracket, q) = replay_zero_qae(0.01, 0.05);
        assert_eq!(res.trace.iter().map(|r| (r.k, r.planned_shots)).collect::<Vec<_>>(), ks);
        assert_eq!(res.final_bracket, bracket);
        assert_eq!(res.m, q);
        assert!(res.a_hat.abs() <= 0.01);
        assert!(res.trace.iter().all(|r| r.hits == 0 && r.m == 0));
    }

    #[test]
    fn qae_unit_amplitude_mirrors_zero() {
        let config = cfg(0.01, Algorithm::Qae, CiMethod::Hoeffding);
        let mut oracle =
            OracleModel::new(std::f64::consts::FRAC_PI_2, Backend::Bernoulli, 3, 0).unwrap();
        let res = run_qae(&config, &mut oracle).unwrap();
        assert!((res.a_hat - 1.0).abs() <= 0.01);
        let (ks, _, q) = replay_zero_qae(0.01, 0.05);
        assert_eq!(res.trace.iter().map(|r| (r.k, r.planned_shots)).collect::<Vec<_>>(), ks);
        assert_eq!(res.m, q);
    }

    #[test]
    fn aqae_zero_amplitude_stops_early() {
        let config = cfg(0.01, Algorithm::Aqae, CiMethod::Hoeffding);
        let mut oracle = OracleModel::new(0.0, Backend::Bernoulli, 3, 0).unwrap();
        let res = run_aqae(&config, &mut oracle).unwrap();
        assert!(res.a_hat.abs() <= 0.01);
        assert_eq!(res.final_bracket.theta_lo, 0.0);
        for r in &res.trace {
            assert!(r.used_shots <= r.planned_shots);
            // The inner loop stops at the first N whose half-width clears a breakpoint.
            let l = r.l.unwrap_or(3);
            let first_ok = |n: u64| {
                let h = hoeffding_halfwidth(n, r.alpha_i).unwrap().min(1.0);
                l as f64 * h.sqrt().asin() <= std::f64::consts::FRAC_PI_2
            };
            if r.l.is_some() {
                assert!(first_ok(r.used_shots));
                assert!(r.used_shots == 1 || !first_ok(r.used_shots - 1) || l != 3);
            }
        }
        let qres = run_qae(&config, &mut OracleModel::new(0.0, Backend::Bernoulli, 3, 0).unwrap()).unwrap();
        assert!(res.m < qres.m);
    }

    #[test]
    fn traces_are_consistent() {
        for alg in Algorithm::ALL {
            for ci in CiMethod::ALL {
                for seed in 0..5u64 {
                    let config = EstimatorConfig::new(2e-3, 0.05, alg, ci, seed).unwrap();
                    let theta = 0.2 + 0.25 * seed as f64;
                    let mut oracle = OracleModel::new(theta, Backend::Bernoulli, seed, 0).unwrap();
                    let res = run(&config, &mut oracle).unwrap();
                    let c = alg.budget_scale();
                    let mut m_sum = 0;
                    let mut alpha_sum = 0.0;
                    for (idx, r) in res.trace.iter().enumerate() {
                        assert_eq!(r.i, idx as u64);
                        assert_eq!(r.k % 2, 1);
                        assert!(r.m < r.k);
                        assert_eq!(r.alpha_i, c * 0.05 * 2e-3 * r.k as f64);
                        if alg == Algorithm::Qae {
                            assert_eq!(r.used_shots, r.planned_shots);
                        }
                        m_sum += (r.k - 1) / 2 * r.used_shots * (r.reruns + 1);
                        alpha_sum += r.alpha_i;
                        if let Some(next) = res.trace.get(idx + 1) {
                            assert_eq!(next.k, r.k * r.l.unwrap());
                        } else {
                            assert!(r.l.is_none());
                        }
                    }
                    assert_eq!(res.m, m_sum);
                    assert_eq!(res.sum_alpha_i, alpha_sum);
                    assert!(res.sum_alpha_i < 0.05);
                    assert!(res.final_bracket.width() <= 2.0 * config.epsilon);
                    assert_eq!(res.a_hat, sin2(res.final_bracket.midpoint()));
                }
            }
        }
    }

    #[test]
    fn runs_are_deterministic() {
        let config = cfg(1e-3, Algorithm::Aqae, CiMethod::Wilson);
        let go = || {
            let mut oracle = OracleModel::bernoulli_from_amplitude(0.5, 7).unwrap();
            run(&config, &mut oracle).unwrap().to_json()
        };
        assert_eq!(go(), go());
    }

    #[test]
    fn used_ledger_is_rejected() {
        let config = cfg(1e-2, Algorithm::Qae, CiMethod::Hoeffding);
        let mut oracle = OracleModel::bernoulli_from_amplitude(0.5, 7).unwrap();
        oracle.quant_circ(0, 1).unwrap();
        assert!(run(&config, &mut oracle).is_err());
    }

    #[test]
    fn statevector_backend_runs() {
        let theta = 0.9;
        let circuit = crate::oracle::GroverCircuit::new(theta, 1, None).unwrap();
        let config = cfg(1e-2, Algorithm::Aqae, CiMethod::Hoeffding);
        let mut oracle = OracleModel::new(theta, Backend::Statevector(circuit), 2, 0).unwrap();
        let res = run(&config, &mut oracle).unwrap();
        assert!(res.final_bracket.width() <= 0.02);
    }
}
