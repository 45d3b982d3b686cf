//! Seeded benchmark sweeps over algorithms, interval methods and accuracies.
//!
//! Trial `t` of every configuration draws from PRNG stream `t` of the base
//! seed, so paired configurations see the same random numbers and results do
//! not depend on how many worker threads ran them.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::Serialize;

use crate::confidence::CiMethod;
use crate::error::{domain, Error, Result};
use crate::estimator::{run, Algorithm, EstimationResult, EstimatorConfig};
use crate::fmt::{format_sig, FULL_DIGITS};
use crate::oracle::{theta_of, Backend, OracleModel};

/// Digits used for summary statistics.
pub const SUMMARY_DIGITS: usize = 6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub algorithm: Algorithm,
    pub ci_method: CiMethod,
    pub a_true: f64,
    pub epsilon: f64,
    pub alpha: f64,
    pub trial: u64,
    pub seed: u64,
    pub a_hat: f64,
    pub abs_error: f64,
    #[serde(rename = "M")]
    pub m: u64,
    pub shots: u64,
    pub rounds: u64,
    pub within_eps: u8,
    /// `Σα_i` of the trace; kept for budget checks, not written to CSV.
    #[serde(skip)]
    pub sum_alpha_i: f64,
}

impl BenchRow {
    pub const HEADER: &'static str =
        "algorithm,ci_method,a_true,epsilon,alpha,trial,seed,a_hat,abs_error,M,shots,rounds,within_eps";

    fn from_result(spec: &SweepSpec, config: &EstimatorConfig, trial: u64, r: &EstimationResult) -> Self {
        let abs_error = (r.a_hat - spec.a_true).abs();
        Self {
            algorithm: config.algorithm,
            ci_method: config.ci_method,
            a_true: spec.a_true,
            epsilon: config.epsilon,
            alpha: config.alpha,
            trial,
            seed: spec.seed,
            a_hat: r.a_hat,
            abs_error,
            m: r.m,
            shots: r.shots,
            rounds: r.rounds,
            within_eps: (abs_error <= config.epsilon) as u8,
            sum_alpha_i: r.sum_alpha_i,
        }
    }

    pub fn to_csv_line(&self) -> String {
        let g = |x: f64| format_sig(x, FULL_DIGITS);
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.algorithm,
            self.ci_method,
            g(self.a_true),
            g(self.epsilon),
            g(self.alpha),
            self.trial,
            self.seed,
            g(self.a_hat),
            g(self.abs_error),
            self.m,
            self.shots,
            self.rounds,
            self.within_eps
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSummary {
    pub epsilon: f64,
    pub alpha: f64,
    pub a_true: f64,
    pub algorithm: Algorithm,
    pub ci_method: CiMethod,
    pub trials: u64,
    pub mean_m: f64,
    pub q25_m: f64,
    pub q75_m: f64,
    pub coverage: f64,
}

impl SweepSummary {
    pub const HEADER: &'static str =
        "epsilon,alpha,a_true,algorithm,ci_method,trials,mean_M,q25_M,q75_M,coverage";

    pub fn to_csv_line(&self) -> String {
        let g = |x: f64| format_sig(x, SUMMARY_DIGITS);
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            g(self.epsilon),
            g(self.alpha),
            g(self.a_true),
            self.algorithm,
            self.ci_method,
            self.trials,
            g(self.mean_m),
            g(self.q25_m),
            g(self.q75_m),
            g(self.coverage)
        )
    }
}

/// Linear-interpolation quantile of sorted data (the "type 7" rule).
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty data");
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub trials: u64,
    pub a_true: f64,
    pub epsilons: Vec<f64>,
    pub alpha: f64,
    pub algorithms: Vec<Algorithm>,
    pub ci_methods: Vec<CiMethod>,
    pub seed: u64,
    /// Worker threads; `None` uses the global pool.
    pub jobs: Option<usize>,
}

impl SweepSpec {
    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return domain("trials must be at least 1");
        }
        if self.epsilons.is_empty() || self.algorithms.is_empty() || self.ci_methods.is_empty() {
            return domain("epsilon, algorithm and interval lists must be non-empty");
        }
        if self.jobs == Some(0) {
            return domain("jobs must be at least 1");
        }
        theta_of(self.a_true)?;
        Ok(())
    }

    fn configs(&self) -> Result<Vec<EstimatorConfig>> {
        let mut out = Vec::new();
        for &eps in &self.epsilons {
            for &alg in &self.algorithms {
                for &ci in &self.ci_methods {
                    out.push(EstimatorConfig::new(eps, self.alpha, alg, ci, self.seed)?);
                }
            }
        }
        Ok(out)
    }

    /// Run every trial; rows come back sorted by (epsilon, trial, algorithm, ci_method).
    pub fn run(&self) -> Result<Vec<BenchRow>> {
        self.validate()?;
        let configs = self.configs()?;
        let theta = theta_of(self.a_true)?;
        let jobs: Vec<(usize, u64)> = (0..configs.len())
            .flat_map(|c| (0..self.trials).map(move |t| (c, t)))
            .collect();
        let work = || {
            jobs.par_iter()
                .map(|&(c, trial)| {
                    let config = &configs[c];
                    let mut oracle = OracleModel::new(theta, Backend::Bernoulli, self.seed, trial)?;
                    let r = run(config, &mut oracle)?;
                    Ok(BenchRow::from_result(self, config, trial, &r))
                })
                .collect::<Result<Vec<_>>>()
        };
        let mut rows = match self.jobs {
            Some(n) => rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Diagnostic(format!("thread pool: {e}")))?
                .install(work)?,
            None => work()?,
        };
        rows.sort_by(|a, b| {
            a.epsilon
                .total_cmp(&b.epsilon)
                .then(a.trial.cmp(&b.trial))
                .then(a.algorithm.cmp(&b.algorithm))
                .then(a.ci_method.cmp(&b.ci_method))
        });
        Ok(rows)
    }
}

/// One summary per (epsilon, algorithm, ci_method), in that order.
pub fn summarize(rows: &[BenchRow]) -> Vec<SweepSummary> {
    let mut keys: Vec<(f64, Algorithm, CiMethod)> = rows
        .iter()
        .map(|r| (r.epsilon, r.algorithm, r.ci_method))
        .collect();
    keys.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    keys.dedup();
    keys.into_iter()
        .map(|(eps, alg, ci)| {
            let group: Vec<&BenchRow> = rows
                .iter()
                .filter(|r| r.epsilon == eps && r.algorithm == alg && r.ci_method == ci)
                .collect();
            let mut ms: Vec<f64> = group.iter().map(|r| r.m as f64).collect();
            ms.sort_by(f64::total_cmp);
            let n = group.len() as f64;
            SweepSummary {
                epsilon: eps,
                alpha: group[0].alpha,
                a_true: group[0].a_true,
                algorithm: alg,
                ci_method: ci,
                trials: group.len() as u64,
                mean_m: ms.iter().sum::<f64>() / n,
                q25_m: quantile_sorted(&ms, 0.25),
                q75_m: quantile_sorted(&ms, 0.75),
                coverage: group.iter().map(|r| r.within_eps as f64).sum::<f64>() / n,
            }
        })
        .collect()
}

pub fn write_rows_csv<W: Write>(rows: &[BenchRow], mut out: W) -> io::Result<()> {
    writeln!(out, "{}", BenchRow::HEADER)?;
    for r in rows {
        writeln!(out, "{}", r.to_csv_line())?;
    }
    Ok(())
}

pub fn write_summary_csv<W: Write>(summary: &[SweepSummary], mut out: W) -> io::Result<()> {
    writeln!(out, "{}", SweepSummary::HEADER)?;
    for s in summary {
        writeln!(out, "{}", s.to_csv_line())?;
    }
    Ok(())
}
