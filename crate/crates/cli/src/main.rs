use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use aqae_core::bounds::{
    amplitude_grid, budget_for_shots, feasible_set, shots_for_round, worst_expected_shots,
};
use aqae_core::fmt::{format_sig, Sig, FULL_DIGITS};
use aqae_core::oracle::{theta_of, GroverCircuit};
use aqae_core::sweep::{summarize, write_rows_csv, write_summary_csv};
use aqae_core::{
    constants, run, Algorithm, Backend, BoundKind, BoundReport, CiMethod, Error, EstimatorConfig,
    OracleModel, SweepSpec,
};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "aqae", version, about = "QFT-free quantum amplitude estimation, simulated classically")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Bernoulli,
    Statevector,
}

#[derive(Subcommand)]
enum Command {
    /// Print E, F, C_alg1 and C_alg2 as JSON.
    Constants,
    /// Run one estimation and print its trace as JSON.
    Estimate {
        #[arg(long)]
        a: f64,
        #[arg(long, default_value_t = 1e-3)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, default_value = "aqae")]
        algorithm: Algorithm,
        #[arg(long, default_value = "hoeffding")]
        ci: CiMethod,
        #[arg(long, env = "AQAE_BASE_SEED", default_value_t = 0)]
        seed: u64,
        /// PRNG substream of the seed.
        #[arg(long, default_value_t = 0)]
        stream: u64,
        #[arg(long, value_enum, default_value_t = BackendArg::Bernoulli)]
        backend: BackendArg,
        /// Work-register qubits for the statevector backend.
        #[arg(long, default_value_t = 1)]
        width: usize,
        /// Seed of a random work-register unitary (statevector only; identity if absent).
        #[arg(long)]
        unitary_seed: Option<u64>,
    },
    /// Seeded sweep; writes rows.csv and summary.csv to --out and prints the summary.
    ///
    /// Quartiles of M use linear interpolation between order statistics (type 7).
    Bench {
        #[arg(long, default_value_t = 2000)]
        trials: u64,
        #[arg(long, default_value_t = 0.5)]
        a: f64,
        #[arg(long, value_delimiter = ',', default_value = "1e-3")]
        epsilon_list: Vec<f64>,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, value_delimiter = ',', default_value = "qae,aqae")]
        algorithms: Vec<Algorithm>,
        #[arg(long, value_delimiter = ',', default_value = "hoeffding")]
        ci_list: Vec<CiMethod>,
        /// Worker threads (defaults to all cores). Output does not depend on it.
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, env = "AQAE_BASE_SEED", default_value_t = 0)]
        seed: u64,
    },
    /// Closed-form bounds on M as CSV.
    Bounds {
        #[arg(long, value_delimiter = ',', default_value = "1e-2,1e-3,1e-4")]
        epsilon_list: Vec<f64>,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        /// Comma-separated kinds, or "all".
        #[arg(long, value_delimiter = ',', default_value = "all")]
        kinds: Vec<String>,
        /// Exponent for QAE_x and AQAE_x.
        #[arg(long, default_value_t = 1.0)]
        x: f64,
    },
    /// Worst expected shots of one accelerated round over an amplitude grid, as CSV.
    ExpectedShots {
        #[arg(long, value_delimiter = ',', conflicts_with = "ni_range")]
        alpha_i_list: Option<Vec<f64>>,
        /// START:END:STEP over planned shot counts.
        #[arg(long, alias = "Ni-range", default_value = "50:1400:50")]
        ni_range: String,
        #[arg(long, default_value_t = 0.02)]
        a_grid_step: f64,
        /// Evaluate a single amplitude instead of the grid.
        #[arg(long)]
        a: Option<f64>,
    },
    /// The set {a : e(a) >= t} as JSON.
    FeasibleSet {
        #[arg(long)]
        t: f64,
    },
}

enum Failure {
    Usage(String),
    Diagnostic(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain(_) => Failure::Usage(e.to_string()),
            Error::Diagnostic(_) => Failure::Diagnostic(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(format!("i/o error: {e}"))
    }
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Constants => cmd_constants(),
        Command::Estimate {
            a,
            epsilon,
            alpha,
            algorithm,
            ci,
            seed,
            stream,
            backend,
            width,
            unitary_seed,
        } => cmd_estimate(a, epsilon, alpha, algorithm, ci, seed, stream, backend, width, unitary_seed),
        Command::Bench {
            trials,
            a,
            epsilon_list,
            alpha,
            algorithms,
            ci_list,
            jobs,
            out,
            seed,
        } => cmd_bench(SweepSpec {
            trials,
            a_true: a,
            epsilons: epsilon_list,
            alpha,
            algorithms,
            ci_methods: ci_list,
            seed,
            jobs,
        }, out),
        Command::Bounds {
            epsilon_list,
            alpha,
            kinds,
            x,
        } => cmd_bounds(&epsilon_list, alpha, &kinds, x),
        Command::ExpectedShots {
            alpha_i_list,
            ni_range,
            a_grid_step,
            a,
        } => cmd_expected_shots(alpha_i_list, &ni_range, a_grid_step, a),
        Command::FeasibleSet { t } => cmd_feasible_set(t),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Diagnostic(msg)) => {
            eprintln!("diagnostic failure: {msg}");
            ExitCode::from(3)
        }
    }
}

fn cmd_constants() -> CmdResult {
    let c = constants();
    let doc = serde_json::json!({
        "E": Sig::<12>(c.e),
        "F": Sig::<12>(c.f),
        "C_alg1": Sig::<12>(c.c_alg1),
        "C_alg2": Sig::<12>(c.c_alg2),
    });
    println!("{}", serde_json::to_string_pretty(&doc).expect("constants serialize"));
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_estimate(
    a: f64,
    epsilon: f64,
    alpha: f64,
    algorithm: Algorithm,
    ci: CiMethod,
    seed: u64,
    stream: u64,
    backend: BackendArg,
    width: usize,
    unitary_seed: Option<u64>,
) -> CmdResult {
    let config = EstimatorConfig::new(epsilon, alpha, algorithm, ci, seed)?;
    let theta = theta_of(a)?;
    let backend = match backend {
        BackendArg::Bernoulli => Backend::Bernoulli,
        BackendArg::Statevector => Backend::Statevector(GroverCircuit::new(theta, width, unitary_seed)?),
    };
    let mut oracle = OracleModel::new(theta, backend, seed, stream)?;
    let result = run(&config, &mut oracle)?;
    println!("{}", result.to_json());
    Ok(())
}

fn cmd_bench(spec: SweepSpec, out: Option<PathBuf>) -> CmdResult {
    let rows = spec.run()?;
    let summary = summarize(&rows);
    if let Some(dir) = out {
        fs::create_dir_all(&dir)?;
        let mut w = BufWriter::new(File::create(dir.join("rows.csv"))?);
        write_rows_csv(&rows, &mut w)?;
        w.flush()?;
        let mut w = BufWriter::new(File::create(dir.join("summary.csv"))?);
        write_summary_csv(&summary, &mut w)?;
        w.flush()?;
    }
    write_summary_csv(&summary, io::stdout().lock())?;
    Ok(())
}

fn cmd_bounds(epsilons: &[f64], alpha: f64, kinds: &[String], x: f64) -> CmdResult {
    let kinds: Vec<BoundKind> = if kinds.iter().any(|k| k.eq_ignore_ascii_case("all")) {
        BoundKind::ALL.to_vec()
    } else {
        kinds.iter().map(|k| k.parse()).collect::<Result<_, _>>()?
    };
    let mut lines = vec!["kind,epsilon,alpha,x,value".to_string()];
    for &kind in &kinds {
        for &eps in epsilons {
            let r = BoundReport::evaluate(kind, eps, alpha, Some(x))?;
            lines.push(format!(
                "{},{},{},{},{}",
                r.kind,
                format_sig(r.epsilon, FULL_DIGITS),
                format_sig(r.alpha, FULL_DIGITS),
                r.x.map(|v| format_sig(v, FULL_DIGITS)).unwrap_or_default(),
                format_sig(r.value, FULL_DIGITS)
            ));
        }
    }
    println!("{}", lines.join("\n"));
    Ok(())
}

fn parse_range(s: &str) -> Result<Vec<u64>, Failure> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || Failure::Usage(format!("expected START:END:STEP, got '{s}'"));
    let nums: Vec<u64> = parts
        .iter()
        .map(|p| p.trim().parse::<u64>())
        .collect::<Result<_, _>>()
        .map_err(|_| bad())?;
    match nums[..] {
        [start, end, step] if start >= 1 && step >= 1 && start <= end => {
            Ok((start..=end).step_by(step as usize).collect())
        }
        [n] if n >= 1 => Ok(vec![n]),
        _ => Err(bad()),
    }
}

fn cmd_expected_shots(
    alpha_i_list: Option<Vec<f64>>,
    ni_range: &str,
    step: f64,
    fixed_a: Option<f64>,
) -> CmdResult {
    let rounds: Vec<(u64, f64)> = match alpha_i_list {
        Some(list) => list
            .into_iter()
            .map(|al| Ok((shots_for_round(al)?, al)))
            .collect::<Result<_, Error>>()?,
        None => parse_range(ni_range)?
            .into_iter()
            .map(|n| Ok((n, budget_for_shots(n)?)))
            .collect::<Result<_, Error>>()?,
    };
    let grid = match fixed_a {
        Some(a) => {
            theta_of(a)?;
            vec![a]
        }
        None => amplitude_grid(step)?,
    };
    let mut lines = vec!["N_i,alpha_i,worst_a,J,bound_value,reference".to_string()];
    for (n_i, alpha_i) in rounds {
        let (a, r) = worst_expected_shots(alpha_i, &grid)?;
        lines.push(format!(
            "{},{},{},{},{},{}",
            n_i,
            format_sig(alpha_i, FULL_DIGITS),
            format_sig(a, FULL_DIGITS),
            r.j,
            format_sig(r.bound, FULL_DIGITS),
            format_sig(n_i as f64 / 6.0 + 40.0, FULL_DIGITS)
        ));
    }
    println!("{}", lines.join("\n"));
    Ok(())
}

fn cmd_feasible_set(t: f64) -> CmdResult {
    let set = feasible_set(t)?;
    let pieces: Vec<[Sig<12>; 2]> = set
        .intervals()
        .iter()
        .map(|&[lo, hi]| [Sig(lo), Sig(hi)])
        .collect();
    println!("{}", serde_json::to_string(&pieces).expect("intervals serialize"));
    Ok(())
}
