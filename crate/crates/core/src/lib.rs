//! Classical simulation of QFT-free quantum amplitude estimation.
//!
//! The crate implements two iterative estimators that bracket the angle
//! `theta` (with `a = sin²(theta)`) and repeatedly scale the Grover power by a
//! factor `L ∈ {3, 5, 7}`:
//!
//! - [`run_qae`]: a fixed number of shots per round, sized by Hoeffding's
//!   inequality;
//! - [`run_aqae`]: an accelerated variant that takes one shot at a time and
//!   stops a round as soon as the current confidence interval is refinable.
//!
//! Supporting modules cover the breakpoint geometry that decides when a
//! bracket can be refined ([`angle`]), a Bernoulli and a dense statevector
//! oracle ([`oracle`]), confidence intervals ([`confidence`]), closed-form and
//! computer-assisted complexity bounds ([`bounds`]), and seeded parallel
//! sweeps ([`sweep`]).
//!
//! ```
//! use aqae_core::{run_aqae, Algorithm, CiMethod, EstimatorConfig, OracleModel};
//!
//! let config = EstimatorConfig::new(1e-3, 0.05, Algorithm::Aqae, CiMethod::Hoeffding, 7).unwrap();
//! let mut oracle = OracleModel::bernoulli_from_amplitude(0.3, config.seed).unwrap();
//! let result = run_aqae(&config, &mut oracle).unwrap();
//! assert!(result.final_bracket.width() <= 2.0 * config.epsilon);
//! ```

pub mod angle;
pub mod bounds;
pub mod confidence;
mod error;
pub mod estimator;
pub mod fmt;
pub mod oracle;
pub mod sweep;

pub use angle::{
    constants, e, e_l, f, refine, solve_bracket, AngleBracket, Constants, Refinement,
};
pub use bounds::{BoundKind, BoundReport, IntervalUnion};
pub use confidence::{AmplitudeInterval, CiMethod};
pub use error::{Error, Result};
pub use estimator::{
    run, run_aqae, run_qae, Algorithm, EstimationResult, EstimatorConfig, RoundRecord,
};
pub use oracle::{Backend, OracleModel, QueryLedger};
pub use sweep::{BenchRow, SweepSpec, SweepSummary};
