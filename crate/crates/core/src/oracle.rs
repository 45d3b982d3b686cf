//! Simulated amplitude oracle: `QuantCirc(k, N)` and query accounting.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::angle::sin2;
use crate::error::{domain, Error, Result};

pub use statevector::{statevector_prob, GroverCircuit, MAX_POWER, MAX_WIDTH};

/// Running totals of one estimation run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct QueryLedger {
    /// Total applications of the Grover operator, `Σ k·N` over all calls.
    pub q_applications: u64,
    /// Total measurements.
    pub shots: u64,
}

impl QueryLedger {
    fn record(&mut self, k: u64, shots: u64) -> Result<()> {
        let q = k
            .checked_mul(shots)
            .and_then(|q| self.q_applications.checked_add(q))
            .ok_or_else(|| Error::Diagnostic("Q-application counter overflow".into()))?;
        let s = self
            .shots
            .checked_add(shots)
            .ok_or_else(|| Error::Diagnostic("shot counter overflow".into()))?;
        self.q_applications = q;
        self.shots = s;
        Ok(())
    }
}

/// How the success probability of `Q^k·A|0⟩` is obtained.
#[derive(Debug, Clone)]
pub enum Backend {
    /// Closed form `sin²((2k+1)·theta)`.
    Bernoulli,
    /// Dense simulation of the Grover circuit.
    Statevector(GroverCircuit),
}

/// The hidden amplitude together with the machinery that answers shots.
///
/// Owns its random stream and its [`QueryLedger`]; one model serves one run.
#[derive(Debug, Clone)]
pub struct OracleModel {
    theta: f64,
    a: f64,
    backend: Backend,
    rng: ChaCha8Rng,
    ledger: QueryLedger,
}

/// One Bernoulli draw with success probability `p`.
pub fn sample_bernoulli<R: RngCore + ?Sized>(p: f64, rng: &mut R) -> bool {
    rng.random::<f64>() < p
}

impl OracleModel {
    /// Model with angle `theta ∈ [0, π/2]`, answering from stream `stream` of
    /// the generator seeded by `seed`.
    pub fn new(theta: f64, backend: Backend, seed: u64, stream: u64) -> Result<Self> {
        if !(0.0..=FRAC_PI_2).contains(&theta) {
            return domain(format!("theta = {theta} is outside [0, π/2]"));
        }
        if let Backend::Statevector(c) = &backend {
            if c.theta() != theta {
                return domain("statevector circuit was built for a different angle");
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Ok(Self {
            theta,
            a: sin2(theta),
            backend,
            rng,
            ledger: QueryLedger::default(),
        })
    }

    pub fn bernoulli_from_amplitude(a: f64, seed: u64) -> Result<Self> {
        Self::new(theta_of(a)?, Backend::Bernoulli, seed, 0)
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn amplitude(&self) -> f64 {
        self.a
    }

    pub fn backend(&self) -> &Backend {
        &self.backend
    }

    pub fn ledger(&self) -> QueryLedger {
        self.ledger
    }

    /// Probability that a shot of `Q^k·A|0⟩` reads `|1⟩` on the rightmost qubit.
    pub fn success_probability(&mut self, k: u64) -> Result<f64> {
        match &mut self.backend {
            Backend::Bernoulli => Ok(sin2((2 * k + 1) as f64 * self.theta)),
            Backend::Statevector(c) => c.probability(k),
        }
    }

    /// Number of `|1⟩` outcomes in `n_shots` runs of `Q^k·A|0⟩`, drawn as
    /// independent Bernoulli trials from this model's stream.
    pub fn quant_circ(&mut self, k: u64, n_shots: u64) -> Result<u64> {
        if n_shots == 0 {
            return domain("QuantCirc needs at least one shot");
        }
        let p = self.success_probability(k)?;
        self.ledger.record(k, n_shots)?;
        let mut hits = 0;
        for _ in 0..n_shots {
            hits += sample_bernoulli(p, &mut self.rng) as u64;
        }
        Ok(hits)
    }
}

/// `asin(√a)`, the angle in `[0, π/2]` with `sin²(theta) = a`.
pub fn theta_of(a: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&a) {
        return domain(format!("a = {a} is outside [0, 1]"));
    }
    Ok(a.sqrt().asin())
}

mod statevector {
    use super::*;
    use nalgebra::Complex;

    type C64 = Complex<f64>;

    /// Widest register (excluding the flag qubit) the dense simulator accepts.
    pub const MAX_WIDTH: usize = 6;
    /// Largest Grover power the dense simulator accepts.
    pub const MAX_POWER: u64 = 10_000;

    /// Dense `(w+1)`-qubit circuit with
    /// `A = (U_w ⊗ I₂)·(I_w ⊗ R_y(2θ))` and `Q = A·S₀·A†·S_Ψ₀`.
    ///
    /// Basis index `2·i + b` pairs the register state `i` with the rightmost
    /// qubit `b`.
    #[derive(Debug, Clone)]
    pub struct GroverCircuit {
        theta: f64,
        width: usize,
        a_op: DMatrix<C64>,
        q_op: DMatrix<C64>,
        state: DVector<C64>,
        probs: Vec<f64>,
    }

    impl GroverCircuit {
        /// `unitary_seed = None` uses `U_w = I`; otherwise `U_w` is a seeded random unitary.
        pub fn new(theta: f64, width: usize, unitary_seed: Option<u64>) -> Result<Self> {
            if width == 0 || width > MAX_WIDTH {
                return domain(format!("width {width} outside 1..={MAX_WIDTH}"));
            }
            if !(0.0..=FRAC_PI_2).contains(&theta) {
                return domain(format!("theta = {theta} is outside [0, π/2]"));
            }
            let reg = 1usize << width;
            let dim = reg << 1;
            let u = match unitary_seed {
                None => DMatrix::<C64>::identity(reg, reg),
                Some(seed) => random_unitary(reg, seed),
            };
            let (c, s) = (theta.cos(), theta.sin());
            let ry = [[c, -s], [s, c]];

            let mut u_big = DMatrix::<C64>::zeros(dim, dim);
            let mut ry_big = DMatrix::<C64>::zeros(dim, dim);
            for i in 0..reg {
                for j in 0..reg {
                    for b in 0..2 {
                        u_big[(2 * i + b, 2 * j + b)] = u[(i, j)];
                    }
                }
                for b in 0..2 {
                    for t in 0..2 {
                        ry_big[(2 * i + b, 2 * i + t)] = C64::new(ry[b][t], 0.0);
                    }
                }
            }
            let a_op = &u_big * &ry_big;

            let mut s0 = DMatrix::<C64>::identity(dim, dim);
            s0[(0, 0)] = C64::new(-1.0, 0.0);
            let s_psi0 = DMatrix::<C64>::from_diagonal(&DVector::from_fn(dim, |r, _| {
                if r % 2 == 0 {
                    C64::new(-1.0, 0.0)
                } else {
                    C64::new(1.0, 0.0)
                }
            }));
            let q_op = &a_op * s0 * a_op.adjoint() * s_psi0;

            let state = a_op.column(0).into_owned();
            let p0 = flag_probability(&state);
            Ok(Self {
                theta,
                width,
                a_op,
                q_op,
                state,
                probs: vec![p0],
            })
        }

        pub fn theta(&self) -> f64 {
            self.theta
        }

        pub fn width(&self) -> usize {
            self.width
        }

        pub fn a_operator(&self) -> &DMatrix<C64> {
            &self.a_op
        }

        pub fn q_operator(&self) -> &DMatrix<C64> {
            &self.q_op
        }

        /// Summed `|amplitude|²` of basis states with rightmost bit 1 in `Q^k·A|0⟩`.
        pub fn probability(&mut self, k: u64) -> Result<f64> {
            if k > MAX_POWER {
                return domain(format!("Grover power {k} exceeds {MAX_POWER}"));
            }
            while self.probs.len() as u64 <= k {
                self.state = &self.q_op * &self.state;
                self.probs.push(flag_probability(&self.state));
            }
            Ok(self.probs[k as usize])
        }
    }

    fn flag_probability(state: &DVector<C64>) -> f64 {
        state
            .iter()
            .skip(1)
            .step_by(2)
            .map(|z| z.norm_sqr())
            .sum()
    }

    fn random_unitary(n: usize, seed: u64) -> DMatrix<C64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut gauss = || {
            // Box-Muller; 1 - u keeps the logarithm finite.
            let u: f64 = 1.0 - rng.random::<f64>();
            let v: f64 = rng.random::<f64>();
            (-2.0 * u.ln()).sqrt() * (std::f64::consts::TAU * v).cos()
        };
        let z = DMatrix::<C64>::from_fn(n, n, |_, _| C64::new(gauss(), gauss()));
        z.qr().q()
    }

    /// Success probability of `Q^k·A|0⟩` from a fresh dense simulation.
    pub fn statevector_prob(
        theta: f64,
        width: usize,
        k: u64,
        unitary_seed: Option<u64>,
    ) -> Result<f64> {
        GroverCircuit::new(theta, width, unitary_seed)?.probability(k)
    }
}
