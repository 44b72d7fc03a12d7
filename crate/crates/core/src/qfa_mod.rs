//! The 2d-state automaton for unary words of length divisible by a prime p.
//!
//! d two-state blocks run in parallel: block i holds states (q_{i,0},
//! q_{i,1}) and rotates by θ_i = 2πk_i/p on every input symbol. The left
//! endmarker spreads amplitude 1/√d across the q_{i,0}; the right endmarker
//! maps the uniform q_{·,0} combination onto the single accepting state.
//! The accept probability after j symbols is therefore
//!
//! ```text
//! (1/d · Σ_i cos(2π k_i j / p))²   —   exactly 1 when p | j.
//! ```
//!
//! The end transformation is defined only on the uniform direction; the
//! simulator computes the accept amplitude by projecting onto it, which
//! determines every observable probability without inventing the rest of
//! the unitary. The machine is measure-once: nothing is observed until the
//! right endmarker.

use std::f64::consts::TAU;

use crate::derandomizer::ParameterSet;
use crate::group::CosTable;
use crate::{Error, Result};

/// Deterministic trial-division primality test.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut i = 3u64;
    while i * i <= n {
        if n.is_multiple_of(i) {
            return false;
        }
        i += 2;
    }
    true
}

#[derive(Debug, Clone)]
pub struct ModQfa {
    p: u64,
    d: usize,
    angles: Vec<f64>,
    table: CosTable,
    ks: Vec<u64>,
    /// Live amplitudes, block-interleaved: [a_{0,0}, a_{0,1}, a_{1,0}, …].
    amps: Vec<f64>,
}

impl ModQfa {
    /// Builds the automaton and applies the left-endmarker spread.
    pub fn new(set: &ParameterSet) -> Result<Self> {
        let p = set.n();
        if !is_prime(p) {
            return Err(Error::NonPrimeModulus { n: p });
        }
        let d = set.d();
        let angles = set
            .ks()
            .iter()
            .map(|&k| TAU * k as f64 / p as f64)
            .collect();
        let mut qfa = Self {
            p,
            d,
            angles,
            table: CosTable::new(set.group()),
            ks: set.ks().to_vec(),
            amps: vec![0.0; 2 * d],
        };
        qfa.reset();
        Ok(qfa)
    }

    #[inline]
    pub fn p(&self) -> u64 {
        self.p
    }

    #[inline]
    pub fn d(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn amplitudes(&self) -> &[f64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a * a).sum::<f64>().sqrt()
    }

    /// Left endmarker: amplitude 1/√d on each q_{i,0}, 0 on each q_{i,1}.
    pub fn reset(&mut self) {
        let spread = 1.0 / (self.d as f64).sqrt();
        for i in 0..self.d {
            self.amps[2 * i] = spread;
            self.amps[2 * i + 1] = 0.0;
        }
    }

    /// One input symbol: rotate each block by its angle.
    pub fn step_a(&mut self) {
        for (i, &theta) in self.angles.iter().enumerate() {
            let (sin, cos) = theta.sin_cos();
            let a0 = self.amps[2 * i];
            let a1 = self.amps[2 * i + 1];
            self.amps[2 * i] = cos * a0 - sin * a1;
            self.amps[2 * i + 1] = sin * a0 + cos * a1;
        }
    }

    /// Right endmarker + measurement: squared projection of the live state
    /// onto the uniform q_{·,0} direction.
    pub fn accept_probability(&self) -> f64 {
        let spread = 1.0 / (self.d as f64).sqrt();
        let amp: f64 = (0..self.d).map(|i| self.amps[2 * i] * spread).sum();
        amp * amp
    }

    /// Runs the automaton on the unary word of length j.
    pub fn accept_probability_sim(&mut self, j: u64) -> f64 {
        self.reset();
        for _ in 0..j {
            self.step_a();
        }
        self.accept_probability()
    }

    /// Closed form: 1 if p | j, else (1/d²)(Σ_i cos(2πk_i j/p))².
    pub fn accept_probability_closed(&self, j: u64) -> f64 {
        let r = j % self.p;
        if r == 0 {
            return 1.0;
        }
        let sum: f64 = self.ks.iter().map(|&k| self.table.at_product(k, r)).sum();
        let bias = sum / self.d as f64;
        bias * bias
    }
}
