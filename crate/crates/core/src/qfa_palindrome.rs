//! Fingerprinting automaton for the palindrome promise problem.
//!
//! Inputs are bit strings split by '#' into subwords of even length s (an
//! incomplete trailing fragment is ignored). A subword x_0..x_{s−1} is
//! mapped to the pair of fingerprints
//!
//! ```text
//! q = Σ_{j < s/2} 2^j·x_j          (first half, little-endian)
//! r = Σ_{j ≥ s/2} 2^{s−j−1}·x_j    (second half reversed, little-endian)
//! ```
//!
//! so q = r exactly when the subword is a palindrome. While reading bits,
//! branch i of the d-branch superposition rotates by +2π k_i 2^j / n on a
//! set first-half bit and by −2π k_i 2^{s−j−1} / n on a set second-half bit
//! (n = 2^{s/2}), accumulating the angle 2π k_i (q−r)/n by the time the
//! subword ends. At each '#' the target direction is measured; the
//! continuing outcome has probability ((1/d)Σ_i cos(2πk_i(q−r)/n))² — 1 for
//! palindromes, below γ² for non-palindromes when the parameter set passes
//! the bias check — and the register is reset for the next subword, making
//! the word's exact acceptance probability the product over its subwords.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::derandomizer::{choose_d, ParameterSet};
use crate::group::{CosTable, CyclicGroup};
use crate::{Error, Result};

/// A validated input: subwords of length s over {0,1}, plus the ignored
/// incomplete tail, if any.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromiseWord {
    s: usize,
    subwords: Vec<Vec<u8>>,
    ignored_tail: String,
}

impl PromiseWord {
    #[inline]
    pub fn s(&self) -> usize {
        self.s
    }

    #[inline]
    pub fn subwords(&self) -> &[Vec<u8>] {
        &self.subwords
    }

    #[inline]
    pub fn ignored_tail(&self) -> &str {
        &self.ignored_tail
    }
}

fn check_s(s: usize) -> Result<()> {
    if s < 2 || !s.is_multiple_of(2) {
        return Err(Error::InvalidSubwordLength { s });
    }
    Ok(())
}

/// Fingerprint modulus n = 2^{s/2}.
pub fn fingerprint_modulus(s: usize) -> Result<u64> {
    check_s(s)?;
    1u64.checked_shl((s / 2) as u32)
        .filter(|_| s / 2 < 64)
        .ok_or(Error::InvalidSubwordLength { s })
}

/// Splits `raw` on '#', enforcing the promise: a separator after each s
/// symbols, alphabet {0,1,#}. Violations name the byte offset. A trailing
/// fragment shorter than s is captured as the ignored tail.
pub fn validate_promise(raw: &str, s: usize) -> Result<PromiseWord> {
    check_s(s)?;
    let mut subwords = Vec::new();
    let mut block: Vec<u8> = Vec::with_capacity(s);
    for (offset, ch) in raw.char_indices() {
        match ch {
            '0' | '1' => {
                if block.len() == s {
                    return Err(Error::PromiseViolation {
                        offset,
                        message: format!("expected '#' after {s} symbols"),
                    });
                }
                block.push(ch as u8 - b'0');
            }
            '#' => {
                if block.len() != s {
                    return Err(Error::PromiseViolation {
                        offset,
                        message: format!(
                            "subword has {} symbols before '#', expected {s}",
                            block.len()
                        ),
                    });
                }
                subwords.push(std::mem::take(&mut block));
            }
            other => {
                return Err(Error::PromiseViolation {
                    offset,
                    message: format!("illegal character {other:?}"),
                });
            }
        }
    }
    let ignored_tail = if block.len() == s {
        subwords.push(block);
        String::new()
    } else {
        block.iter().map(|b| char::from(b + b'0')).collect()
    };
    Ok(PromiseWord {
        s,
        subwords,
        ignored_tail,
    })
}

/// Fingerprints (q, r) of a length-s subword; q = r iff it is a palindrome.
pub fn fingerprint(subword: &[u8]) -> (u64, u64) {
    let s = subword.len();
    let half = s / 2;
    let mut q = 0u64;
    let mut r = 0u64;
    for (j, &bit) in subword.iter().enumerate() {
        if bit != 0 {
            if j < half {
                q += 1 << j;
            } else {
                r += 1 << (s - j - 1);
            }
        }
    }
    (q, r)
}

#[derive(Debug, Clone)]
pub struct PalindromeQfa {
    s: usize,
    n: u64,
    set: ParameterSet,
    table: CosTable,
    /// Qubits a physical register would need: ⌈log₂ d⌉ index qubits plus
    /// the target. Reported for accounting; the simulator works with the
    /// exact d-branch amplitudes.
    t_qubits: u32,
}

impl PalindromeQfa {
    pub fn new(s: usize, set: ParameterSet) -> Result<Self> {
        let n = fingerprint_modulus(s)?;
        if set.n() != n {
            return Err(Error::ModulusMismatch {
                expected: n,
                got: set.n(),
            });
        }
        let d = set.d();
        let index_qubits = if d == 1 {
            0
        } else {
            64 - (d as u64 - 1).leading_zeros()
        };
        let table = CosTable::new(set.group());
        Ok(Self {
            s,
            n,
            set,
            table,
            t_qubits: index_qubits + 1,
        })
    }

    #[inline]
    pub fn s(&self) -> usize {
        self.s
    }

    #[inline]
    pub fn n(&self) -> u64 {
        self.n
    }

    #[inline]
    pub fn set(&self) -> &ParameterSet {
        &self.set
    }

    #[inline]
    pub fn t_qubits(&self) -> u32 {
        self.t_qubits
    }

    /// Probability that the post-'#' measurement observes the continuing
    /// outcome: ((1/d)·Σ_i cos(2πk_i(q−r)/n))². Exactly 1 when q = r.
    pub fn subword_continue_prob(&self, subword: &[u8]) -> f64 {
        assert_eq!(subword.len(), self.s, "subword length mismatch");
        let (q, r) = fingerprint(subword);
        let delta = (q + self.n - r) % self.n;
        if delta == 0 {
            return 1.0;
        }
        let sum: f64 = self
            .set
            .ks()
            .iter()
            .map(|&k| self.table.at_product(k, delta))
            .sum();
        let bias = sum / self.set.d() as f64;
        bias * bias
    }

    /// Symbol-by-symbol accumulated rotation of each branch over one
    /// subword: +2π(k_i·2^j mod n)/n per set first-half bit, −2π(k_i·2^{s−j−1}
    /// mod n)/n per set second-half bit. The final angle of branch i is
    /// congruent to 2πk_i(q−r)/n mod 2π.
    pub fn stepped_subword_angles(&self, subword: &[u8]) -> Vec<f64> {
        assert_eq!(subword.len(), self.s, "subword length mismatch");
        let half = self.s / 2;
        let n = self.n as u128;
        self.set
            .ks()
            .iter()
            .map(|&k| {
                let mut angle = 0.0f64;
                for (j, &bit) in subword.iter().enumerate() {
                    if bit == 0 {
                        continue;
                    }
                    let (exp, sign) = if j < half {
                        (j, 1.0)
                    } else {
                        (self.s - j - 1, -1.0)
                    };
                    let step = (k as u128 * (1u128 << exp)) % n;
                    angle += sign * TAU * step as f64 / self.n as f64;
                }
                angle
            })
            .collect()
    }

    /// Exact acceptance probability of a validated word: the product of
    /// per-subword continue probabilities (measure, then full reset). The
    /// empty word accepts with probability 1.
    pub fn accept_probability_exact(&self, word: &PromiseWord) -> f64 {
        assert_eq!(word.s(), self.s, "word validated for a different s");
        word.subwords()
            .iter()
            .map(|w| self.subword_continue_prob(w))
            .product()
    }

    /// Samples `shots` end-to-end runs. Each shot draws one Bernoulli per
    /// subword from its own deterministic stream (stream index = shot
    /// index over a seed-keyed generator), so counts are reproducible and
    /// independent of how shots are batched; a failed draw rejects the
    /// shot immediately. Returns (accepted, rejected).
    pub fn accept_sampled(&self, word: &PromiseWord, shots: u64, seed: u64) -> (u64, u64) {
        self.accept_sampled_offset(word, shots, seed, 0)
    }

    /// [`accept_sampled`] for the shot index range `first_shot..first_shot
    /// + shots`; summing disjoint ranges reproduces a single larger run.
    pub fn accept_sampled_offset(
        &self,
        word: &PromiseWord,
        shots: u64,
        seed: u64,
        first_shot: u64,
    ) -> (u64, u64) {
        assert_eq!(word.s(), self.s, "word validated for a different s");
        let probs: Vec<f64> = word
            .subwords()
            .iter()
            .map(|w| self.subword_continue_prob(w))
            .collect();
        let mut accepted = 0u64;
        for shot in first_shot..first_shot + shots {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(shot);
            if probs.iter().all(|&p| rng.random::<f64>() < p) {
                accepted += 1;
            }
        }
        (accepted, shots - accepted)
    }
}

/// Default set size for Palindrome_s at error bound ε: the feasibility
/// minimum of [`choose_d`] over the fingerprint modulus at γ = √ε.
pub fn default_d(s: usize, epsilon: f64) -> Result<u64> {
    if !epsilon.is_finite() || epsilon <= 0.0 || epsilon >= 1.0 {
        return Err(Error::InvalidGamma {
            gamma: epsilon.sqrt(),
        });
    }
    let n = fingerprint_modulus(s)?;
    choose_d(CyclicGroup::new(n)?, epsilon.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(s: &str) -> Vec<u8> {
        s.bytes().map(|b| b - b'0').collect()
    }

    #[test]
    fn promise_three_subwords() {
        let w = validate_promise("1001#1111#0110", 4).unwrap();
        assert_eq!(w.subwords().len(), 3);
        assert_eq!(w.subwords()[0], bits("1001"));
        assert_eq!(w.ignored_tail(), "");
    }

    #[test]
    fn promise_empty_word() {
        let w = validate_promise("", 4).unwrap();
        assert_eq!(w.subwords().len(), 0);
        assert_eq!(w.ignored_tail(), "");
    }

    #[test]
    fn promise_ignores_incomplete_tail() {
        let w = validate_promise("1001#11", 4).unwrap();
        assert_eq!(w.subwords().len(), 1);
        assert_eq!(w.ignored_tail(), "11");
    }

    #[test]
    fn promise_trailing_separator_is_clean() {
        let w = validate_promise("1001#", 4).unwrap();
        assert_eq!(w.subwords().len(), 1);
        assert_eq!(w.ignored_tail(), "");
    }

    #[test]
    fn promise_violations_name_offsets() {
        match validate_promise("10#1001", 4).unwrap_err() {
            Error::PromiseViolation { offset: 2, message } => {
                assert!(message.contains("2 symbols"))
            }
            other => panic!("{other:?}"),
        }
        match validate_promise("10011", 4).unwrap_err() {
            Error::PromiseViolation { offset: 4, message } => {
                assert!(message.contains("expected '#'"))
            }
            other => panic!("{other:?}"),
        }
        match validate_promise("1001#1x11", 4).unwrap_err() {
            Error::PromiseViolation { offset: 6, message } => {
                assert!(message.contains("illegal"))
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn promise_rejects_odd_s() {
        assert!(matches!(
            validate_promise("101", 3),
            Err(Error::InvalidSubwordLength { s: 3 })
        ));
        assert!(matches!(
            validate_promise("", 0),
            Err(Error::InvalidSubwordLength { s: 0 })
        ));
    }

    #[test]
    fn fingerprint_examples() {
        assert_eq!(fingerprint(&bits("1001")), (1, 1));
        assert_eq!(fingerprint(&bits("0000")), (0, 0));
        assert_eq!(fingerprint(&bits("1000")), (1, 0));
    }

    #[test]
    fn fingerprint_characterizes_palindromes() {
        // exhaustive s = 6: q = r iff first half equals reversed second half
        for w in 0u32..64 {
            let word: Vec<u8> = (0..6).map(|j| ((w >> j) & 1) as u8).collect();
            let is_pal = (0..3).all(|j| word[j] == word[5 - j]);
            let (q, r) = fingerprint(&word);
            assert_eq!(q == r, is_pal, "word {word:?}");
        }
    }

    fn tiny_qfa() -> PalindromeQfa {
        // synthetic single-branch set over n = 4
        let set = ParameterSet::new(4, 0.9, vec![1]).unwrap();
        PalindromeQfa::new(4, set).unwrap()
    }

    #[test]
    fn continue_prob_palindrome_is_one() {
        let qfa = tiny_qfa();
        for w in ["0000", "1001", "0110", "1111"] {
            assert_eq!(qfa.subword_continue_prob(&bits(w)), 1.0);
        }
    }

    #[test]
    fn continue_prob_quarter_turn_vanishes() {
        // "1000": q − r = 1, single branch k = 1 over n = 4: cos²(π/2) = 0
        let qfa = tiny_qfa();
        assert!(qfa.subword_continue_prob(&bits("1000")) < 1e-30);
    }

    #[test]
    fn stepped_angles_zero_word() {
        let qfa = tiny_qfa();
        assert_eq!(qfa.stepped_subword_angles(&bits("0000")), vec![0.0]);
    }

    #[test]
    fn stepped_angles_cancel_on_palindrome() {
        let qfa = tiny_qfa();
        for angle in qfa.stepped_subword_angles(&bits("1001")) {
            let reduced = angle.rem_euclid(TAU);
            assert!(reduced < 1e-12 || (TAU - reduced) < 1e-12);
        }
    }

    #[test]
    fn exact_probability_of_empty_word_is_one() {
        let qfa = tiny_qfa();
        let w = validate_promise("", 4).unwrap();
        assert_eq!(qfa.accept_probability_exact(&w), 1.0);
    }

    #[test]
    fn exact_probability_multiplies() {
        let qfa = tiny_qfa();
        let one = validate_promise("1000", 4).unwrap();
        let two = validate_promise("1000#1000", 4).unwrap();
        let p1 = qfa.accept_probability_exact(&one);
        let p2 = qfa.accept_probability_exact(&two);
        assert!((p2 - p1 * p1).abs() < 1e-15);
    }

    #[test]
    fn sampling_is_deterministic_and_batch_invariant() {
        let set = ParameterSet::new(4, 0.9, vec![1, 2, 3]).unwrap();
        let qfa = PalindromeQfa::new(4, set).unwrap();
        let w = validate_promise("1000#0110#1100", 4).unwrap();
        let (a1, r1) = qfa.accept_sampled(&w, 2000, 7);
        let (a2, r2) = qfa.accept_sampled(&w, 2000, 7);
        assert_eq!((a1, r1), (a2, r2));
        let (b1, _) = qfa.accept_sampled_offset(&w, 800, 7, 0);
        let (b2, _) = qfa.accept_sampled_offset(&w, 1200, 7, 800);
        assert_eq!(a1, b1 + b2, "batching must not change counts");
        let (a3, _) = qfa.accept_sampled(&w, 2000, 8);
        assert_ne!((a1, r1), (a3, 2000 - a3), "different seed, different draws");
    }

    #[test]
    fn sampling_all_palindromes_accepts_every_shot() {
        let set = ParameterSet::new(4, 0.9, vec![1, 3]).unwrap();
        let qfa = PalindromeQfa::new(4, set).unwrap();
        let w = validate_promise("1001#0110", 4).unwrap();
        assert_eq!(qfa.accept_sampled(&w, 500, 1), (500, 0));
    }

    #[test]
    fn modulus_mismatch_is_rejected() {
        let set = ParameterSet::new(8, 0.9, vec![1]).unwrap();
        assert!(matches!(
            PalindromeQfa::new(4, set),
            Err(Error::ModulusMismatch {
                expected: 4,
                got: 8
            })
        ));
    }

    #[test]
    fn qubit_accounting() {
        let set = ParameterSet::new(4, 0.9, vec![1]).unwrap();
        assert_eq!(PalindromeQfa::new(4, set).unwrap().t_qubits(), 1);
        let set = ParameterSet::new(8, 0.9, vec![1, 2, 3, 4, 5]).unwrap();
        let qfa = PalindromeQfa::new(6, set).unwrap();
        // 2^{t−1} ≥ d
        assert!(1u64 << (qfa.t_qubits() - 1) >= 5);
        assert_eq!(qfa.t_qubits(), 4);
    }
}
