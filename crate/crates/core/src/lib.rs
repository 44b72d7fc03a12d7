//! Deterministic construction of small-biased parameter sets over cyclic
//! groups, and the quantum-finite-automaton simulators built on top of them.
//!
//! A parameter set is a multiset S = {k_1, …, k_d} of nonzero residues mod n
//! whose bias
//!
//! ```text
//! b(j) = (1/d) · Σ_i cos(2π k_i j / n)
//! ```
//!
//! is at most γ in magnitude at every nontrivial frequency j. Such sets are
//! found greedily, one residue at a time, by descending a pessimistic
//! estimator: an efficiently computable upper bound on the probability that a
//! uniformly random completion of the current prefix fails the bias bound.
//! The estimator is evaluated in O(n) per candidate through the shared
//! Fourier eigenbasis of the underlying circulant operators ([`spectral`]).
//!
//! Two automata consume the sets: a 2d-state machine recognizing unary words
//! of length divisible by a prime p ([`qfa_mod`]), and a fingerprinting
//! machine for the promise problem of recognizing concatenations of
//! palindromic subwords ([`qfa_palindrome`]).

pub mod derandomizer;
pub mod group;
pub mod qfa_mod;
pub mod qfa_palindrome;
pub mod set_file;
pub mod spectral;

mod error;

pub use error::Error;

pub type Result<T> = std::result::Result<T, Error>;
