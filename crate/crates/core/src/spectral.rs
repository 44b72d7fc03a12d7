//! Spectral representation of the circulant operators
//!
//! ```text
//! f(h) = (I − J/n) · (P_h + P_{h⁻¹}) / 2
//! ```
//!
//! over Z_n, where P_h is the permutation matrix of translation by h and J
//! the all-ones matrix. All f(h) commute: they are diagonal in the discrete
//! Fourier basis, with eigenvalue cos(2πhj/n) at frequency j ≥ 1 and 0 at
//! frequency 0. Every quantity the derandomizer needs — traces of matrix
//! exponentials, operator norms of averaged exponentials — therefore reduces
//! to per-frequency scalar arithmetic, O(n) per evaluation instead of O(n³)
//! dense matrix exponentials. [`dense_f`] exists so tests can check the
//! scalar fast path against a dense eigendecomposition oracle.

use crate::group::{CosTable, CosineLedger, CyclicGroup};
use crate::{Error, Result};

/// Largest n for which the dense oracle constructor may be used.
pub const DENSE_ORACLE_LIMIT: u64 = 64;

/// Exponent threshold past which exponential accumulations switch to
/// log-domain arithmetic.
pub const OVERFLOW_THRESHOLD: f64 = 500.0;

/// Side of the two-sided bias event an exponential moment refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    #[inline]
    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// Eigenvalues of f(h) in the Fourier basis: λ\[0\] = 0, λ\[j\] = cos(2πhj/n).
pub fn f_eigenvalues(group: CyclicGroup, h: u64, table: &CosTable) -> Result<Vec<f64>> {
    group.check_residue(h)?;
    let n = group.n();
    let mut lambda = vec![0.0; n as usize];
    for j in 1..n {
        lambda[j as usize] = table.at_product(h, j);
    }
    Ok(lambda)
}

/// Dense n×n realization of f(h) = (I − J/n)(P_h + P_{h⁻¹})/2, test oracle
/// only (n ≤ [`DENSE_ORACLE_LIMIT`]).
///
/// Since each column of (P_h + P_{h⁻¹})/2 sums to 1, the product with
/// (I − J/n) just subtracts 1/n from every entry.
pub fn dense_f(group: CyclicGroup, h: u64) -> Result<Vec<Vec<f64>>> {
    group.check_residue(h)?;
    let n = group.n();
    if n > DENSE_ORACLE_LIMIT {
        return Err(Error::OracleScale {
            n,
            limit: DENSE_ORACLE_LIMIT,
        });
    }
    let n = n as usize;
    let h = h as usize;
    let mut m = vec![vec![0.0f64; n]; n];
    for (r, row) in m.iter_mut().enumerate() {
        for (c, entry) in row.iter_mut().enumerate() {
            let fwd = (r + n - c) % n == h; // r ≡ c + h
            let bwd = (c + n - r) % n == h; // r ≡ c − h
            let perm = (fwd as u8 + bwd as u8) as f64 / 2.0;
            *entry = perm - 1.0 / n as f64;
        }
    }
    Ok(m)
}

/// Tr exp(sign·t·Σ_i f(k_i)) over the ledger's prefix:
/// 1 + Σ_{j=1}^{n−1} exp(sign·t·c\[j\]).
///
/// The identity holds because the f(h) commute and share the Fourier
/// eigenbasis, so the exponent's eigenvalues are exactly {0} ∪ {c\[j\]}.
/// Past [`OVERFLOW_THRESHOLD`] the sum is computed in log domain; the
/// returned trace may still round to infinity if it genuinely exceeds f64
/// range (callers needing the logarithm use [`ln_trace_exp`]).
pub fn trace_exp(ledger: &CosineLedger, t: f64, sign: Sign) -> f64 {
    let c = ledger.sums();
    let max_abs = c[1..].iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    if t * max_abs > OVERFLOW_THRESHOLD {
        return ln_trace_exp(ledger, t, sign).exp();
    }
    let s = sign.factor() * t;
    let mut acc = 1.0;
    for &cj in &c[1..] {
        acc += (s * cj).exp();
    }
    acc
}

/// ln Tr exp(sign·t·Σ_i f(k_i)), always finite, via max-shifted summation.
pub fn ln_trace_exp(ledger: &CosineLedger, t: f64, sign: Sign) -> f64 {
    let s = sign.factor() * t;
    let c = ledger.sums();
    // frequency 0 contributes exp(0); include it in the shift
    let shift = c[1..].iter().fold(0.0f64, |acc, x| acc.max(s * x));
    let mut acc = (-shift).exp();
    for &cj in &c[1..] {
        acc += (s * cj - shift).exp();
    }
    shift + acc.ln()
}

/// Eigenvalue tables of the averaged exponentials E\[exp(±t·f(X))\], plus
/// the operator norms the estimator descends with.
///
/// `mu_plus[j]` / `mu_minus[j]` average over the whole group (X uniform on
/// {0..n−1}); they are ≥ 1 away from frequency 0 because the cosine values
/// at each frequency sum to zero. `step_nu_plus` / `step_nu_minus` are the
/// operator norms of the same averages taken over the *candidate*
/// distribution (X uniform on {1..n−1}) — the measure the greedy actually
/// draws from. Under any distribution the frequency-0 eigenvalue is exactly
/// 1, hence the clamp from below at 1.
#[derive(Debug, Clone)]
pub struct SpectralProfile {
    n: u64,
    t: f64,
    mu_plus: Vec<f64>,
    mu_minus: Vec<f64>,
    nu_plus: f64,
    nu_minus: f64,
    step_nu_plus: f64,
    step_nu_minus: f64,
}

impl SpectralProfile {
    #[inline]
    pub fn n(&self) -> u64 {
        self.n
    }

    #[inline]
    pub fn t(&self) -> f64 {
        self.t
    }

    /// Group-averaged eigenvalues at each frequency, plus side.
    #[inline]
    pub fn mu_plus(&self) -> &[f64] {
        &self.mu_plus
    }

    #[inline]
    pub fn mu_minus(&self) -> &[f64] {
        &self.mu_minus
    }

    /// Operator norm of the group-averaged E[exp(t·f(X))].
    #[inline]
    pub fn nu_plus(&self) -> f64 {
        self.nu_plus
    }

    #[inline]
    pub fn nu_minus(&self) -> f64 {
        self.nu_minus
    }

    /// Operator norm of the candidate-averaged E[exp(t·f(X))], X uniform on
    /// {1..n−1}.
    #[inline]
    pub fn step_nu_plus(&self) -> f64 {
        self.step_nu_plus
    }

    #[inline]
    pub fn step_nu_minus(&self) -> f64 {
        self.step_nu_minus
    }

    #[inline]
    pub fn step_nu(&self, sign: Sign) -> f64 {
        match sign {
            Sign::Plus => self.step_nu_plus,
            Sign::Minus => self.step_nu_minus,
        }
    }

    #[inline]
    pub fn nu(&self, sign: Sign) -> f64 {
        match sign {
            Sign::Plus => self.nu_plus,
            Sign::Minus => self.nu_minus,
        }
    }

    #[inline]
    pub fn mu(&self, sign: Sign) -> &[f64] {
        match sign {
            Sign::Plus => &self.mu_plus,
            Sign::Minus => &self.mu_minus,
        }
    }
}

/// Builds the averaged-exponential profile at temperature t ≥ 0.
///
/// μ±\[j\] depends on j only through gcd(j, n) — multiplying the running
/// index h by j walks the subgroup generated by gcd(j, n), each element hit
/// equally often — so the averages are computed once per divisor class. For
/// prime n this makes all μ±\[j\], j ≥ 1 literally the same f64.
pub fn build_profile(group: CyclicGroup, t: f64) -> Result<SpectralProfile> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::InvalidTemperature { t });
    }
    let n = group.n();
    let table = CosTable::new(group);

    // class means over the subgroup gZ_n, indexed by divisor g < n
    let mut class_plus = std::collections::HashMap::new();
    let mut class_minus = std::collections::HashMap::new();
    for g in divisors(n) {
        if g == n {
            continue;
        }
        let q = n / g;
        let mut sp = 0.0;
        let mut sm = 0.0;
        for v in 0..q {
            let c = table.at(v * g);
            sp += (t * c).exp();
            sm += (-t * c).exp();
        }
        class_plus.insert(g, sp / q as f64);
        class_minus.insert(g, sm / q as f64);
    }

    let mut mu_plus = vec![1.0; n as usize];
    let mut mu_minus = vec![1.0; n as usize];
    for j in 1..n {
        let g = gcd(j, n);
        mu_plus[j as usize] = class_plus[&g];
        mu_minus[j as usize] = class_minus[&g];
    }
    let nu_plus = mu_plus[1..].iter().fold(f64::MIN, |a, &b| a.max(b));
    let nu_minus = mu_minus[1..].iter().fold(f64::MIN, |a, &b| a.max(b));

    // candidate-averaged norms: strip the h = 0 term from the group average,
    // then clamp at the frequency-0 eigenvalue 1
    let nf = n as f64;
    let step_nu_plus = ((nf * nu_plus - t.exp()) / (nf - 1.0)).max(1.0);
    let step_nu_minus = ((nf * nu_minus - (-t).exp()) / (nf - 1.0)).max(1.0);

    Ok(SpectralProfile {
        n,
        t,
        mu_plus,
        mu_minus,
        nu_plus,
        nu_minus,
        step_nu_plus,
        step_nu_minus,
    })
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn divisors(n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut i = 1;
    while i * i <= n {
        if n.is_multiple_of(i) {
            out.push(i);
            if i != n / i {
                out.push(n / i);
            }
        }
        i += 1;
    }
    out.sort_unstable();
    out
}
