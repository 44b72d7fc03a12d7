//! The cyclic group Z_n, its characters, and running per-frequency cosine
//! sums over a chosen prefix of residues.

use std::f64::consts::TAU;

use crate::{Error, Result};

/// The additive cyclic group Z_n, n ≥ 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CyclicGroup {
    n: u64,
}

impl CyclicGroup {
    pub fn new(n: u64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidModulus { n });
        }
        Ok(Self { n })
    }

    #[inline]
    pub fn n(&self) -> u64 {
        self.n
    }

    /// Checks that `h` is a canonical residue of the group.
    pub fn check_residue(&self, h: u64) -> Result<()> {
        if h >= self.n {
            return Err(Error::ResidueOutOfRange { h, n: self.n });
        }
        Ok(())
    }
}

/// Value of the character χ at residue h: `(cos 2πh/n, sin 2πh/n)`.
pub fn character(group: CyclicGroup, h: u64) -> Result<(f64, f64)> {
    group.check_residue(h)?;
    let theta = TAU * h as f64 / group.n() as f64;
    Ok((theta.cos(), theta.sin()))
}

/// Table of cos(2π a / n) for a ∈ {0..n−1}.
///
/// Entries a and n−a are the *same* f64: the table is computed for a ≤ n/2
/// and mirrored. Downstream code relies on this to make cosine evenness
/// (and hence the ledger symmetry c\[j\] = c\[n−j\]) bit-exact rather than
/// merely approximate.
#[derive(Debug, Clone)]
pub struct CosTable {
    n: u64,
    values: Vec<f64>,
}

impl CosTable {
    pub fn new(group: CyclicGroup) -> Self {
        let n = group.n() as usize;
        let mut values = vec![0.0; n];
        for (a, v) in values.iter_mut().enumerate().take(n / 2 + 1) {
            *v = (TAU * a as f64 / n as f64).cos();
        }
        for a in n / 2 + 1..n {
            values[a] = values[n - a];
        }
        Self {
            n: group.n(),
            values,
        }
    }

    #[inline]
    pub fn n(&self) -> u64 {
        self.n
    }

    /// cos(2π a / n) for a canonical residue a.
    #[inline]
    pub fn at(&self, a: u64) -> f64 {
        self.values[a as usize]
    }

    /// cos(2π (x·y mod n) / n), with the product reduced in integer
    /// arithmetic so large residues cannot lose precision.
    #[inline]
    pub fn at_product(&self, x: u64, y: u64) -> f64 {
        let idx = (x as u128 * y as u128) % self.n as u128;
        self.values[idx as usize]
    }
}

/// Running sums c\[j\] = Σ_i cos(2π k_i j / n) over a prefix k_1..k_m.
///
/// Index 0 is kept at zero; only frequencies 1..n−1 carry information.
#[derive(Debug, Clone)]
pub struct CosineLedger {
    n: u64,
    c: Vec<f64>,
    m: usize,
}

impl CosineLedger {
    pub fn new(group: CyclicGroup) -> Self {
        Self {
            n: group.n(),
            c: vec![0.0; group.n() as usize],
            m: 0,
        }
    }

    #[inline]
    pub fn n(&self) -> u64 {
        self.n
    }

    /// Prefix length m.
    #[inline]
    pub fn len(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    /// The sums c\[0..n\]; entry 0 is always 0.
    #[inline]
    pub fn sums(&self) -> &[f64] {
        &self.c
    }

    /// Appends residue `k` to the prefix, adding cos(2πkj/n) at every
    /// frequency.
    pub fn extend(&mut self, k: u64, table: &CosTable) {
        debug_assert_eq!(table.n(), self.n);
        for j in 1..self.n {
            self.c[j as usize] += table.at_product(k, j);
        }
        self.m += 1;
    }
}
