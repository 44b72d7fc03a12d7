//! The v1 parameter-set file format: text, line-oriented, LF endings.
//!
//! ```text
//! # smallbias-set v1
//! n=11
//! d=45
//! gamma=4.4721359549995793e-1
//! k=1 5 4 2 3 ...
//! ```
//!
//! γ is written with 17 significant digits, enough to round-trip an f64
//! exactly. Writing a parsed set reproduces the original bytes.

use std::path::Path;

use crate::derandomizer::ParameterSet;
use crate::{Error, Result};

pub const HEADER: &str = "# smallbias-set v1";

/// Renders a set in v1 format (trailing newline included).
pub fn format_set(set: &ParameterSet) -> String {
    let ks: Vec<String> = set.ks().iter().map(u64::to_string).collect();
    format!(
        "{HEADER}\nn={}\nd={}\ngamma={:.16e}\nk={}\n",
        set.n(),
        set.d(),
        set.gamma(),
        ks.join(" ")
    )
}

pub fn write_set(path: &Path, set: &ParameterSet) -> Result<()> {
    std::fs::write(path, format_set(set))?;
    Ok(())
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Parses v1 text. Rejects malformed headers, missing or extra lines,
/// out-of-range residues, and d/list length mismatches, naming the
/// offending line.
pub fn parse_set(text: &str) -> Result<ParameterSet> {
    let lines: Vec<&str> = text.lines().collect();
    if lines.first().is_some_and(|&l| l != HEADER) {
        return Err(parse_err(1, format!("expected header {HEADER:?}")));
    }
    if lines.len() < 5 {
        return Err(parse_err(lines.len() + 1, "unexpected end of file"));
    }
    if lines.len() > 5 {
        return Err(parse_err(6, "trailing content after the k= line"));
    }
    let n: u64 = lines[1]
        .strip_prefix("n=")
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| parse_err(2, "expected n=<integer>"))?;
    if n < 2 {
        return Err(parse_err(2, format!("modulus {n} out of range")));
    }
    let d: usize = lines[2]
        .strip_prefix("d=")
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| parse_err(3, "expected d=<integer>"))?;
    let gamma: f64 = lines[3]
        .strip_prefix("gamma=")
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| parse_err(4, "expected gamma=<decimal>"))?;
    if !gamma.is_finite() || gamma <= 0.0 || gamma >= 1.0 {
        return Err(parse_err(4, format!("gamma {gamma} outside (0,1)")));
    }
    let ks_text = lines[4]
        .strip_prefix("k=")
        .ok_or_else(|| parse_err(5, "expected k=<space-separated residues>"))?;
    let mut ks = Vec::with_capacity(d);
    for tok in ks_text.split_whitespace() {
        let k: u64 = tok
            .parse()
            .map_err(|_| parse_err(5, format!("bad residue {tok:?}")))?;
        if k == 0 || k >= n {
            return Err(parse_err(
                5,
                format!("residue {k} out of range 1..{}", n - 1),
            ));
        }
        ks.push(k);
    }
    if ks.len() != d {
        return Err(parse_err(
            5,
            format!("declared d={d} but found {} residues", ks.len()),
        ));
    }
    ParameterSet::new(n, gamma, ks)
}

pub fn read_set(path: &Path) -> Result<ParameterSet> {
    let text = std::fs::read_to_string(path)?;
    parse_set(&text)
}
