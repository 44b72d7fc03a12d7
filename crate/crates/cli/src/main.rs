//! `smallbias` — construct and verify small-biased parameter sets over
//! Z_n, and run the finite automata built from them.
//!
//! Exit codes: 0 success/pass, 1 verification or feasibility failure,
//! 2 usage error, 3 IO/parse error.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use smallbias_core::derandomizer::{bias_at, choose_d, find_set, sigma_check, ParameterSet};
use smallbias_core::group::{CosTable, CyclicGroup};
use smallbias_core::qfa_mod::ModQfa;
use smallbias_core::qfa_palindrome::{
    default_d, fingerprint_modulus, validate_promise, PalindromeQfa,
};
use smallbias_core::set_file::{read_set, write_set};
use smallbias_core::Error;

/// The shipped reference sets, one per (p, d) row, embedded so
/// `verify-appendix` works from any working directory.
const FIXTURES: [(&str, &str); 15] = [
    ("p11_d45.txt", include_str!("../../../fixtures/p11_d45.txt")),
    ("p17_d51.txt", include_str!("../../../fixtures/p17_d51.txt")),
    ("p23_d56.txt", include_str!("../../../fixtures/p23_d56.txt")),
    ("p29_d59.txt", include_str!("../../../fixtures/p29_d59.txt")),
    ("p31_d60.txt", include_str!("../../../fixtures/p31_d60.txt")),
    ("p37_d63.txt", include_str!("../../../fixtures/p37_d63.txt")),
    ("p41_d64.txt", include_str!("../../../fixtures/p41_d64.txt")),
    ("p47_d66.txt", include_str!("../../../fixtures/p47_d66.txt")),
    ("p53_d68.txt", include_str!("../../../fixtures/p53_d68.txt")),
    ("p59_d69.txt", include_str!("../../../fixtures/p59_d69.txt")),
    ("p61_d70.txt", include_str!("../../../fixtures/p61_d70.txt")),
    ("p67_d71.txt", include_str!("../../../fixtures/p67_d71.txt")),
    ("p71_d72.txt", include_str!("../../../fixtures/p71_d72.txt")),
    ("p83_d74.txt", include_str!("../../../fixtures/p83_d74.txt")),
    ("p97_d76.txt", include_str!("../../../fixtures/p97_d76.txt")),
];

#[derive(Parser)]
#[command(
    name = "smallbias",
    version,
    about = "Small-biased sets over Z_n and the automata they drive"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Deterministically construct a set of residues with bounded bias
    FindSet(FindSetArgs),
    /// Report the smallest feasible set size for a modulus and bias bound
    ChooseD(ChooseDArgs),
    /// Check the bias bound of a stored set, optionally dumping the curve
    VerifySet(VerifySetArgs),
    /// Re-verify all 15 shipped reference sets
    VerifyAppendix(VerifyAppendixArgs),
    /// Compare the divisibility automaton against its closed form
    SimulateMod(SimulateModArgs),
    /// Run the palindrome automaton on promise words, exactly or sampled
    SimulatePalindrome(SimulatePalindromeArgs),
}

/// Bias bound given either directly (γ) or as the error bound ε = γ².
#[derive(Args)]
#[group(required = true, multiple = false)]
struct BiasTarget {
    /// Bias bound γ in (0,1)
    #[arg(long)]
    gamma: Option<f64>,
    /// Error bound ε in (0,1); the bias bound is √ε
    #[arg(long)]
    epsilon: Option<f64>,
}

impl BiasTarget {
    fn resolve(&self) -> Result<f64, Failure> {
        let gamma = match (self.gamma, self.epsilon) {
            (Some(g), None) => g,
            (None, Some(e)) => {
                if !e.is_finite() || e <= 0.0 || e >= 1.0 {
                    return Err(usage(format!("epsilon must lie in (0,1), got {e}")));
                }
                e.sqrt()
            }
            _ => unreachable!("clap group enforces exactly one"),
        };
        if !gamma.is_finite() || gamma <= 0.0 || gamma >= 1.0 {
            return Err(usage(format!("gamma must lie in (0,1), got {gamma}")));
        }
        Ok(gamma)
    }
}

#[derive(Args)]
struct FindSetArgs {
    /// Group modulus n ≥ 2
    #[arg(long)]
    n: u64,
    #[command(flatten)]
    target: BiasTarget,
    /// Set size; defaults to the smallest feasible size
    #[arg(long)]
    d: Option<u64>,
    /// Output path for the set file
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ChooseDArgs {
    /// Group modulus n ≥ 2
    #[arg(long)]
    n: u64,
    #[command(flatten)]
    target: BiasTarget,
}

#[derive(Args)]
struct VerifySetArgs {
    /// Set file to check
    #[arg(long = "in")]
    input: PathBuf,
    /// Override the bias bound stored in the file
    #[arg(long)]
    gamma: Option<f64>,
    /// Write the per-frequency bias curve as CSV
    #[arg(long)]
    curve: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyAppendixArgs {
    /// Read fixtures from this directory instead of the embedded copies
    #[arg(long)]
    fixtures: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateModArgs {
    /// Set file (modulus must be prime)
    #[arg(long)]
    set: PathBuf,
    /// Single word length to simulate
    #[arg(long, conflicts_with = "j_range")]
    j: Option<u64>,
    /// Inclusive range of word lengths, e.g. 0..33
    #[arg(long, value_name = "A..B")]
    j_range: Option<String>,
    /// Write rows as CSV instead of stdout lines
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct SimulatePalindromeArgs {
    /// Subword length (even, ≥ 2)
    #[arg(long)]
    s: usize,
    /// Error bound ε sizing the constructed set (ignored with --set)
    #[arg(long, default_value_t = 0.2, conflicts_with = "set")]
    epsilon: f64,
    /// Use this stored set instead of constructing one
    #[arg(long)]
    set: Option<PathBuf>,
    /// Single input word
    #[arg(long, conflicts_with = "words")]
    word: Option<String>,
    /// File of input words, one per line
    #[arg(long)]
    words: Option<PathBuf>,
    /// Report exact acceptance probabilities
    #[arg(long, conflicts_with_all = ["shots", "seed"])]
    exact: bool,
    /// Sample this many end-to-end runs per word
    #[arg(long)]
    shots: Option<u64>,
    /// Seed for sampling
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

struct Failure {
    code: u8,
    msg: String,
}

fn usage(msg: String) -> Failure {
    Failure { code: 2, msg }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Io(_) | Error::Parse { .. } => 3,
            Error::Infeasible { .. }
            | Error::NoFeasibleD { .. }
            | Error::DescentFailed { .. }
            | Error::SoundnessViolation { .. } => 1,
            _ => 2,
        };
        Failure {
            code,
            msg: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure {
            code: 3,
            msg: e.to_string(),
        }
    }
}

/// 12 significant digits, scientific; the one format used for every
/// probability and bias figure so outputs diff cleanly.
fn fmt12(x: f64) -> String {
    format!("{x:.11e}")
}

/// 17 significant digits; matches the set-file gamma field.
fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::FindSet(a) => cmd_find_set(a),
        Cmd::ChooseD(a) => cmd_choose_d(a),
        Cmd::VerifySet(a) => cmd_verify_set(a),
        Cmd::VerifyAppendix(a) => cmd_verify_appendix(a),
        Cmd::SimulateMod(a) => cmd_simulate_mod(a),
        Cmd::SimulatePalindrome(a) => cmd_simulate_palindrome(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}

fn cmd_find_set(args: FindSetArgs) -> Result<u8, Failure> {
    let gamma = args.target.resolve()?;
    let group = CyclicGroup::new(args.n)?;
    let started = Instant::now();
    let d = match args.d {
        Some(d) => d,
        None => choose_d(group, gamma)?,
    };
    let (set, report) = find_set(group, d as usize, gamma)?;
    write_set(&args.out, &set)?;
    let elapsed = started.elapsed();
    println!("n={}", set.n());
    println!("d={}", set.d());
    println!("gamma={}", fmt17(set.gamma()));
    println!("phi_0={}", fmt12(report.phi_trace[0]));
    println!("phi_d={}", fmt12(report.phi_trace[set.d()]));
    println!("max_bias={}", fmt12(report.max_bias));
    println!("argmax_j={}", report.argmax_j);
    println!("sigma=pass");
    println!("elapsed_ms={}", elapsed.as_millis());
    println!("wrote={}", args.out.display());
    Ok(0)
}

fn cmd_choose_d(args: ChooseDArgs) -> Result<u8, Failure> {
    let gamma = args.target.resolve()?;
    let group = CyclicGroup::new(args.n)?;
    let d = choose_d(group, gamma)?;
    let state = smallbias_core::derandomizer::EstimatorState::new(group, d as usize, gamma)?;
    println!("n={}", args.n);
    println!("gamma={}", fmt17(gamma));
    println!("d={d}");
    println!("phi_0={}", fmt12(state.phi()));
    Ok(0)
}

fn cmd_verify_set(args: VerifySetArgs) -> Result<u8, Failure> {
    let mut set = read_set(&args.input)?;
    if let Some(g) = args.gamma {
        if !g.is_finite() || g <= 0.0 || g >= 1.0 {
            return Err(usage(format!("gamma must lie in (0,1), got {g}")));
        }
        set = ParameterSet::new(set.n(), g, set.ks().to_vec())?;
    }
    let report = sigma_check(&set);
    println!("n={}", set.n());
    println!("d={}", set.d());
    println!("gamma={}", fmt17(set.gamma()));
    println!("max_bias={}", fmt12(report.max_bias));
    println!("argmax_j={}", report.argmax_j);
    println!("sigma={}", if report.pass { "pass" } else { "fail" });
    if let Some(path) = &args.curve {
        write_bias_curve(path, &set)?;
    }
    Ok(if report.pass { 0 } else { 1 })
}

fn write_bias_curve(path: &Path, set: &ParameterSet) -> Result<(), Failure> {
    let table = CosTable::new(set.group());
    let mut out = String::from("j,bias,accept_prob\n");
    for j in 1..set.n() {
        let b = bias_at(set, &table, j);
        let _ = writeln!(out, "{j},{},{}", fmt12(b), fmt12(b * b));
    }
    std::fs::write(path, out)?;
    Ok(())
}

fn cmd_verify_appendix(args: VerifyAppendixArgs) -> Result<u8, Failure> {
    let mut rows = Vec::with_capacity(FIXTURES.len());
    match &args.fixtures {
        Some(dir) => {
            for (name, _) in FIXTURES {
                let text = std::fs::read_to_string(dir.join(name))?;
                rows.push(smallbias_core::set_file::parse_set(&text)?);
            }
        }
        None => {
            for (_, text) in FIXTURES {
                rows.push(smallbias_core::set_file::parse_set(text)?);
            }
        }
    }
    let mut passed = 0;
    for set in &rows {
        let report = sigma_check(set);
        println!(
            "p={} d={} max_bias={} {}",
            set.n(),
            set.d(),
            fmt12(report.max_bias),
            if report.pass { "pass" } else { "fail" }
        );
        passed += u32::from(report.pass);
    }
    println!(
        "rows={} passed={passed} failed={}",
        rows.len(),
        rows.len() as u32 - passed
    );
    Ok(if passed == rows.len() as u32 { 0 } else { 1 })
}

fn parse_j_range(raw: &str) -> Result<(u64, u64), Failure> {
    let err = || usage(format!("--j-range expects A..B with A ≤ B, got {raw:?}"));
    let (a, b) = raw.split_once("..").ok_or_else(err)?;
    let a: u64 = a.trim().parse().map_err(|_| err())?;
    let b: u64 = b.trim().parse().map_err(|_| err())?;
    if a > b {
        return Err(err());
    }
    Ok((a, b))
}

fn cmd_simulate_mod(args: SimulateModArgs) -> Result<u8, Failure> {
    let set = read_set(&args.set)?;
    let mut qfa = ModQfa::new(&set)?;
    let (lo, hi) = match (&args.j, &args.j_range) {
        (Some(j), None) => (*j, *j),
        (None, Some(raw)) => parse_j_range(raw)?,
        (None, None) => return Err(usage("one of --j or --j-range is required".into())),
        _ => unreachable!("clap conflict"),
    };
    let mut csv = String::from("j,closed,simulated,diff\n");
    for j in lo..=hi {
        let closed = qfa.accept_probability_closed(j);
        let sim = qfa.accept_probability_sim(j);
        let diff = sim - closed;
        if args.csv.is_some() {
            let _ = writeln!(csv, "{j},{},{},{}", fmt12(closed), fmt12(sim), fmt12(diff));
        } else {
            println!(
                "j={j} closed={} simulated={} diff={}",
                fmt12(closed),
                fmt12(sim),
                fmt12(diff)
            );
        }
    }
    if let Some(path) = &args.csv {
        std::fs::write(path, csv)?;
    }
    Ok(0)
}

fn cmd_simulate_palindrome(args: SimulatePalindromeArgs) -> Result<u8, Failure> {
    let shots = match (args.exact, args.shots) {
        (true, None) => None,
        (false, Some(s)) if s > 0 => Some(s),
        (false, Some(_)) => return Err(usage("--shots must be positive".into())),
        (true, Some(_)) => unreachable!("clap conflict"),
        (false, None) => return Err(usage("one of --exact or --shots N is required".into())),
    };
    let n = fingerprint_modulus(args.s)?;
    let set = match &args.set {
        Some(path) => read_set(path)?,
        None => {
            let gamma = args.epsilon.sqrt();
            if !gamma.is_finite() || gamma <= 0.0 || gamma >= 1.0 {
                return Err(usage(format!(
                    "epsilon must lie in (0,1), got {}",
                    args.epsilon
                )));
            }
            let d = default_d(args.s, args.epsilon)?;
            let group = CyclicGroup::new(n)?;
            find_set(group, d as usize, gamma)?.0
        }
    };
    let qfa = PalindromeQfa::new(args.s, set)?;
    println!("s={}", args.s);
    println!("n={}", qfa.n());
    println!("d={}", qfa.set().d());
    println!("gamma={}", fmt17(qfa.set().gamma()));
    let words: Vec<String> = match (&args.word, &args.words) {
        (Some(w), None) => vec![w.clone()],
        (None, Some(path)) => std::fs::read_to_string(path)?
            .lines()
            .map(str::to_owned)
            .collect(),
        (None, None) => return Err(usage("one of --word or --words is required".into())),
        _ => unreachable!("clap conflict"),
    };
    let mut violations = 0u32;
    for raw in &words {
        let word = match validate_promise(raw, args.s) {
            Ok(w) => w,
            Err(e) => {
                println!("word={raw} error={e}");
                violations += 1;
                continue;
            }
        };
        match shots {
            None => {
                let p = qfa.accept_probability_exact(&word);
                println!(
                    "word={raw} subwords={} prob={}",
                    word.subwords().len(),
                    fmt12(p)
                );
            }
            Some(shots) => {
                let (acc, rej) = qfa.accept_sampled(&word, shots, args.seed);
                println!(
                    "word={raw} shots={shots} seed={} accepted={acc} rejected={rej}",
                    args.seed
                );
            }
        }
    }
    Ok(if violations > 0 { 1 } else { 0 })
}
