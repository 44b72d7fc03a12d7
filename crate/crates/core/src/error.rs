use thiserror::Error;

/// Unified error type for the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("modulus must be at least 2, got {n}")]
    InvalidModulus { n: u64 },

    #[error("residue {h} out of range for modulus {n}")]
    ResidueOutOfRange { h: u64, n: u64 },

    #[error("dense oracle limited to n <= {limit}, got {n}")]
    OracleScale { n: u64, limit: u64 },

    #[error("estimator temperature must be finite and nonnegative, got {t}")]
    InvalidTemperature { t: f64 },

    #[error("bias target must be a finite value in (0,1), got {gamma}")]
    InvalidGamma { gamma: f64 },

    #[error("parameter set must contain at least one residue")]
    EmptySet,

    #[error("set has {got} residues but declares d={declared}")]
    LengthMismatch { declared: usize, got: usize },

    #[error("infeasible (n={n}, d={d}, gamma={gamma}): phi_0 = {phi0} is not below 1")]
    Infeasible {
        n: u64,
        d: usize,
        gamma: f64,
        phi0: f64,
    },

    #[error(
        "estimator descent failed at step {step}: best candidate phi {best} exceeds current phi {current}"
    )]
    DescentFailed {
        step: usize,
        current: f64,
        best: f64,
    },

    #[error(
        "soundness violation: phi_d = {phi} is below 1 but max |bias| = {max_bias} exceeds gamma = {gamma}"
    )]
    SoundnessViolation { phi: f64, max_bias: f64, gamma: f64 },

    #[error("no feasible set size d <= {cap} for n = {n}, gamma = {gamma}")]
    NoFeasibleD { n: u64, gamma: f64, cap: u64 },

    #[error("modulus {n} is not prime")]
    NonPrimeModulus { n: u64 },

    #[error("subword length must be even and at least 2, got {s}")]
    InvalidSubwordLength { s: usize },

    #[error("set modulus {got} does not match the fingerprint modulus 2^(s/2) = {expected}")]
    ModulusMismatch { expected: u64, got: u64 },

    #[error("promise violation at offset {offset}: {message}")]
    PromiseViolation { offset: usize, message: String },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
