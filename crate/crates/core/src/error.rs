use thiserror::Error;

pub type Result<T> = std::result::Result<T, PqcError>;

#[derive(Debug, Error)]
pub enum PqcError {
    #[error("{0} is not an odd prime")]
    InvalidPrime(u64),

    #[error("prime mismatch: {left} vs {right}")]
    PrimeMismatch { left: u64, right: u64 },

    #[error("malformed Prüfer element {0:?}")]
    MalformedElement(String),

    #[error("level {level} is too large for p = {p} (p^level must fit in 64 bits)")]
    LevelOverflow { p: u64, level: u32 },

    #[error("frequency of norm {norm} is not constant on cosets of level {level}")]
    NormExceedsLevel { norm: u64, level: u32 },

    #[error("requested level {requested} is below the current level {current}")]
    LevelBelowCurrent { requested: u32, current: u32 },

    #[error("length {len} does not match p^level = {expected}")]
    LengthMismatch { len: usize, expected: usize },

    #[error("invalid exponent {0}")]
    InvalidExponent(f64),

    #[error("invalid Besov parameters q = {q}, r = {r}, s = {s}: {reason}")]
    InvalidBesov { q: f64, r: f64, s: f64, reason: &'static str },

    #[error("coset {coset} out of range for level {level}")]
    CosetOutOfRange { coset: u64, level: u32 },

    #[error("unknown builtin function {0:?}")]
    UnknownBuiltin(String),

    #[error("invalid function spec: {0}")]
    InvalidSpec(String),

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("dimension {dim} exceeds the dense cap {cap}; use the matrix-free path")]
    DenseCapExceeded { dim: usize, cap: usize },

    #[error("spectrum has no exact rational representation")]
    NotExact,

    #[error("the kernel reading {0} gives a vanishing kernel; Γ cannot be calibrated")]
    DegenerateKernel(&'static str),

    #[error("invalid tolerance override {0:?}")]
    InvalidTolerance(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
