use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A diagonal exponential multiplier would exceed the double-precision
    /// range guard. Callers integrating with the factorized FFT bilinear
    /// path may fall back to the direct-convolution oracle.
    #[error("overflow guard tripped: exponent magnitude {exponent:.3} exceeds cap {cap}")]
    OverflowGuard { exponent: f64, cap: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// A wavevector outside the representable mean-zero Hermitian set.
    #[error("invalid mode {k:?}: {reason}")]
    InvalidMode { k: (i32, i32), reason: String },

    /// Inverse transform of a field whose coefficients are not Hermitian
    /// symmetric leaves a non-negligible imaginary residue.
    #[error("non-real residue: max |Im| = {residue:.3e} exceeds {tol:.3e} (Hermitian symmetry violated upstream)")]
    NonRealResidue { residue: f64, tol: f64 },

    /// Time span is not an integral number of steps.
    #[error("non-integral step count: span {span} / step {step}")]
    NonIntegralSteps { span: f64, step: f64 },

    /// The O(N^4) direct convolution is capped to small grids.
    #[error("direct convolution soft cap exceeded: N = {n} > {cap}")]
    SoftCapExceeded { n: usize, cap: usize },

    /// A diagnostic was requested outside its hypothesis region
    /// (e.g. the bilinear pairing bound requires phi - nu*W >= 0).
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("NaN detected at t = {t}: {context}")]
    NanDetected { t: f64, context: String },

    #[error("insufficient spectral shells: have {have}, need {need}")]
    InsufficientShells { have: usize, need: usize },

    #[error("snapshot format error: {0}")]
    SnapshotFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
