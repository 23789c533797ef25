use thiserror::Error;

/// Errors raised by the decomposition library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("signal is empty")]
    EmptySignal,
    #[error("non-finite sample at index {index}")]
    NonFiniteSample { index: usize },
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("filter support too large: 2*{half_support}+1 does not fit period {period}")]
    SupportTooLarge { half_support: usize, period: usize },
    #[error("invalid half support {0}: must be at least 1")]
    InvalidHalfSupport(usize),
    #[error("all sampled filter weights are zero")]
    DegenerateFilter,
    #[error("invalid tabulated filter: {0}")]
    InvalidTable(String),
    #[error("length mismatch: signal has {signal} samples, filter period is {filter}")]
    LengthMismatch { signal: usize, filter: usize },
    #[error("asymmetric filter: imaginary spectral residue {residue:e} exceeds {tolerance:e}")]
    AsymmetryDetected { residue: f64, tolerance: f64 },
    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),
    #[error("damping base 1 - lambda[{bin}] = {base} lies outside [0, 1]")]
    DampingBaseOutOfRange { bin: usize, base: f64 },
    #[error("IDFT imaginary residue {residue:e} exceeds tolerance {tolerance:e}")]
    ResidualImaginary { residue: f64, tolerance: f64 },
    #[error("required N0 exceeds {limit}")]
    BoundOverflow { limit: u64 },
    #[error("too few extrema: found {found}, need at least 2")]
    TooFewExtrema { found: usize },
    #[error("flat spectrum: no bin rises above the amplitude floor")]
    FlatSpectrum,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("matrix size {n} exceeds oracle limit {limit}")]
    SizeGuard { n: usize, limit: usize },
    #[error("IMF {index}: {source}")]
    Imf {
        index: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("eigenvalue cache: {0}")]
    Cache(String),
}

pub type Result<T> = std::result::Result<T, Error>;
