use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Error)]
pub enum GaborError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("incompatible grids: {0}")]
    IncompatibleGrid(String),
    #[error("derivative undefined on an abstract (unit-spacing) grid")]
    DerivativeUndefined,
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),
    #[error("invalid coefficients: expected {expected} entries, got {got}")]
    InvalidCoefficients { expected: usize, got: usize },
    #[error("invalid operator: {0}")]
    InvalidOperator(String),
    #[error("invalid factorization: {0}")]
    InvalidFactorization(String),
    #[error("invalid shift: {0}")]
    InvalidShift(String),
    #[error("unsupported lattice: {0}")]
    UnsupportedLattice(String),
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("spectrum outside function domain: {0}")]
    SpectrumDomain(String),
    #[error("ill-posed contour: {0}")]
    IllPosedContour(String),
    #[error("not a frame: lower frame bound {lower:e} <= tolerance {tol:e}; use the pseudo-inverse dual for frame sequences")]
    NotAFrame { lower: f64, tol: f64 },
    #[error("ambiguous spectral gap: {message}; spectrum = {spectrum:?}")]
    AmbiguousGap { message: String, spectrum: Vec<f64> },
    #[error("resolution too low: {0}")]
    Resolution(String),
    #[error("invalid bump radii: {0}")]
    InvalidBump(String),
    #[error("alias guard violated: {0}")]
    Alias(String),
    #[error("index {n} outside coefficient block of radius {k}")]
    OutOfBlock { n: usize, k: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = GaborError> = std::result::Result<T, E>;
