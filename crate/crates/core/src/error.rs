use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unknown potential kind `{0}`")]
    UnknownKind(String),
    #[error("power exponent {0} is not integrable on [0, pi] (need p > -1)")]
    NonIntegrableExponent(f64),
    #[error("table breakpoints must be strictly increasing")]
    NonMonotoneTable,
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),
    #[error("empty interval [{a}, {b}]")]
    EmptyInterval { a: f64, b: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("malformed potential document: {0}")]
    Parse(String),

    #[error("mesh too coarse: {cells} cells (minimum 16)")]
    MeshTooCoarse { cells: usize },
    #[error("non-finite state while propagating cell {cell}")]
    NonFinite { cell: usize },

    #[error("eigenvalue {n} not bracketed within probe range [{lo}, {hi}]")]
    BracketFailure { n: usize, lo: f64, hi: f64 },
    #[error("eigenvalues function not monotone at grid index ({i}, {j}) along {axis}")]
    MonotonicityViolation { i: usize, j: usize, axis: &'static str },

    #[error("zero at x = {x} has slope {slope}; zeros of nontrivial solutions are simple")]
    SlopeUnderflow { x: f64, slope: f64 },
    #[error("eigenfunction {expected} has {found} interior zeros")]
    CountMismatch { expected: usize, found: usize },
    #[error("zero ordinal {k} out of range ({len} zeros)")]
    IndexOutOfRange { k: usize, len: usize },
    #[error("proportionality ratio is degenerate at x = {x}")]
    DegenerateRatio { x: f64 },

    #[error("ambiguous zero linking at angle {angle}; refine the grid by a factor of {refine}")]
    LinkAmbiguity { angle: f64, refine: usize },
    #[error("no {0} event in the given bracket")]
    EventNotFound(String),
    #[error("invalid sweep plan: {0}")]
    InvalidPlan(String),
}

impl Error {
    /// Errors caused by user input rather than a numerical fault.
    pub fn is_user_error(&self) -> bool {
        matches!(
            self,
            Error::UnknownKind(_)
                | Error::NonIntegrableExponent(_)
                | Error::NonMonotoneTable
                | Error::DomainMismatch(_)
                | Error::EmptyInterval { .. }
                | Error::InvalidParameter(_)
                | Error::Parse(_)
                | Error::MeshTooCoarse { .. }
                | Error::InvalidPlan(_)
        )
    }
}
