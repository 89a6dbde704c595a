use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("generator index {index} out of range for {strands} strands")]
    BadGenerator { index: usize, strands: usize },

    #[error("cannot parse braid word: {0}")]
    Parse(String),

    #[error("strand count mismatch: {left} vs {right}")]
    StrandMismatch { left: usize, right: usize },

    #[error("invalid permutation: {0}")]
    BadPermutation(String),

    #[error("closure has vanishing Alexander determinant")]
    DegenerateClosure,

    #[error("root finder did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("point is not in V_n: {0}")]
    NotInV(String),

    #[error("fiber incomplete: found {found} of {expected} preimages")]
    FiberIncomplete { found: usize, expected: usize },

    #[error("base configuration is not generic: {0}")]
    NonGenericBase(String),

    #[error("no consistent matching with reference: {0}")]
    NoConsistentMatching(String),

    #[error("path leaves V_n at t = {t}")]
    LeavesV { t: f64 },

    #[error("path tracking failed at t = {t}: step size fell below {h_min}")]
    PathTrackingFailure { t: f64, h_min: f64 },

    #[error("lift endpoint does not match any fiber label")]
    EndpointUnmatched,

    #[error("projection is degenerate near t = {t}; resample or perturb the base")]
    DegenerateProjection { t: f64 },

    #[error("no wreath table for generator {0}")]
    MissingTable(usize),

    #[error("requested depth {requested} exceeds the configured maximum {max}")]
    DepthExceeded { requested: usize, max: usize },

    #[error("enumeration budget exceeded ({0} elements)")]
    EnumerationBudgetExceeded(usize),

    #[error("invalid adic prefix: {0}")]
    BadPrefix(String),

    #[error("sequences were computed over different base points")]
    BasePointMismatch,

    #[error("theorem word index {0} is not in 1..=5")]
    BadIndex(u8),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
