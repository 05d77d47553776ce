use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("constant coefficient matrix is singular")]
    NotInvertible,

    /// The power series did not terminate within the bound, i.e. the inverse is
    /// a rational (non-polynomial) matrix, which happens for cyclic dependencies.
    #[error("no polynomial inverse of degree <= {bound}")]
    TruncationExceeded { bound: usize },

    #[error("network validation failed: {0}")]
    Validation(String),

    #[error("sink `{sink}` is unreachable from the source")]
    ZeroCapacity { sink: String },

    #[error("transfer matrix of sink `{sink}` is not full rank")]
    NotFullRank { sink: String },

    #[error("free distance search exceeded depth {depth} without returning to the zero state")]
    DepthExceeded { depth: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("window parameter l={l} is shorter than the transfer degree l_t={l_t}")]
    WindowTooShort { l: usize, l_t: usize },

    #[error("network has {edges} edges, above the enumeration cap of {cap}")]
    TooLarge { edges: usize, cap: usize },

    #[error(
        "no window length up to {cap} has a trivial intersection; blocking window {collision}"
    )]
    NotFound { cap: usize, collision: String },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("undecodable: every survivor was pruned in window [{start},{end}]")]
    Undecodable { start: usize, end: usize },

    #[error("p={p} is not admissible for {edges} edges (q would be negative)")]
    InvalidProbability { p: f64, edges: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
