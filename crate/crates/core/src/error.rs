//! Crate-wide error type.

use thiserror::Error;

/// Broad failure category, used by callers (e.g. the CLI) to map errors to
/// exit codes: bad input vs. a numeric/convergence problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// The caller supplied something malformed or out of domain.
    Input,
    /// The computation itself failed (singular matrix, degenerate fit, ...).
    Numeric,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("self loop on vertex `{0}`")]
    SelfLoop(String),

    #[error("duplicate vertex label `{0}`")]
    DuplicateVertex(String),

    #[error("sets overlap on `{0}`; they must be pairwise disjoint")]
    OverlappingSets(String),

    #[error("{0}")]
    InvalidArgument(String),

    #[error("family {inner} is contained in {outer}; input families must be mutually incomparable")]
    NotMaximalFamily { inner: String, outer: String },

    #[error("graph has {0} vertices; enumeration is limited to 64")]
    TooManyVertices(usize),

    #[error("table would have {cells} cells; the oracle is limited to {limit}")]
    TableTooLarge { cells: u128, limit: usize },

    #[error("potential scope {{{0}}} is not a clique of the graph")]
    ScopeNotClique(String),

    #[error("all cells have zero mass; cannot normalize")]
    ZeroNormalizer,

    #[error("tables have different variable structure: {0}")]
    StructureMismatch(String),

    #[error("fitted count is 0 where observed count is {observed} (cell {cell})")]
    DegenerateFit { cell: String, observed: f64 },

    #[error("graph is not decomposable; fit it with iterative proportional fitting instead")]
    NotDecomposable,

    #[error("blocks and conditioning set must partition the table variables: {0}")]
    NotAPartition(String),

    #[error("singular matrix: {0}")]
    SingularMatrix(String),

    #[error("need at least {needed} observations, found {found}")]
    TooFewObservations { needed: usize, found: usize },

    #[error("partial correlation has magnitude 1; deviance is infinite")]
    DegenerateCorrelation,

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },

    #[error("series/continued fraction failed to converge for a={a}, x={x}")]
    SpecialFunction { a: f64, x: f64 },
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::DegenerateFit { .. }
            | Error::SingularMatrix(_)
            | Error::DegenerateCorrelation
            | Error::SpecialFunction { .. } => ErrorKind::Numeric,
            _ => ErrorKind::Input,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
