use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("mode index {index} out of range for {modes} modes")]
    ModeOutOfRange { index: usize, modes: usize },

    #[error("partition {n_alice}+{n_bob} invalid: each party needs at least one mode and the total may not exceed {cap}")]
    InvalidPartition { n_alice: usize, n_bob: usize, cap: usize },

    #[error("bitstring {bitstring:?} does not match {modes} modes")]
    BadBitstring { bitstring: String, modes: usize },

    #[error("superselection violated: state mixes even and odd occupation parity")]
    Superselection,

    #[error("zero vector")]
    ZeroVector,

    #[error("state is not normalized (norm² = {norm_sqr})")]
    NotNormalized { norm_sqr: f64 },

    #[error("prior probability {0} outside (0, 1)")]
    InvalidPrior(f64),

    #[error("states live on different partitions")]
    PartitionMismatch,

    #[error("expected a state in the global {expected} sector")]
    WrongSector { expected: &'static str },

    #[error("states are not orthogonal (|<psi|phi>| = {overlap:e})")]
    NotOrthogonal { overlap: f64 },

    #[error("state is not confined to a single local-parity subspace (E or O)")]
    MixedSubspace,

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix trace {trace:e} is not negligible")]
    TraceNotZero { trace: f64 },

    #[error("ancilla coefficients not normalized: |a|²+|b|² = {0}")]
    AncillaNotNormalized(f64),

    #[error("the states are not perfectly LOCC-discriminable")]
    NotPerfectlyDiscriminable,

    #[error("malformed protocol: {0}")]
    MalformedProtocol(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{path}:{line}: {message}")]
    Parse { path: String, line: usize, message: String },

    #[error("numerical non-convergence: {0}")]
    NonConvergence(String),

    #[error("{path}: {source}")]
    File { path: String, source: std::io::Error },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Adapter for `map_err` that attaches the offending path to an IO error.
    pub fn file(path: &std::path::Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
        move |source| Error::File { path: path.display().to_string(), source }
    }

    /// Process exit code used by the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NonConvergence(_) => 3,
            Error::Io(_) | Error::File { .. } => 1,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
