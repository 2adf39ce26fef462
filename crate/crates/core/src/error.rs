use thiserror::Error;

/// Errors produced anywhere in the verification pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: String,
        found: String,
    },

    #[error("{context}: matrix is not square ({rows}x{cols})")]
    NotSquare {
        context: &'static str,
        rows: usize,
        cols: usize,
    },

    #[error("numerical decomposition failed: {0}")]
    Decomposition(String),

    #[error("algebra closure did not stabilize: {0}")]
    ClosureFailure(String),

    #[error("{axiom} violated (residual {residual:.3e})")]
    AxiomViolation { axiom: String, residual: f64 },

    #[error("missing structure: {0}")]
    MissingStructure(&'static str),

    #[error("sign relation undetectable: {0}")]
    UndetectableSign(String),

    #[error("sign profile matches no KO-dimension column: {0}")]
    NoKoMatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("reference count deviates: {what} expected {expected}, found {found}")]
    CountMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("reference claim violated: {0}")]
    ClaimViolation(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
