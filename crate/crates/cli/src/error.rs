use asymlab::asymptotics::AsymptoticError;
use asymlab::constructor::ConstructorError;
use asymlab::shifts::ShiftError;
use asymlab::similarity::SimilarityError;
use asymlab::MatrixError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("schema error in {path} at line {line}, column {column}, field `{field}`: {message}")]
    Schema {
        path: String,
        line: usize,
        column: usize,
        field: String,
        message: String,
    },
    #[error("tolerance conflict: kernel_tol = {kernel_tol:e} exceeds eig_tol·10³ = {limit:e}")]
    ToleranceConflict { kernel_tol: f64, limit: f64 },
    #[error("invalid override --{name}: {value} must be positive and finite")]
    InvalidOverride { name: &'static str, value: f64 },
    #[error("`{0}` requires --input")]
    MissingInput(&'static str),
    #[error("unknown suite {0:?}; expected acceptance, shift-crossval or constructor")]
    UnknownSuite(String),
    #[error("rejected: {0}")]
    Rejected(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    /// 2 for rejected hypotheses and invalid input, 1 for internal failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } | CliError::Internal(_) => 1,
            _ => 2,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Schema { .. } => "SchemaError",
            CliError::ToleranceConflict { .. } => "ToleranceConflict",
            CliError::InvalidOverride { .. } => "InvalidOverride",
            CliError::MissingInput(_) => "MissingInput",
            CliError::UnknownSuite(_) => "UnknownSuite",
            CliError::Rejected(_) => "HypothesisRejected",
            CliError::Io { .. } => "IoError",
            CliError::Internal(_) => "InternalError",
        }
    }
}

impl From<MatrixError> for CliError {
    fn from(e: MatrixError) -> Self {
        match e {
            MatrixError::InvalidData { .. }
            | MatrixError::NonFinite { .. }
            | MatrixError::NotSquare { .. }
            | MatrixError::DimensionMismatch { .. } => CliError::Rejected(e.to_string()),
            _ => CliError::Internal(e.to_string()),
        }
    }
}

impl From<AsymptoticError> for CliError {
    fn from(e: AsymptoticError) -> Self {
        match e {
            AsymptoticError::Matrix(m) => m.into(),
            AsymptoticError::NotPowerBounded { .. }
            | AsymptoticError::NotAContraction { .. }
            | AsymptoticError::BanachDependent
            | AsymptoticError::NotUnitary { .. } => CliError::Rejected(e.to_string()),
            _ => CliError::Internal(e.to_string()),
        }
    }
}

impl From<SimilarityError> for CliError {
    fn from(e: SimilarityError) -> Self {
        match e {
            SimilarityError::Matrix(m) => m.into(),
            SimilarityError::Asymptotic(a) => a.into(),
            other => CliError::Rejected(other.to_string()),
        }
    }
}

impl From<ShiftError> for CliError {
    fn from(e: ShiftError) -> Self {
        CliError::Rejected(e.to_string())
    }
}

impl From<ConstructorError> for CliError {
    fn from(e: ConstructorError) -> Self {
        match e {
            ConstructorError::HypothesisViolation(_)
            | ConstructorError::InvalidSpec(_)
            | ConstructorError::EmptyWindow => CliError::Rejected(e.to_string()),
            _ => CliError::Internal(e.to_string()),
        }
    }
}
