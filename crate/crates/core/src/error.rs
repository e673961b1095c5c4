use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed shape or non-finite entries.
    #[error("structural input error: {0}")]
    Structural(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("size guard: {0}")]
    SizeGuard(String),
    #[error("not an L-ensemble: eigenvalue {eigenvalue} is at or above 1")]
    NotLEnsemble { eigenvalue: f64 },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("degenerate instance: {0}")]
    Degenerate(String),
    #[error("parameter error: {0}")]
    Parameter(String),
    #[error("expander quality: {0}")]
    ExpanderQuality(String),
    #[error("capacity error: {0}")]
    Capacity(String),
    #[error("unsatisfied clause {clause}: {detail}")]
    UnsatisfiedClause { clause: usize, detail: String },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("decode failure: {0}")]
    Decode(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short machine-readable tag, used in CLI error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Structural(_) => "structural",
            Error::Validation(_) => "validation",
            Error::Parse { .. } => "parse",
            Error::SizeGuard(_) => "size_guard",
            Error::NotLEnsemble { .. } => "not_l_ensemble",
            Error::Domain(_) => "domain",
            Error::Degenerate(_) => "degenerate",
            Error::Parameter(_) => "parameter",
            Error::ExpanderQuality(_) => "expander_quality",
            Error::Capacity(_) => "capacity",
            Error::UnsatisfiedClause { .. } => "unsatisfied_clause",
            Error::Precondition(_) => "precondition",
            Error::Decode(_) => "decode",
            Error::Internal(_) => "internal",
            Error::Io(_) => "io",
        }
    }

    /// True for failures reading or parsing input, as opposed to failed checks.
    pub fn is_input_error(&self) -> bool {
        matches!(self, Error::Io(_) | Error::Parse { .. })
    }

    pub(crate) fn from_json(err: serde_json::Error) -> Self {
        if err.is_io() {
            return Error::Io(err.into());
        }
        Error::Parse {
            line: err.line(),
            column: err.column(),
            message: err.to_string(),
        }
    }
}
