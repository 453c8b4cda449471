use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate edge {edge}: length {length:e} below minimum")]
    DegenerateEdge { edge: usize, length: f64 },

    #[error("did not converge after {iterations} iterations (residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("non-manifold complex: {0}")]
    NonManifold(String),

    #[error("inconsistent orientation: {0}")]
    Orientation(String),

    #[error("genus {0} not supported, need genus >= 2")]
    Genus(i64),

    #[error("rank deficiency: {0}")]
    Rank(String),

    #[error("dual surface does not close: residual {0:e}")]
    Closure(f64),

    #[error("non-positive vertex weight {value:e} at vertex {vertex}")]
    NegativeWeight { vertex: usize, value: f64 },

    #[error("vertex weight spread {spread:e} at vertex {vertex} exceeds tolerance")]
    InconsistentWeight { vertex: usize, spread: f64 },

    #[error("dual edge {edge} is not space-like (squared norm {norm2:e})")]
    NonSpacelike { edge: usize, norm2: f64 },

    #[error("cotangent pole at edge {edge} (argument {argument})")]
    CotangentPole { edge: usize, argument: f64 },

    #[error("invalid triangle side lengths ({0}, {1}, {2})")]
    Triangle(f64, f64, f64),

    #[error("energy table is not increasing: {0}")]
    Monotonicity(String),

    #[error("{path}: {message}")]
    Io { path: String, message: String },

    #[error("{}{line}:{column}: {message}", .file.as_deref().map(|f| format!("{f}:")).unwrap_or_default())]
    Parse {
        file: Option<String>,
        line: usize,
        column: usize,
        message: String,
    },
}

impl Error {
    /// Input problems (exit code 3) as opposed to solver failures (exit
    /// code 2).
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. }
                | Error::Io { .. }
                | Error::Domain(_)
                | Error::Genus(_)
                | Error::Orientation(_)
                | Error::NonManifold(_)
                | Error::Monotonicity(_)
        )
    }

    pub fn exit_code(&self) -> i32 {
        if self.is_input_error() {
            3
        } else {
            2
        }
    }

    pub(crate) fn parse(line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            file: None,
            line,
            column,
            message: message.into(),
        }
    }

    /// Attaches the file name to a parse error.
    pub fn in_file(self, path: &std::path::Path) -> Self {
        match self {
            Error::Parse { file: None, line, column, message } => Error::Parse {
                file: Some(path.display().to_string()),
                line,
                column,
                message,
            },
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
