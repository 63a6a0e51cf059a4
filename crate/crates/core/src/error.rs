use serde::Serialize;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error in {op}: {msg}")]
    Config { op: &'static str, msg: String },

    #[error("invalid argument to {op}: {msg}")]
    Argument { op: &'static str, msg: String },

    #[error("boundary error in {op}: {msg}")]
    Boundary {
        op: &'static str,
        msg: String,
        at: Option<Vec<i64>>,
    },

    #[error("resource exhausted in {op}: {msg}")]
    Resource { op: &'static str, msg: String },

    #[error("identical patterns at {a:?} and {b:?} tie for the marker decision (local periodicity)")]
    MarkerTie { a: Vec<i64>, b: Vec<i64> },

    #[error("no completion found for family member {member} written at {at:?} within a budget of {budget} candidates")]
    Completion {
        member: usize,
        at: Vec<i64>,
        budget: usize,
    },

    #[error("marker {at:?} sees {found} secondary markers in its Følner box, needs {needed}")]
    InsufficientMarkers {
        at: Vec<i64>,
        found: usize,
        needed: usize,
    },

    #[error("corrupt window at {at:?}: {msg}")]
    Corruption { at: Vec<i64>, msg: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn config(op: &'static str, msg: impl Into<String>) -> Self {
        Error::Config { op, msg: msg.into() }
    }

    pub fn argument(op: &'static str, msg: impl Into<String>) -> Self {
        Error::Argument { op, msg: msg.into() }
    }

    pub fn boundary(op: &'static str, msg: impl Into<String>) -> Self {
        Error::Boundary {
            op,
            msg: msg.into(),
            at: None,
        }
    }

    pub fn resource(op: &'static str, msg: impl Into<String>) -> Self {
        Error::Resource { op, msg: msg.into() }
    }

    /// Fully qualified `module::operation` that raised the error.
    pub fn operation(&self) -> &'static str {
        match self {
            Error::Config { op, .. }
            | Error::Argument { op, .. }
            | Error::Boundary { op, .. }
            | Error::Resource { op, .. } => op,
            Error::MarkerTie { .. } => "markers::markers",
            Error::Completion { .. } | Error::InsufficientMarkers { .. } => {
                "construction::apply_stage"
            }
            Error::Corruption { .. } => "construction::recover_base",
            Error::Json(_) | Error::Io(_) => "pipeline::io",
        }
    }

    pub fn module(&self) -> &'static str {
        let op = self.operation();
        op.split("::").next().unwrap_or(op)
    }

    /// Offending group coordinates, when the error is tied to a position.
    pub fn coordinates(&self) -> Vec<Vec<i64>> {
        match self {
            Error::Boundary { at: Some(at), .. } => vec![at.clone()],
            Error::MarkerTie { a, b } => vec![a.clone(), b.clone()],
            Error::Completion { at, .. }
            | Error::InsufficientMarkers { at, .. }
            | Error::Corruption { at, .. } => vec![at.clone()],
            _ => Vec::new(),
        }
    }

    /// Process exit code: 3 for configuration and argument errors, 4 for
    /// exhausted resources and search budgets, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::Argument { .. } | Error::Json(_) => 3,
            Error::Resource { .. }
            | Error::Boundary { .. }
            | Error::Completion { .. }
            | Error::InsufficientMarkers { .. } => 4,
            _ => 1,
        }
    }

    pub fn record(&self) -> ErrorRecord {
        ErrorRecord {
            module: self.module(),
            operation: self.operation(),
            message: self.to_string(),
            coordinates: self.coordinates(),
            exit_code: self.exit_code(),
        }
    }
}

/// Machine-readable form of an [`Error`].
#[derive(Clone, Debug, Serialize)]
pub struct ErrorRecord {
    pub module: &'static str,
    pub operation: &'static str,
    pub message: String,
    pub coordinates: Vec<Vec<i64>>,
    pub exit_code: i32,
}
