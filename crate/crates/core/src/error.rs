use thiserror::Error;

/// A single constraint violation found while validating an instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// JSON-pointer-like location, e.g. `clusters[3]` or `weights[1][0]`.
    pub field: String,
    pub message: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid instance: {}", join(.0))]
    Invalid(Vec<Violation>),

    #[error("edge ({left}, {right}) out of range for a {m}x{n} instance")]
    EdgeOutOfRange {
        left: usize,
        right: usize,
        m: usize,
        n: usize,
    },

    #[error("duplicate edge ({0}, {1}) in matching")]
    DuplicateEdge(usize, usize),

    #[error("edge ({0}, {1}) is already selected")]
    EdgeAlreadySelected(usize, usize),

    #[error("dense block matrix needs {required} entries, cap is {cap}")]
    SizeCapExceeded { required: u64, cap: u64 },

    #[error("enumeration needs 2^{edges} subsets, budget allows {budget}")]
    EnumerationBudget { edges: usize, budget: u64 },

    #[error("enumeration exceeded its time budget of {0:?}")]
    EnumerationTimeout(std::time::Duration),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("internal error: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn join(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
