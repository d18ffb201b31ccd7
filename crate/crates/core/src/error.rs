use std::path::PathBuf;

use crate::model::Violation;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid model: {}", join_violations(.0))]
    InvalidModel(Vec<Violation>),

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("degenerate constraint row {0}")]
    DegenerateRow(usize),

    #[error("row index {index} out of range for a model with {rows} rows")]
    RowOutOfRange { index: usize, rows: usize },

    #[error("simplex stall after {pivots} pivots")]
    SimplexStall { pivots: usize },

    #[error("budget exhausted after {nodes} branch-and-bound nodes")]
    BudgetExhausted { nodes: usize },

    #[error("box too large for enumeration: {points} lattice points (limit {limit})")]
    BoxTooLarge { points: f64, limit: u64 },

    #[error("enumeration requires every variable to be integral")]
    NotAllInteger,

    #[error("no positive examples in the dataset")]
    NoPositiveExamples,

    #[error("degenerate generator config: {0}")]
    Generator(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn join_violations(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
