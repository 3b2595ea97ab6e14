//! Error type shared across the toolkit.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("invalid schema: {0}")]
    InvalidSchema(String),
    #[error("column {0:?} required by the schema is missing from the file")]
    MissingColumn(String),
    #[error("row {row}, column {column:?}: cannot parse {value:?}")]
    ParseError {
        row: usize,
        column: String,
        value: String,
    },
    #[error("row {row}, column {column:?}: value {value:?} is not a schema category")]
    CategoryUnknown {
        row: usize,
        column: String,
        value: String,
    },
    #[error("file contains no data rows")]
    EmptyData,
    #[error("unknown variable {0:?}")]
    UnknownVariable(String),
    #[error("datasets have different schemas ({0})")]
    SchemaMismatch(String),
    #[error("contingency tables cover different variables")]
    TableMismatch,

    #[error("design matrix is rank deficient; offending columns: {0:?}")]
    RankDeficient(Vec<String>),
    #[error("logistic response must be 0/1")]
    NotBinaryResponse,
    #[error("no convergence after {iterations} iterations (last max |score| = {score:.3e})")]
    NoConvergence { iterations: usize, score: f64 },
    #[error("fit did not converge")]
    NotConverged,
    #[error("confidence level must lie strictly between 0 and 1, got {0}")]
    InvalidLevel(f64),
    #[error("design has fewer rows than columns ({n} rows, {p} columns)")]
    TooFewRows { n: usize, p: usize },

    #[error("dataset is empty")]
    EmptyDataset,
    #[error("row {row}: rules assign conflicting values to {variable:?}")]
    RuleConflict { row: usize, variable: String },
    #[error("invalid data rule: {0}")]
    InvalidRule(String),

    #[error("no utility components available")]
    NoComponents,
    #[error("no synthetic datasets to evaluate")]
    NoSubjects,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
