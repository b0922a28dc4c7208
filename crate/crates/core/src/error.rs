use std::path::PathBuf;

use crate::corpus::Violation;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}:{line}: {msg}")]
    Parse { path: PathBuf, line: usize, msg: String },
    #[error("document `{id}` is invalid: {}", join_violations(.violations))]
    InvalidDocument { id: String, violations: Vec<Violation> },
    #[error("duplicate document id `{0}`")]
    DuplicateId(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("class {0} has no labelled documents, appearance prior is undefined")]
    EmptyClass(usize),
    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },
    #[error("matrix is not symmetric positive-definite")]
    NotSpd,
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("vocabulary mismatch: model has {model}, corpus has {corpus}")]
    VocabMismatch { model: usize, corpus: usize },
    #[error("unknown document ids in predictions: {}", .0.join(", "))]
    UnknownIds(Vec<String>),
    #[error("unsupported model file: {0}")]
    ModelFormat(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
