use std::io;
use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("trace line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("trace line {line}: {message}")]
    Validation { line: usize, message: String },
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config syntax: {0}")]
    Syntax(String),
    #[error("config field `{field}`: {message}")]
    Field { field: String, message: String },
    #[error("config fields `{first}` and `{second}` conflict: {message}")]
    Conflict {
        first: String,
        second: String,
        message: String,
    },
    #[error("unknown preset `{name}`; available: {}", available.join(", "))]
    UnknownPreset {
        name: String,
        available: Vec<String>,
    },
    #[error("unknown sweep axis `{name}`; valid axes: {}", valid.join(", "))]
    UnknownAxis { name: String, valid: Vec<String> },
    #[error("reading {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Trace(#[from] TraceError),
}

impl ConfigError {
    pub fn field(field: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError::Field {
            field: field.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{path}: schema error: {message}")]
    Schema { path: PathBuf, message: String },
    #[error("{path} line {line}: {message}")]
    Record {
        path: PathBuf,
        line: u64,
        message: String,
    },
}

/// Streaming accumulators disagree with the recomputation from packet records.
#[derive(Debug, Error, PartialEq)]
#[error("flow {flow_id}: field `{field}` streaming={streaming} recomputed={recomputed}")]
pub struct OracleMismatch {
    pub flow_id: u32,
    pub field: &'static str,
    pub streaming: String,
    pub recomputed: String,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Output(#[from] OutputError),
    #[error(transparent)]
    Oracle(#[from] OracleMismatch),
    #[error(transparent)]
    Trace(#[from] TraceError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
