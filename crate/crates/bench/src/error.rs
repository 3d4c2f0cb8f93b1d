use std::path::PathBuf;

use thiserror::Error;
use uisuggest_core::Stratum;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("critique has fewer than two sentences")]
    TooFewSentences,
    #[error("stratum {stratum} needs {needed} records from distinct screenshots, only {available} available")]
    InsufficientRecords {
        stratum: Stratum,
        needed: usize,
        available: usize,
    },
    #[error("split sizes sum to {sizes} but there are {tasks} tasks")]
    SizeMismatch { sizes: usize, tasks: usize },
    #[error("task {0} has fewer than two variant outputs")]
    MissingOutputs(String),
    #[error("annotator {annotator} annotated task {task} twice")]
    DuplicateAnnotation { annotator: String, task: String },
    #[error("annotation sets do not cover the same cells: {0}")]
    CoverageMismatch(String),
    #[error("sample is empty")]
    EmptySample,
    #[error("no informative pairs (all ties)")]
    NoInformativePairs,
    #[error("unknown variant or preset {0}")]
    UnknownVariant(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

impl BenchError {
    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> BenchError {
        let path = path.into();
        move |source| BenchError::Io { path, source }
    }
}
