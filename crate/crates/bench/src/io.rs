use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use uisuggest_core::fsutil::atomic_write;

use crate::BenchError;

/// Reads one JSON value per non-blank line; errors carry 1-based line numbers.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, BenchError> {
    let text = fs::read_to_string(path).map_err(BenchError::io(path))?;
    parse_jsonl(path, &text)
}

pub(crate) fn parse_jsonl<T: DeserializeOwned>(path: &Path, text: &str) -> Result<Vec<T>, BenchError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| BenchError::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<(), BenchError> {
    let mut out = String::new();
    for item in items {
        out.push_str(&serde_json::to_string(item).expect("bench records serialize"));
        out.push('\n');
    }
    atomic_write(path, out.as_bytes()).map_err(BenchError::io(path))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), BenchError> {
    let mut text = serde_json::to_string_pretty(value).expect("bench records serialize");
    text.push('\n');
    atomic_write(path, text.as_bytes()).map_err(BenchError::io(path))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, BenchError> {
    let text = fs::read_to_string(path).map_err(BenchError::io(path))?;
    serde_json::from_str(&text).map_err(|e| BenchError::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        message: e.to_string(),
    })
}
