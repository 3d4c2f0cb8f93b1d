//! Critique records: the benchmark's source pool.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use uisuggest_core::{area_fraction, stratum_of, RegionMark, Stratum};

use crate::io::parse_jsonl;
use crate::sentence::split_sentences;
use crate::BenchError;

/// One designer critique with the screen region it refers to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CritiqueRecord {
    pub screenshot_id: String,
    /// Screenshot path; relative paths resolve against the records file.
    pub image: PathBuf,
    #[serde(rename = "critique")]
    pub critique_text: String,
    pub bbox: RegionMark,
}

impl CritiqueRecord {
    pub fn stratum(&self) -> Stratum {
        stratum_of(area_fraction(&self.bbox, (1, 1))).expect("region marks lie inside the unit square")
    }
}

/// Loads a records JSONL file. Records whose critique has fewer than two
/// sentences are rejected with their line number.
pub fn load_records(path: &Path) -> Result<Vec<CritiqueRecord>, BenchError> {
    let text = fs::read_to_string(path).map_err(BenchError::io(path))?;
    let records: Vec<CritiqueRecord> = parse_jsonl(path, &text)?;
    let lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, _)| i + 1);
    let base = path.parent().unwrap_or(Path::new(""));
    records
        .into_iter()
        .zip(lines)
        .map(|(mut r, line)| {
            if split_sentences(&r.critique_text).len() < 2 {
                return Err(BenchError::Parse {
                    path: path.to_path_buf(),
                    line,
                    message: "critique has fewer than two sentences".into(),
                });
            }
            if r.image.is_relative() {
                r.image = base.join(&r.image);
            }
            Ok(r)
        })
        .collect()
}

#[derive(Debug, Deserialize)]
struct UicritRow {
    rico_id: String,
    comment: String,
    x: f64,
    y: f64,
    w: f64,
    h: f64,
}

/// Outcome of converting a UICrit export.
#[derive(Debug, Default)]
pub struct Conversion {
    pub records: Vec<CritiqueRecord>,
    /// (line, reason) for rows that were left out.
    pub skipped: Vec<(usize, String)>,
}

/// Converts a flat UICrit export with columns
/// `rico_id,comment,x,y,w,h` (box normalized to the screenshot) into
/// critique records. Screenshots are expected at `<images_dir>/<rico_id>.jpg`.
/// Rows with an invalid box or a single-sentence comment are skipped.
pub fn convert_uicrit_csv(path: &Path, images_dir: &Path) -> Result<Conversion, BenchError> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| BenchError::Parse {
        path: path.to_path_buf(),
        line: 0,
        message: e.to_string(),
    })?;
    let mut out = Conversion::default();
    for (i, row) in reader.deserialize::<UicritRow>().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| BenchError::Parse {
            path: path.to_path_buf(),
            line,
            message: e.to_string(),
        })?;
        let bbox = match RegionMark::new(row.x, row.y, row.w, row.h) {
            Ok(b) => b,
            Err(e) => {
                out.skipped.push((line, e.to_string()));
                continue;
            }
        };
        if split_sentences(&row.comment).len() < 2 {
            out.skipped.push((line, "fewer than two sentences".into()));
            continue;
        }
        out.records.push(CritiqueRecord {
            image: images_dir.join(format!("{}.jpg", row.rico_id)),
            screenshot_id: row.rico_id,
            critique_text: row.comment,
            bbox,
        });
    }
    Ok(out)
}
