//! Annotation files from the blinded annotator view.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{BenchError, BundleKey};

/// Scores one annotator gave one variant of one task.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scores {
    /// Preference rank, 1 = best, no ties within a task.
    pub rank: u32,
    pub resolution: u8,
    pub fidelity: u8,
    pub robustness: u8,
}

/// One annotator's judgement of all variants of one task, keyed by variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub annotator_id: String,
    pub task_id: String,
    pub variants: BTreeMap<String, Scores>,
}

impl AnnotationRecord {
    /// Checks the rank permutation and score ranges.
    pub fn validate(&self) -> Result<(), String> {
        let k = self.variants.len() as u32;
        if k == 0 {
            return Err("no variants".into());
        }
        let ranks: BTreeSet<u32> = self.variants.values().map(|s| s.rank).collect();
        if ranks.len() != k as usize || ranks.iter().any(|&r| r < 1 || r > k) {
            let mut got: Vec<u32> = self.variants.values().map(|s| s.rank).collect();
            got.sort();
            return Err(format!("ranks {got:?} are not a permutation of 1..={k}"));
        }
        for (v, s) in &self.variants {
            for (name, score) in [
                ("resolution", s.resolution),
                ("fidelity", s.fidelity),
                ("robustness", s.robustness),
            ] {
                if !(1..=3).contains(&score) {
                    return Err(format!("{v}: {name} score {score} is outside 1..=3"));
                }
            }
        }
        Ok(())
    }
}

/// A JSONL row as the annotator view writes it, keyed by blinded label.
#[derive(Debug, Deserialize)]
struct LabeledRow {
    annotator_id: String,
    task_id: String,
    entries: BTreeMap<String, Scores>,
}

#[derive(Debug, Deserialize)]
struct CsvRow {
    annotator_id: String,
    task_id: String,
    label: String,
    rank: u32,
    resolution: u8,
    fidelity: u8,
    robustness: u8,
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> BenchError {
    BenchError::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

/// Maps blinded labels to variants. Without a key the labels are taken to
/// be variant names already.
fn resolve(
    key: Option<&BundleKey>,
    task_id: &str,
    entries: BTreeMap<String, Scores>,
) -> Result<BTreeMap<String, Scores>, String> {
    let Some(key) = key else {
        return Ok(entries);
    };
    let labels = key
        .tasks
        .get(task_id)
        .ok_or_else(|| format!("task {task_id} is not in the bundle key"))?;
    let given: BTreeSet<&String> = entries.keys().collect();
    let expected: BTreeSet<&String> = labels.keys().collect();
    if given != expected {
        return Err(format!("labels {given:?} do not match bundle labels {expected:?}"));
    }
    Ok(entries
        .into_iter()
        .map(|(label, s)| (labels[&label].clone(), s))
        .collect())
}

/// Reads annotations from `.jsonl` (one row per annotator and task with
/// per-label `entries`) or `.csv` (columns
/// `annotator_id,task_id,label,rank,resolution,fidelity,robustness`, one row
/// per label). Errors carry the offending line.
pub fn ingest_annotations(
    path: &Path,
    key: Option<&BundleKey>,
) -> Result<Vec<AnnotationRecord>, BenchError> {
    // (annotator, task) -> (first line, entries)
    let mut rows: Vec<(usize, String, String, BTreeMap<String, Scores>)> = Vec::new();
    let is_csv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    if is_csv {
        let mut reader = csv::Reader::from_path(path).map_err(|e| parse_err(path, 0, e.to_string()))?;
        let mut groups: BTreeMap<(String, String), usize> = BTreeMap::new();
        for (i, row) in reader.deserialize::<CsvRow>().enumerate() {
            let line = i + 2;
            let row = row.map_err(|e| parse_err(path, line, e.to_string()))?;
            let scores = Scores {
                rank: row.rank,
                resolution: row.resolution,
                fidelity: row.fidelity,
                robustness: row.robustness,
            };
            let slot = *groups
                .entry((row.annotator_id.clone(), row.task_id.clone()))
                .or_insert_with(|| {
                    rows.push((line, row.annotator_id.clone(), row.task_id.clone(), BTreeMap::new()));
                    rows.len() - 1
                });
            if rows[slot].3.insert(row.label, scores).is_some() {
                return Err(BenchError::DuplicateAnnotation {
                    annotator: row.annotator_id,
                    task: row.task_id,
                });
            }
        }
    } else {
        let text = fs::read_to_string(path).map_err(BenchError::io(path))?;
        for (i, l) in text.lines().enumerate() {
            if l.trim().is_empty() {
                continue;
            }
            let row: LabeledRow =
                serde_json::from_str(l).map_err(|e| parse_err(path, i + 1, e.to_string()))?;
            rows.push((i + 1, row.annotator_id, row.task_id, row.entries));
        }
    }

    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(rows.len());
    for (line, annotator_id, task_id, entries) in rows {
        if !seen.insert((annotator_id.clone(), task_id.clone())) {
            return Err(BenchError::DuplicateAnnotation {
                annotator: annotator_id,
                task: task_id,
            });
        }
        let variants = resolve(key, &task_id, entries).map_err(|m| parse_err(path, line, m))?;
        let record = AnnotationRecord {
            annotator_id,
            task_id,
            variants,
        };
        record.validate().map_err(|m| parse_err(path, line, m))?;
        out.push(record);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(rank: u32, r: u8, f: u8, b: u8) -> Scores {
        Scores {
            rank,
            resolution: r,
            fidelity: f,
            robustness: b,
        }
    }

    fn key() -> BundleKey {
        let mut tasks = BTreeMap::new();
        tasks.insert(
            "t1".to_string(),
            BTreeMap::from([("A".to_string(), "gpt".to_string()), ("B".to_string(), "flux".to_string())]),
        );
        BundleKey { seed: 1, tasks }
    }

    #[test]
    fn jsonl_resolves_labels() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.jsonl");
        fs::write(
            &p,
            r#"{"annotator_id":"x","task_id":"t1","entries":{"A":{"rank":2,"resolution":1,"fidelity":3,"robustness":3},"B":{"rank":1,"resolution":3,"fidelity":3,"robustness":2}}}"#,
        )
        .unwrap();
        let r = ingest_annotations(&p, Some(&key())).unwrap();
        assert_eq!(r[0].variants["gpt"], s(2, 1, 3, 3));
        assert_eq!(r[0].variants["flux"], s(1, 3, 3, 2));
    }

    #[test]
    fn csv_rows_group_by_annotator_and_task() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.csv");
        fs::write(
            &p,
            "annotator_id,task_id,label,rank,resolution,fidelity,robustness\n\
             x,t1,A,1,3,3,3\ny,t1,A,2,2,2,2\nx,t1,B,2,1,1,1\ny,t1,B,1,3,3,3\n",
        )
        .unwrap();
        let r = ingest_annotations(&p, Some(&key())).unwrap();
        assert_eq!(r.len(), 2);
        assert_eq!(r[1].annotator_id, "y");
        assert_eq!(r[1].variants["flux"].rank, 1);
    }

    #[test]
    fn tied_ranks_and_bad_scores_report_lines() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.jsonl");
        let ok = r#"{"annotator_id":"x","task_id":"t1","entries":{"A":{"rank":1,"resolution":1,"fidelity":3,"robustness":3},"B":{"rank":2,"resolution":3,"fidelity":3,"robustness":2}}}"#;
        let tie = ok.replace("\"rank\":2", "\"rank\":1").replace("\"x\"", "\"y\"");
        fs::write(&p, format!("{ok}\n{tie}\n")).unwrap();
        match ingest_annotations(&p, Some(&key())) {
            Err(BenchError::Parse { line: 2, message, .. }) => assert!(message.contains("permutation")),
            other => panic!("{other:?}"),
        }
        let four = ok.replace("\"resolution\":1", "\"resolution\":4");
        fs::write(&p, format!("\n{four}\n")).unwrap();
        match ingest_annotations(&p, Some(&key())) {
            Err(BenchError::Parse { line: 2, message, .. }) => assert!(message.contains("outside")),
            other => panic!("{other:?}"),
        }
        fs::write(&p, format!("{ok}\n{ok}\n")).unwrap();
        assert!(matches!(
            ingest_annotations(&p, Some(&key())),
            Err(BenchError::DuplicateAnnotation { .. })
        ));
        let wrong = ok.replace("\"B\"", "\"C\"");
        fs::write(&p, wrong).unwrap();
        assert!(matches!(ingest_annotations(&p, Some(&key())), Err(BenchError::Parse { line: 1, .. })));
    }

    #[test]
    fn four_way_tie_example() {
        let r = AnnotationRecord {
            annotator_id: "a".into(),
            task_id: "t".into(),
            variants: BTreeMap::from([
                ("a".into(), s(1, 3, 3, 3)),
                ("b".into(), s(1, 3, 3, 3)),
                ("c".into(), s(2, 3, 3, 3)),
                ("d".into(), s(3, 3, 3, 3)),
            ]),
        };
        assert!(r.validate().is_err());
    }
}
