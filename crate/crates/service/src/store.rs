//! Durable report storage: one directory per report, written to a
//! temporary directory and renamed into place.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::RwLock;
use std::time::Duration;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use uisuggest_core::fsutil::sync_dir;
use uisuggest_core::{FinalReport, ReportId};

use crate::blobs::blob_hash;
use crate::docfiles::{read_document, referenced_files, split_document};
use crate::ServiceError;

pub const REPORT_FILE: &str = "report.json";
const TEMP_PREFIX: &str = ".tmp-";
const EXCERPT_CHARS: usize = 140;

/// Deliberate crashes and slowdowns inside report writes, for testing.
///
/// Steps are counted per save: one per image file, one for `report.json`,
/// one after the rename.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FaultPlan {
    pub abort_at_step: Option<u32>,
    pub step_delay: Option<Duration>,
}

impl FaultPlan {
    /// Parses `abort:<step>`, `delay-ms:<ms>` or both joined by a comma.
    pub fn parse(spec: &str) -> Result<Self, String> {
        let mut plan = FaultPlan::default();
        for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (k, v) = item.split_once(':').ok_or_else(|| format!("bad fault item {item:?}"))?;
            let n: u64 = v.parse().map_err(|_| format!("bad number in {item:?}"))?;
            match k {
                "abort" => plan.abort_at_step = Some(n as u32),
                "delay-ms" => plan.step_delay = Some(Duration::from_millis(n)),
                _ => return Err(format!("unknown fault {k:?}")),
            }
        }
        Ok(plan)
    }

    fn step(&self, n: u32) {
        if let Some(d) = self.step_delay {
            std::thread::sleep(d);
        }
        if self.abort_at_step == Some(n) {
            tracing::warn!(step = n, "fault injection: aborting");
            std::process::abort();
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexEntry {
    pub id: ReportId,
    /// Directory under the store root.
    pub dir: String,
    pub submitted_at: DateTime<Utc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub app_tag: Option<String>,
    pub issue_excerpt: String,
    /// Image JSON path (e.g. `chosen_suggestion.image`) to blob hash.
    pub images: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Default)]
pub struct ReportFilter {
    pub app_tag: Option<String>,
    pub since: Option<DateTime<Utc>>,
}

pub struct ReportStore {
    root: PathBuf,
    index: RwLock<BTreeMap<ReportId, IndexEntry>>,
    fault: FaultPlan,
    temp_counter: AtomicU64,
}

fn excerpt(text: &str) -> String {
    let mut s: String = text.chars().take(EXCERPT_CHARS).collect();
    if text.chars().count() > EXCERPT_CHARS {
        s.push('…');
    }
    s
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> ServiceError + '_ {
    move |e| ServiceError::Internal(format!("{}: {e}", path.display()))
}

/// Validates a report directory and builds its index entry. Every file the
/// JSON references must be present.
pub fn inspect_report_dir(dir: &Path) -> Result<IndexEntry, String> {
    let path = dir.join(REPORT_FILE);
    let bytes = fs::read(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    let json: Value = serde_json::from_slice(&bytes).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut images = BTreeMap::new();
    for file in referenced_files(&json) {
        let data = fs::read(dir.join(&file)).map_err(|e| format!("{file}: {e}"))?;
        images.insert(file.trim_end_matches(".png").to_string(), blob_hash(&data));
    }
    let report: FinalReport = read_document(dir, REPORT_FILE)?;
    Ok(IndexEntry {
        id: report.id,
        dir: dir
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default(),
        submitted_at: report.submitted_at,
        app_tag: report.app_tag,
        issue_excerpt: excerpt(&report.issue_text),
        images,
    })
}

impl ReportStore {
    pub fn open(root: &Path, fault: FaultPlan) -> Result<Self, ServiceError> {
        fs::create_dir_all(root).map_err(io_err(root))?;
        let store = Self {
            root: root.to_path_buf(),
            index: RwLock::new(BTreeMap::new()),
            fault,
            temp_counter: AtomicU64::new(0),
        };
        store.rebuild_index()?;
        Ok(store)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Scans the store directory. Leftover temporary directories from
    /// interrupted writes are removed; they never hold a visible report.
    pub fn scan(root: &Path) -> Result<Vec<IndexEntry>, ServiceError> {
        let mut out = Vec::new();
        for e in fs::read_dir(root).map_err(io_err(root))? {
            let e = e.map_err(io_err(root))?;
            let name = e.file_name().to_string_lossy().into_owned();
            let path = e.path();
            if !path.is_dir() {
                continue;
            }
            if name.starts_with(TEMP_PREFIX) {
                if let Err(err) = fs::remove_dir_all(&path) {
                    tracing::warn!(dir = %path.display(), error = %err, "could not remove temp dir");
                }
                continue;
            }
            match inspect_report_dir(&path) {
                Ok(entry) => out.push(entry),
                Err(err) => tracing::warn!(dir = %path.display(), error = %err, "skipping unreadable report"),
            }
        }
        out.sort_by(|a, b| a.id.cmp(&b.id));
        Ok(out)
    }

    pub fn rebuild_index(&self) -> Result<(), ServiceError> {
        let entries = Self::scan(&self.root)?;
        *self.index.write().expect("index lock") = entries.into_iter().map(|e| (e.id.clone(), e)).collect();
        Ok(())
    }

    pub fn index_snapshot(&self) -> Vec<IndexEntry> {
        self.index.read().expect("index lock").values().cloned().collect()
    }

    /// Persists `report`; blocking. Returns its index entry.
    pub fn save(&self, report: &FinalReport) -> Result<IndexEntry, ServiceError> {
        let dir_name = report.id.0.clone();
        if dir_name.is_empty() || dir_name.starts_with('.') || dir_name.contains(['/', '\\']) {
            return Err(ServiceError::Internal(format!("unusable report id {dir_name:?}")));
        }
        let final_dir = self.root.join(&dir_name);
        if final_dir.exists() {
            return Err(ServiceError::Conflict(format!("report {dir_name} already exists")));
        }
        let (json, files) = split_document(report).map_err(ServiceError::Internal)?;
        let tmp = self.root.join(format!(
            "{TEMP_PREFIX}{dir_name}-{}-{}",
            std::process::id(),
            self.temp_counter.fetch_add(1, Ordering::Relaxed)
        ));
        fs::create_dir(&tmp).map_err(io_err(&tmp))?;
        let write = |name: &str, bytes: &[u8]| -> Result<(), ServiceError> {
            let p = tmp.join(name);
            let mut f = fs::File::create(&p).map_err(io_err(&p))?;
            std::io::Write::write_all(&mut f, bytes).map_err(io_err(&p))?;
            f.sync_all().map_err(io_err(&p))
        };
        let mut step = 0;
        let result = (|| {
            for (name, bytes) in &files {
                write(name, bytes)?;
                step += 1;
                self.fault.step(step);
            }
            write(REPORT_FILE, &json)?;
            step += 1;
            self.fault.step(step);
            sync_dir(&tmp).map_err(io_err(&tmp))?;
            fs::rename(&tmp, &final_dir).map_err(io_err(&final_dir))?;
            sync_dir(&self.root).map_err(io_err(&self.root))
        })();
        if let Err(e) = result {
            let _ = fs::remove_dir_all(&tmp);
            return Err(e);
        }
        step += 1;
        self.fault.step(step);

        let entry = IndexEntry {
            id: report.id.clone(),
            dir: dir_name,
            submitted_at: report.submitted_at,
            app_tag: report.app_tag.clone(),
            issue_excerpt: excerpt(&report.issue_text),
            images: files
                .iter()
                .map(|(name, bytes)| (name.trim_end_matches(".png").to_string(), blob_hash(bytes)))
                .collect(),
        };
        self.index
            .write()
            .expect("index lock")
            .insert(entry.id.clone(), entry.clone());
        Ok(entry)
    }

    pub fn entry(&self, id: &ReportId) -> Option<IndexEntry> {
        self.index.read().expect("index lock").get(id).cloned()
    }

    pub fn get(&self, id: &ReportId) -> Result<FinalReport, ServiceError> {
        let entry = self
            .entry(id)
            .ok_or_else(|| ServiceError::NotFound(format!("report {id}")))?;
        read_document(&self.root.join(&entry.dir), REPORT_FILE).map_err(ServiceError::Internal)
    }

    /// Newest first; ties broken by id.
    pub fn list(&self, filter: &ReportFilter) -> Vec<IndexEntry> {
        let mut out: Vec<IndexEntry> = self
            .index
            .read()
            .expect("index lock")
            .values()
            .filter(|e| filter.app_tag.as_ref().is_none_or(|t| e.app_tag.as_ref() == Some(t)))
            .filter(|e| filter.since.is_none_or(|s| e.submitted_at >= s))
            .cloned()
            .collect();
        out.sort_by(|a, b| b.submitted_at.cmp(&a.submitted_at).then_with(|| a.id.cmp(&b.id)));
        out
    }

    /// Copies a report's directory (JSON plus images) into `out`.
    pub fn export(&self, id: &ReportId, out: &Path) -> Result<Vec<PathBuf>, ServiceError> {
        let entry = self
            .entry(id)
            .ok_or_else(|| ServiceError::NotFound(format!("report {id}")))?;
        let src = self.root.join(&entry.dir);
        fs::create_dir_all(out).map_err(io_err(out))?;
        let mut written = Vec::new();
        for e in fs::read_dir(&src).map_err(io_err(&src))? {
            let p = e.map_err(io_err(&src))?.path();
            if p.is_file() {
                let dst = out.join(p.file_name().expect("directory entries have names"));
                fs::copy(&p, &dst).map_err(io_err(&dst))?;
                written.push(dst);
            }
        }
        written.sort();
        Ok(written)
    }
}
