//! Session lifecycle, generation jobs and report submission.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use chrono::Duration;
use serde::{Deserialize, Serialize};
use serde_json::json;
use tokio::sync::Semaphore;
use uisuggest_core::{
    FeedbackSession, FinalReport, RegionMark, ReportId, ScreenImage, SessionEvent, SessionId,
    SessionState,
};
use uisuggest_pipeline::{generate_suggestions, Progress};
use uisuggest_providers::ProviderRegistry;

use crate::blobs::BlobStore;
use crate::clock::{Clock, IdGen};
use crate::docfiles::write_document;
use crate::store::{FaultPlan, IndexEntry, ReportFilter, ReportStore, REPORT_FILE};
use crate::{ServiceConfig, ServiceError};

const SESSION_FILE: &str = "session.json";
const ABANDON_LOG: &str = "abandoned.jsonl";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum JobPhase {
    Queued,
    SuggestingSpecs,
    EditingImages,
    Done,
    Failed,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct JobProgress {
    pub completed: usize,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JobStatus {
    pub session_id: SessionId,
    pub phase: JobPhase,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub progress: JobProgress,
}

#[derive(Debug, Clone, Copy)]
struct LiveJob {
    phase: JobPhase,
    progress: JobProgress,
}

/// A consistent read of one session.
#[derive(Debug, Clone)]
pub struct SessionSnapshot {
    pub session: Arc<FeedbackSession>,
    pub screenshot_blob: String,
    /// Blob hash per suggestion, same order as the session's list.
    pub suggestion_blobs: Vec<String>,
    pub job: Option<JobStatus>,
}

#[derive(Debug, Clone)]
struct Committed {
    session: Arc<FeedbackSession>,
    screenshot_blob: String,
    suggestion_blobs: Vec<String>,
}

struct Slot {
    /// Single writer per session.
    cmd: tokio::sync::Mutex<FeedbackSession>,
    view: RwLock<Arc<Committed>>,
    job: Mutex<Option<LiveJob>>,
    last_total: Mutex<usize>,
}

impl Slot {
    fn snapshot(&self) -> SessionSnapshot {
        let view = self.view.read().expect("view lock").clone();
        let live = *self.job.lock().expect("job lock");
        let s = &view.session;
        let total = *self.last_total.lock().expect("total lock");
        let job = match s.state {
            SessionState::Generating => {
                let live = live.unwrap_or(LiveJob {
                    phase: JobPhase::Queued,
                    progress: JobProgress { completed: 0, total },
                });
                Some((live.phase, None, live.progress))
            }
            // A failed refinement returns to Review; the job is over and
            // carries the error.
            SessionState::Review => Some((
                JobPhase::Done,
                s.last_error.clone(),
                JobProgress { completed: total, total },
            )),
            SessionState::Draft if s.last_error.is_some() => Some((
                JobPhase::Failed,
                s.last_error.clone(),
                JobProgress { completed: 0, total },
            )),
            _ => None,
        }
        .map(|(phase, error, progress)| JobStatus {
            session_id: s.id.clone(),
            phase,
            error,
            progress,
        });
        SessionSnapshot {
            session: view.session.clone(),
            screenshot_blob: view.screenshot_blob.clone(),
            suggestion_blobs: view.suggestion_blobs.clone(),
            job,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportChoice {
    /// 1-based suggestion index.
    Suggestion(usize),
    RejectAll,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubmitOutcome {
    pub report_id: Option<ReportId>,
    pub state: SessionState,
}

pub struct Service {
    config: ServiceConfig,
    registry: ProviderRegistry,
    clock: Arc<dyn Clock>,
    ids: Arc<dyn IdGen>,
    sessions: RwLock<HashMap<SessionId, Arc<Slot>>>,
    reports: Arc<ReportStore>,
    blobs: BlobStore,
    jobs: Arc<Semaphore>,
    sessions_dir: PathBuf,
    abandoned_dir: PathBuf,
}

async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> Result<T, ServiceError> + Send + 'static,
) -> Result<T, ServiceError> {
    tokio::task::spawn_blocking(f).await.map_err(ServiceError::internal)?
}

fn io_internal(e: std::io::Error) -> ServiceError {
    ServiceError::internal(e)
}

impl Service {
    /// Opens (or creates) the data directory, reloading sessions and
    /// rebuilding the report index.
    pub async fn open(
        config: ServiceConfig,
        registry: ProviderRegistry,
        clock: Arc<dyn Clock>,
        ids: Arc<dyn IdGen>,
        fault: FaultPlan,
    ) -> Result<Arc<Self>, ServiceError> {
        config
            .generation
            .validate()
            .map_err(|e| ServiceError::Internal(e.to_string()))?;
        let data = config.data_dir.clone();
        let sessions_dir = data.join("sessions");
        let abandoned_dir = data.join("abandoned");
        for d in [&sessions_dir, &abandoned_dir] {
            fs::create_dir_all(d).map_err(io_internal)?;
        }
        let reports_dir = data.join("reports");
        let blobs_dir = data.join("blobs");
        let (reports, blobs) = blocking(move || {
            let reports = ReportStore::open(&reports_dir, fault)?;
            let blobs = BlobStore::open(&blobs_dir).map_err(io_internal)?;
            for e in reports.index_snapshot() {
                ingest_report_blobs(&blobs, &reports.root().join(&e.dir), &e)?;
            }
            Ok((reports, blobs))
        })
        .await?;

        let svc = Arc::new(Self {
            jobs: Arc::new(Semaphore::new(config.workers.max(1))),
            config,
            registry,
            clock,
            ids,
            sessions: RwLock::new(HashMap::new()),
            reports: Arc::new(reports),
            blobs,
            sessions_dir,
            abandoned_dir,
        });
        svc.reload_sessions().await?;
        svc.prune_abandoned()?;
        Ok(svc)
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.config
    }

    pub fn reports(&self) -> &ReportStore {
        &self.reports
    }

    async fn reload_sessions(self: &Arc<Self>) -> Result<(), ServiceError> {
        let dirs: Vec<PathBuf> = fs::read_dir(&self.sessions_dir)
            .map_err(io_internal)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_dir())
            .collect();
        for dir in dirs {
            let loaded = blocking({
                let dir = dir.clone();
                move || crate::docfiles::read_document::<FeedbackSession>(&dir, SESSION_FILE).map_err(ServiceError::Internal)
            })
            .await;
            let mut session = match loaded {
                Ok(s) => s,
                Err(e) => {
                    tracing::warn!(dir = %dir.display(), error = %e, "skipping unreadable session");
                    continue;
                }
            };
            if session.state == SessionState::Generating {
                session.advance(
                    SessionEvent::GenerationFailed {
                        reason: "interrupted by a restart".into(),
                    },
                    self.clock.now(),
                )?;
                self.persist(&session).await?;
            }
            let committed = self.commit_view(&session, None).await?;
            let total = if session.pending_refinement.is_some() { 1 } else { self.config.generation.n as usize };
            self.sessions.write().expect("sessions lock").insert(
                session.id.clone(),
                Arc::new(Slot {
                    cmd: tokio::sync::Mutex::new(session),
                    view: RwLock::new(Arc::new(committed)),
                    job: Mutex::new(None),
                    last_total: Mutex::new(total),
                }),
            );
        }
        Ok(())
    }

    fn prune_abandoned(&self) -> Result<(), ServiceError> {
        let cutoff = self.clock.now() - Duration::days(self.config.retention_days as i64);
        for e in fs::read_dir(&self.abandoned_dir).map_err(io_internal)? {
            let dir = e.map_err(io_internal)?.path();
            let Ok(bytes) = fs::read(dir.join(SESSION_FILE)) else { continue };
            let Ok(v) = serde_json::from_slice::<serde_json::Value>(&bytes) else { continue };
            let last = v["history"]
                .as_array()
                .and_then(|h| h.last())
                .and_then(|t| t["at"].as_str())
                .and_then(|s| s.parse::<chrono::DateTime<chrono::Utc>>().ok());
            if last.is_some_and(|t| t < cutoff) {
                tracing::info!(dir = %dir.display(), "pruning abandoned session snapshot");
                fs::remove_dir_all(&dir).map_err(io_internal)?;
            }
        }
        Ok(())
    }

    fn slot(&self, id: &SessionId) -> Result<Arc<Slot>, ServiceError> {
        self.sessions
            .read()
            .expect("sessions lock")
            .get(id)
            .cloned()
            .ok_or_else(|| ServiceError::NotFound(format!("session {id}")))
    }

    async fn persist(&self, session: &FeedbackSession) -> Result<(), ServiceError> {
        let dir = self.sessions_dir.join(&session.id.0);
        let session = session.clone();
        blocking(move || write_document(&dir, SESSION_FILE, &session).map_err(io_internal)).await
    }

    /// Stores the session's images as blobs and builds the read view.
    /// Blobs of `previous` suggestions are reused.
    async fn commit_view(
        &self,
        session: &FeedbackSession,
        previous: Option<&Committed>,
    ) -> Result<Committed, ServiceError> {
        let blobs = self.blobs.clone();
        let known = previous.map_or(0, |p| p.suggestion_blobs.len().min(session.suggestions.len()));
        let mut suggestion_blobs: Vec<String> =
            previous.map(|p| p.suggestion_blobs[..known].to_vec()).unwrap_or_default();
        let screenshot_blob = previous.map(|p| p.screenshot_blob.clone());
        let fresh: Vec<ScreenImage> = session.suggestions[known..].iter().map(|s| s.image.clone()).collect();
        let screenshot = screenshot_blob.is_none().then(|| session.screenshot.clone());
        let (shot, new) = blocking(move || {
            let shot = screenshot.map(|s| blobs.put(&s.encode_png())).transpose().map_err(io_internal)?;
            let new = fresh
                .iter()
                .map(|img| blobs.put(&img.encode_png()))
                .collect::<Result<Vec<_>, _>>()
                .map_err(io_internal)?;
            Ok((shot, new))
        })
        .await?;
        suggestion_blobs.extend(new);
        Ok(Committed {
            session: Arc::new(session.clone()),
            screenshot_blob: screenshot_blob.or(shot).expect("one of the two is set"),
            suggestion_blobs,
        })
    }

    /// Persists `next`, refreshes the view, then makes `next` current.
    async fn commit(
        &self,
        slot: &Slot,
        guard: &mut FeedbackSession,
        next: FeedbackSession,
    ) -> Result<(), ServiceError> {
        self.persist(&next).await?;
        let previous = slot.view.read().expect("view lock").clone();
        let view = self.commit_view(&next, Some(&previous)).await?;
        *slot.view.write().expect("view lock") = Arc::new(view);
        *guard = next;
        Ok(())
    }

    pub fn snapshot(&self, id: &SessionId) -> Result<SessionSnapshot, ServiceError> {
        Ok(self.slot(id)?.snapshot())
    }

    pub async fn create_session(
        self: &Arc<Self>,
        bytes: &[u8],
        app_tag: Option<String>,
    ) -> Result<SessionSnapshot, ServiceError> {
        if bytes.len() > self.config.max_upload_bytes {
            return Err(ServiceError::PayloadTooLarge {
                size: bytes.len(),
                limit: self.config.max_upload_bytes,
            });
        }
        let owned = bytes.to_vec();
        let screenshot = blocking(move || ScreenImage::decode(&owned).map_err(ServiceError::from)).await?;
        let id = SessionId(self.ids.next_id("s"));
        let session = FeedbackSession::new(id.clone(), screenshot, app_tag.filter(|t| !t.trim().is_empty()), self.clock.now());
        self.persist(&session).await?;
        let view = self.commit_view(&session, None).await?;
        let slot = Arc::new(Slot {
            cmd: tokio::sync::Mutex::new(session),
            view: RwLock::new(Arc::new(view)),
            job: Mutex::new(None),
            last_total: Mutex::new(self.config.generation.n as usize),
        });
        self.sessions.write().expect("sessions lock").insert(id, slot.clone());
        Ok(slot.snapshot())
    }

    pub async fn submit_feedback(
        self: &Arc<Self>,
        id: &SessionId,
        issue_text: String,
        mark: Option<RegionMark>,
    ) -> Result<JobStatus, ServiceError> {
        let slot = self.slot(id)?;
        let mut guard = slot.cmd.lock().await;
        let mut next = guard.clone();
        next.advance(SessionEvent::SubmitFeedback { issue_text, mark }, self.clock.now())?;
        self.start_job(&slot, &mut guard, next).await
    }

    pub async fn refine(
        self: &Arc<Self>,
        id: &SessionId,
        suggestion_index: usize,
        edit_text: String,
    ) -> Result<JobStatus, ServiceError> {
        let slot = self.slot(id)?;
        let mut guard = slot.cmd.lock().await;
        let mut next = guard.clone();
        next.advance(
            SessionEvent::Edit {
                suggestion_index,
                edit_text,
            },
            self.clock.now(),
        )?;
        self.start_job(&slot, &mut guard, next).await
    }

    async fn start_job(
        self: &Arc<Self>,
        slot: &Arc<Slot>,
        guard: &mut FeedbackSession,
        next: FeedbackSession,
    ) -> Result<JobStatus, ServiceError> {
        let total = if next.pending_refinement.is_some() { 1 } else { self.config.generation.n as usize };
        *slot.last_total.lock().expect("total lock") = total;
        *slot.job.lock().expect("job lock") = Some(LiveJob {
            phase: JobPhase::Queued,
            progress: JobProgress { completed: 0, total },
        });
        self.commit(slot, guard, next.clone()).await?;
        let status = slot.snapshot().job.expect("generating sessions have a job");

        let svc = self.clone();
        let slot = slot.clone();
        tokio::spawn(async move {
            let _permit = svc.jobs.clone().acquire_owned().await.expect("semaphore is never closed");
            let progress_slot = slot.clone();
            let progress = move |p: Progress| {
                let mut job = progress_slot.job.lock().expect("job lock");
                let live = job.get_or_insert(LiveJob {
                    phase: JobPhase::Queued,
                    progress: JobProgress { completed: 0, total },
                });
                match p {
                    Progress::SuggestingSpecs => live.phase = JobPhase::SuggestingSpecs,
                    Progress::EditingImages { completed, total } => {
                        live.phase = JobPhase::EditingImages;
                        live.progress = JobProgress { completed: completed as usize, total: total as usize };
                    }
                }
            };
            let result = generate_suggestions(&svc.registry, &next, &svc.config.generation, &progress).await;
            if let Err(e) = svc.finish_job(&slot, result).await {
                tracing::error!(session = %next.id, error = %e, "could not record generation result");
            }
        });
        Ok(status)
    }

    async fn finish_job(
        &self,
        slot: &Slot,
        result: Result<Vec<uisuggest_core::Suggestion>, uisuggest_pipeline::GenerationError>,
    ) -> Result<(), ServiceError> {
        let mut guard = slot.cmd.lock().await;
        let mut next = guard.clone();
        let now = self.clock.now();
        let outcome = match result {
            Ok(suggestions) => next.advance(SessionEvent::GenerationDone { suggestions }, now),
            Err(e) => {
                tracing::warn!(session = %next.id, error = %e, "generation failed");
                next.advance(SessionEvent::GenerationFailed { reason: e.to_string() }, now)
            }
        };
        if let Err(e) = outcome {
            next = guard.clone();
            next.advance(SessionEvent::GenerationFailed { reason: e.to_string() }, now)?;
        }
        *slot.job.lock().expect("job lock") = None;
        self.commit(slot, &mut guard, next).await
    }

    pub async fn submit_report(
        self: &Arc<Self>,
        id: &SessionId,
        choice: ReportChoice,
        comment: Option<String>,
    ) -> Result<SubmitOutcome, ServiceError> {
        let slot = self.slot(id)?;
        let mut guard = slot.cmd.lock().await;
        let mut next = guard.clone();
        let now = self.clock.now();
        match choice {
            ReportChoice::Suggestion(index) => {
                if next.state == SessionState::Review {
                    if let Some(c) = &comment {
                        let n = c.chars().count();
                        if n > self.config.max_comment_chars {
                            return Err(ServiceError::Unprocessable(format!(
                                "comment has {n} characters, the limit is {}",
                                self.config.max_comment_chars
                            )));
                        }
                    }
                }
                next.advance(SessionEvent::Select { suggestion_index: index }, now)?;
                let report = FinalReport::assemble(&next, ReportId(self.ids.next_id("r")), comment, now)?;
                let report_id = report.id.clone();
                let reports = self.reports.clone();
                let blobs = self.blobs.clone();
                blocking(move || {
                    let entry = reports.save(&report)?;
                    ingest_report_blobs(&blobs, &reports.root().join(&entry.dir), &entry)
                })
                .await?;
                self.commit(&slot, &mut guard, next).await?;
                tracing::info!(session = %id, report = %report_id, "report submitted");
                Ok(SubmitOutcome {
                    report_id: Some(report_id),
                    state: SessionState::Submitted,
                })
            }
            ReportChoice::RejectAll => {
                next.advance(SessionEvent::RejectAll, now)?;
                let dir = self.abandoned_dir.join(&next.id.0);
                let log = self.config.data_dir.join(ABANDON_LOG);
                let snapshot = next.clone();
                blocking(move || {
                    write_document(&dir, SESSION_FILE, &snapshot).map_err(io_internal)?;
                    let line = json!({
                        "session_id": snapshot.id,
                        "at": now,
                        "app_tag": snapshot.app_tag,
                        "issue_text": snapshot.issue_text,
                        "suggestions": snapshot.suggestions.len(),
                    });
                    append_line(&log, &line.to_string()).map_err(io_internal)
                })
                .await?;
                self.commit(&slot, &mut guard, next).await?;
                tracing::info!(session = %id, "session abandoned");
                Ok(SubmitOutcome {
                    report_id: None,
                    state: SessionState::Abandoned,
                })
            }
        }
    }

    pub fn list_reports(&self, filter: &ReportFilter) -> Vec<IndexEntry> {
        self.reports.list(filter)
    }

    pub fn get_report(&self, id: &ReportId) -> Result<(FinalReport, IndexEntry), ServiceError> {
        let entry = self
            .reports
            .entry(id)
            .ok_or_else(|| ServiceError::NotFound(format!("report {id}")))?;
        Ok((self.reports.get(id)?, entry))
    }

    pub fn blob(&self, hash: &str) -> Option<Vec<u8>> {
        self.blobs.get(hash)
    }

    /// Waits until the session leaves `Generating`. For tests and scripted
    /// runs.
    pub async fn wait_idle(&self, id: &SessionId) -> Result<SessionSnapshot, ServiceError> {
        loop {
            let snap = self.snapshot(id)?;
            if snap.session.state != SessionState::Generating {
                return Ok(snap);
            }
            tokio::time::sleep(std::time::Duration::from_millis(5)).await;
        }
    }
}

fn append_line(path: &Path, line: &str) -> std::io::Result<()> {
    use std::io::Write;
    let mut f = fs::OpenOptions::new().create(true).append(true).open(path)?;
    writeln!(f, "{line}")?;
    f.sync_all()
}

fn ingest_report_blobs(blobs: &BlobStore, dir: &Path, entry: &IndexEntry) -> Result<(), ServiceError> {
    for name in entry.images.keys() {
        let p = dir.join(format!("{name}.png"));
        let bytes = fs::read(&p).map_err(io_internal)?;
        blobs.put(&bytes).map_err(io_internal)?;
    }
    debug_assert!(dir.join(REPORT_FILE).exists());
    Ok(())
}
