//! Feedback sessions, generation jobs and report storage behind an HTTP/JSON
//! API.

pub mod api;
mod blobs;
mod clock;
mod config;
pub mod demo;
mod docfiles;
mod error;
pub mod http;
mod service;
mod store;

pub use blobs::{blob_hash, blob_url, BlobStore};
pub use clock::{Clock, IdGen, RandomIds, SeededIds, SteppingClock, SystemClock};
pub use config::ServiceConfig;
pub use docfiles::{read_document, referenced_files, split_document, write_document};
pub use error::ServiceError;
pub use service::{
    JobPhase, JobProgress, JobStatus, ReportChoice, Service, SessionSnapshot, SubmitOutcome,
};
pub use store::{inspect_report_dir, FaultPlan, IndexEntry, ReportFilter, ReportStore, REPORT_FILE};
