//! Core domain model for turning user complaints about an app screen into
//! concrete UI improvement suggestions.
//!
//! This crate holds the value types shared by the generation pipeline, the
//! HTTP service and the benchmarking harness: screenshots and masks, region
//! marks and their size strata, suggestions with provenance, final reports,
//! and the feedback-session state machine.

mod error;
pub mod fsutil;
pub mod geometry;
pub mod image;
pub mod report;
pub mod session;
pub mod stratum;
pub mod suggestion;

pub use error::CoreError;
pub use geometry::{
    area_fraction, compose_marked_overlay, pad_to_aspect, rect_to_mask, MaskImage, PixelRect,
    RegionMark,
};
pub use image::{EncodedFormat, PixelLayout, ScreenImage};
pub use report::{FinalReport, ReportId};
pub use session::{
    EventKind, FeedbackSession, PendingRefinement, SessionEvent, SessionId, SessionState,
    TransitionRecord,
};
pub use stratum::{stratum_of, Stratum};
pub use suggestion::{
    CallMeta, Modification, PromptTexts, Provenance, SolutionSpecSet, Suggestion, SuggestionId,
};
