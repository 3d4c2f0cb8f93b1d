use thiserror::Error;

use crate::session::{EventKind, SessionState};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoreError {
    #[error("invalid image: {0}")]
    InvalidImage(String),

    #[error("unsupported image format (only PNG and JPEG are accepted)")]
    UnsupportedFormat,

    #[error("invalid region mark: {0}")]
    InvalidMark(String),

    #[error("region mark covers no pixels on a {width}x{height} image")]
    DegenerateMark { width: u32, height: u32 },

    #[error("area fraction {0} is outside [0, 1]")]
    FractionOutOfRange(f64),

    #[error("event {event:?} is not allowed in state {state:?}")]
    InvalidTransition { state: SessionState, event: EventKind },

    #[error("suggestion index {index} out of range (session has {len})")]
    SuggestionIndexOutOfRange { index: usize, len: usize },

    #[error("issue text must not be empty")]
    EmptyIssue,

    #[error("generation finished without suggestions")]
    EmptyGeneration,

    #[error("session {0} is not submitted")]
    NotSubmitted(String),
}
