//! Lifecycle of one user report, from the first screenshot to submission or
//! abandonment.
//!
//! ```text
//! Draft --SubmitFeedback--> Generating --GenerationDone--> Review
//!   ^                          |    ^                       | | |
//!   +----GenerationFailed------+    +--------Edit-----------+ | |
//!                                        Submitted <--Select--+ |
//!                                        Abandoned <-RejectAll--+
//! ```
//!
//! A failed refinement returns to `Review` with the existing suggestions
//! intact; only a failed first generation falls back to `Draft`.

use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::geometry::RegionMark;
use crate::image::ScreenImage;
use crate::suggestion::Suggestion;
use crate::CoreError;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SessionId(pub String);

impl fmt::Display for SessionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SessionState {
    Draft,
    Generating,
    Review,
    Submitted,
    Abandoned,
}

impl SessionState {
    pub fn is_terminal(self) -> bool {
        matches!(self, SessionState::Submitted | SessionState::Abandoned)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SessionEvent {
    SubmitFeedback {
        issue_text: String,
        mark: Option<RegionMark>,
    },
    GenerationDone {
        suggestions: Vec<Suggestion>,
    },
    GenerationFailed {
        reason: String,
    },
    /// Ask for a refinement of the 1-based `suggestion_index`.
    Edit {
        suggestion_index: usize,
        edit_text: String,
    },
    Select {
        suggestion_index: usize,
    },
    RejectAll,
}

impl SessionEvent {
    pub fn kind(&self) -> EventKind {
        match self {
            SessionEvent::SubmitFeedback { .. } => EventKind::SubmitFeedback,
            SessionEvent::GenerationDone { .. } => EventKind::GenerationDone,
            SessionEvent::GenerationFailed { .. } => EventKind::GenerationFailed,
            SessionEvent::Edit { .. } => EventKind::Edit,
            SessionEvent::Select { .. } => EventKind::Select,
            SessionEvent::RejectAll => EventKind::RejectAll,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EventKind {
    SubmitFeedback,
    GenerationDone,
    GenerationFailed,
    Edit,
    Select,
    RejectAll,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitionRecord {
    pub from: SessionState,
    pub to: SessionState,
    pub event: EventKind,
    pub at: DateTime<Utc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

/// Refinement requested from `Review` and not yet completed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PendingRefinement {
    pub parent_index: usize,
    pub edit_text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedbackSession {
    pub id: SessionId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub app_tag: Option<String>,
    pub created_at: DateTime<Utc>,
    pub screenshot: ScreenImage,
    pub issue_text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mark: Option<RegionMark>,
    pub state: SessionState,
    pub suggestions: Vec<Suggestion>,
    /// 1-based index of the submitted suggestion.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chosen: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pending_refinement: Option<PendingRefinement>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub last_error: Option<String>,
    pub history: Vec<TransitionRecord>,
}

impl FeedbackSession {
    pub fn new(
        id: SessionId,
        screenshot: ScreenImage,
        app_tag: Option<String>,
        created_at: DateTime<Utc>,
    ) -> Self {
        Self {
            id,
            app_tag,
            created_at,
            screenshot,
            issue_text: String::new(),
            mark: None,
            state: SessionState::Draft,
            suggestions: Vec::new(),
            chosen: None,
            pending_refinement: None,
            last_error: None,
            history: Vec::new(),
        }
    }

    /// The 1-based suggestion at `index`.
    pub fn suggestion(&self, index: usize) -> Option<&Suggestion> {
        index.checked_sub(1).and_then(|i| self.suggestions.get(i))
    }

    pub fn chosen_suggestion(&self) -> Option<&Suggestion> {
        self.chosen.and_then(|i| self.suggestion(i))
    }

    fn check_index(&self, index: usize) -> Result<(), CoreError> {
        if self.suggestion(index).is_none() {
            return Err(CoreError::SuggestionIndexOutOfRange {
                index,
                len: self.suggestions.len(),
            });
        }
        Ok(())
    }

    /// Applies `event`, appending to the history. On error the session is
    /// left untouched.
    pub fn advance(
        &mut self,
        event: SessionEvent,
        at: DateTime<Utc>,
    ) -> Result<SessionState, CoreError> {
        use SessionEvent as E;
        use SessionState as S;

        let from = self.state;
        let kind = event.kind();
        let illegal = || CoreError::InvalidTransition {
            state: from,
            event: kind,
        };
        let mut detail = None;

        let to = match (from, event) {
            (S::Draft, E::SubmitFeedback { issue_text, mark }) => {
                if issue_text.trim().is_empty() {
                    return Err(CoreError::EmptyIssue);
                }
                self.issue_text = issue_text;
                self.mark = mark;
                self.last_error = None;
                S::Generating
            }
            (S::Generating, E::GenerationDone { suggestions }) => {
                if suggestions.is_empty() {
                    return Err(CoreError::EmptyGeneration);
                }
                detail = Some(format!("{} suggestion(s)", suggestions.len()));
                self.suggestions.extend(suggestions);
                self.pending_refinement = None;
                self.last_error = None;
                S::Review
            }
            (S::Generating, E::GenerationFailed { reason }) => {
                detail = Some(reason.clone());
                self.last_error = Some(reason);
                self.pending_refinement = None;
                if self.suggestions.is_empty() {
                    S::Draft
                } else {
                    S::Review
                }
            }
            (
                S::Review,
                E::Edit {
                    suggestion_index,
                    edit_text,
                },
            ) => {
                self.check_index(suggestion_index)?;
                if edit_text.trim().is_empty() {
                    return Err(CoreError::EmptyIssue);
                }
                detail = Some(format!("refine #{suggestion_index}"));
                self.pending_refinement = Some(PendingRefinement {
                    parent_index: suggestion_index,
                    edit_text,
                });
                S::Generating
            }
            (S::Review, E::Select { suggestion_index }) => {
                self.check_index(suggestion_index)?;
                detail = Some(format!("chose #{suggestion_index}"));
                self.chosen = Some(suggestion_index);
                S::Submitted
            }
            (S::Review, E::RejectAll) => S::Abandoned,
            _ => return Err(illegal()),
        };

        self.state = to;
        self.history.push(TransitionRecord {
            from,
            to,
            event: kind,
            at,
            detail,
        });
        Ok(to)
    }
}
