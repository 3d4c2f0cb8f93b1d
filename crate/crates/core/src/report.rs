use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::geometry::{compose_marked_overlay, RegionMark};
use crate::image::ScreenImage;
use crate::session::{FeedbackSession, SessionId, SessionState};
use crate::suggestion::Suggestion;
use crate::CoreError;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ReportId(pub String);

impl fmt::Display for ReportId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// What a developer receives once a user picks a suggestion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalReport {
    pub id: ReportId,
    pub session_id: SessionId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub app_tag: Option<String>,
    pub original_screenshot: ScreenImage,
    /// Present exactly when the user marked a region.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub marked_screenshot: Option<ScreenImage>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mark: Option<RegionMark>,
    pub issue_text: String,
    pub chosen_index: usize,
    pub chosen_suggestion: Suggestion,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comment: Option<String>,
    pub submitted_at: DateTime<Utc>,
}

impl FinalReport {
    /// Builds the report for a session that has reached `Submitted`.
    /// Blank comments are dropped.
    pub fn assemble(
        session: &FeedbackSession,
        id: ReportId,
        comment: Option<String>,
        submitted_at: DateTime<Utc>,
    ) -> Result<Self, CoreError> {
        if session.state != SessionState::Submitted {
            return Err(CoreError::NotSubmitted(session.id.0.clone()));
        }
        let chosen_index = session
            .chosen
            .ok_or_else(|| CoreError::NotSubmitted(session.id.0.clone()))?;
        let chosen = session
            .chosen_suggestion()
            .ok_or(CoreError::SuggestionIndexOutOfRange {
                index: chosen_index,
                len: session.suggestions.len(),
            })?
            .clone();
        let marked_screenshot = session
            .mark
            .as_ref()
            .map(|m| compose_marked_overlay(&session.screenshot, m))
            .transpose()?;
        Ok(Self {
            id,
            session_id: session.id.clone(),
            app_tag: session.app_tag.clone(),
            original_screenshot: session.screenshot.clone(),
            marked_screenshot,
            mark: session.mark,
            issue_text: session.issue_text.clone(),
            chosen_index,
            chosen_suggestion: chosen,
            comment: comment.filter(|c| !c.trim().is_empty()),
            submitted_at,
        })
    }
}
