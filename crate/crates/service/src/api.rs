//! JSON shapes of the HTTP API.

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use uisuggest_core::{
    FeedbackSession, FinalReport, Modification, RegionMark, ReportId, SessionId, SessionState,
    Suggestion,
};

use crate::blobs::{blob_url, blob_hash};
use crate::service::{JobStatus, SessionSnapshot};
use crate::store::IndexEntry;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionView {
    pub id: SessionId,
    pub state: SessionState,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub app_tag: Option<String>,
    pub created_at: DateTime<Utc>,
    pub screenshot_url: String,
    pub width: u32,
    pub height: u32,
    pub issue_text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mark: Option<RegionMark>,
    pub suggestion_count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chosen: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub last_error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub job: Option<JobStatus>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuggestionView {
    /// 1-based.
    pub index: usize,
    pub id: String,
    pub image_url: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub modification_index: u32,
    /// 1-based index of the suggestion this one refines.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent_index: Option<usize>,
    pub edit_model: String,
    pub mask_used: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuggestionsView {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub job: Option<JobStatus>,
    pub suggestions: Vec<SuggestionView>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedbackRequest {
    pub issue_text: String,
    #[serde(default)]
    pub mark: Option<RegionMark>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefineRequest {
    pub suggestion_index: usize,
    pub edit_text: String,
}

/// A 1-based suggestion index or the string `"reject_all"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ChoiceValue {
    Index(usize),
    Keyword(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRequest {
    pub choice: ChoiceValue,
    #[serde(default)]
    pub comment: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportResponse {
    pub session_id: SessionId,
    pub state: SessionState,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report_id: Option<ReportId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportSummary {
    pub id: ReportId,
    pub submitted_at: DateTime<Utc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub app_tag: Option<String>,
    pub issue_excerpt: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thumbnail_url: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportList {
    pub total: usize,
    pub reports: Vec<ReportSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChosenView {
    pub id: String,
    pub index: usize,
    pub image_url: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<Modification>,
    pub provenance: uisuggest_core::Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportView {
    pub id: ReportId,
    pub session_id: SessionId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub app_tag: Option<String>,
    pub original_url: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub marked_url: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mark: Option<RegionMark>,
    pub issue_text: String,
    pub chosen: ChosenView,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comment: Option<String>,
    pub submitted_at: DateTime<Utc>,
}

pub const CHOSEN_IMAGE: &str = "chosen_suggestion.image";
pub const ORIGINAL_IMAGE: &str = "original_screenshot";
pub const MARKED_IMAGE: &str = "marked_screenshot";

pub fn session_view(snap: &SessionSnapshot) -> SessionView {
    let s = &snap.session;
    SessionView {
        id: s.id.clone(),
        state: s.state,
        app_tag: s.app_tag.clone(),
        created_at: s.created_at,
        screenshot_url: blob_url(&snap.screenshot_blob),
        width: s.screenshot.width(),
        height: s.screenshot.height(),
        issue_text: s.issue_text.clone(),
        mark: s.mark,
        suggestion_count: s.suggestions.len(),
        chosen: s.chosen,
        last_error: s.last_error.clone(),
        job: snap.job.clone(),
    }
}

fn parent_index(session: &FeedbackSession, s: &Suggestion) -> Option<usize> {
    let parent = s.provenance.parent_suggestion.as_ref()?;
    session.suggestions.iter().position(|p| &p.id == parent).map(|i| i + 1)
}

pub fn suggestions_view(snap: &SessionSnapshot) -> SuggestionsView {
    let s = &snap.session;
    let suggestions = s
        .suggestions
        .iter()
        .zip(&snap.suggestion_blobs)
        .enumerate()
        .map(|(i, (sg, hash))| SuggestionView {
            index: i + 1,
            id: sg.id.0.clone(),
            image_url: blob_url(hash),
            title: sg.spec.as_ref().map(|m| m.title.clone()),
            description: sg.spec.as_ref().map(|m| m.description.clone()),
            modification_index: sg.modification_index,
            parent_index: parent_index(s, sg),
            edit_model: sg.provenance.edit_model.clone(),
            mask_used: sg.provenance.mask_used,
        })
        .collect();
    SuggestionsView {
        job: snap.job.clone(),
        suggestions,
    }
}

pub fn report_summary(e: &IndexEntry) -> ReportSummary {
    ReportSummary {
        id: e.id.clone(),
        submitted_at: e.submitted_at,
        app_tag: e.app_tag.clone(),
        issue_excerpt: e.issue_excerpt.clone(),
        thumbnail_url: e.images.get(CHOSEN_IMAGE).map(|h| blob_url(h)),
    }
}

pub fn report_view(r: &FinalReport, e: &IndexEntry) -> ReportView {
    let url = |key: &str, fallback: &uisuggest_core::ScreenImage| {
        blob_url(&e.images.get(key).cloned().unwrap_or_else(|| blob_hash(&fallback.encode_png())))
    };
    ReportView {
        id: r.id.clone(),
        session_id: r.session_id.clone(),
        app_tag: r.app_tag.clone(),
        original_url: url(ORIGINAL_IMAGE, &r.original_screenshot),
        marked_url: r.marked_screenshot.as_ref().map(|m| url(MARKED_IMAGE, m)),
        mark: r.mark,
        issue_text: r.issue_text.clone(),
        chosen: ChosenView {
            id: r.chosen_suggestion.id.0.clone(),
            index: r.chosen_index,
            image_url: url(CHOSEN_IMAGE, &r.chosen_suggestion.image),
            spec: r.chosen_suggestion.spec.clone(),
            provenance: r.chosen_suggestion.provenance.clone(),
        },
        comment: r.comment.clone(),
        submitted_at: r.submitted_at,
    }
}
