//! Outputs of the two generation steps.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::image::ScreenImage;

/// One proposed change, as produced by suggestion generation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Modification {
    pub title: String,
    pub description: String,
}

/// Parsed answer of the suggestion-generation model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolutionSpecSet {
    pub ui_description: String,
    pub modifications: Vec<Modification>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SuggestionId(pub String);

impl fmt::Display for SuggestionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Timing and retry information for one provider call.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CallMeta {
    pub latency_ms: u64,
    pub attempts: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptTexts {
    /// Absent on the direct-edit (no suggestion generation) path.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suggestion_prompt: Option<String>,
    pub edit_prompt: String,
}

/// Everything needed to replay the request that produced a suggestion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chat_model: Option<String>,
    pub edit_model: String,
    pub mask_used: bool,
    pub ablation: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent_suggestion: Option<SuggestionId>,
    pub prompt_texts: PromptTexts,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ui_description: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature: Option<f64>,
    pub returned_dims: (u32, u32),
    #[serde(default)]
    pub resampled: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chat_call: Option<CallMeta>,
    pub edit_call: CallMeta,
}

/// An edited screenshot realizing one modification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Suggestion {
    pub id: SuggestionId,
    pub image: ScreenImage,
    /// 1-based position of the realized modification in its spec set.
    pub modification_index: u32,
    /// `None` on the direct-edit path, which has no textual specification.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<Modification>,
    pub provenance: Provenance,
}

impl Suggestion {
    pub fn is_refinement(&self) -> bool {
        self.provenance.parent_suggestion.is_some()
    }
}
