//! Turns a screenshot plus a user complaint into edited screenshots.
//!
//! The default path asks a chat-vision model for `n` textual modifications
//! and then has an image-edit model realize each one. The direct path skips
//! the textual step and edits straight from the complaint.

mod config;
mod error;
mod generate;
mod mask;
mod parse;
mod prompt;

pub use config::GenerationConfig;
pub use error::{GenerationError, ParseError, PromptError};
pub use generate::{
    generate, generate_suggestions, no_progress, realize_specs, refine_suggestion,
    suggest_specs, GenerationInput, Progress, ProgressFn, SpecOutcome, ASPECT_TOLERANCE,
};
pub use mask::{decide_mask_use, MaskPolicy};
pub use parse::{parse_suggestion_response, render_spec_block};
pub use prompt::{
    render_direct_edit_prompt, render_edit_prompt, render_suggestion_prompt,
    DIRECT_EDIT_TEMPLATE, EDIT_TEMPLATE, SUGGESTION_TEMPLATE,
};
