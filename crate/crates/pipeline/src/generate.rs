//! Orchestration of chat and edit calls into suggestions.

use std::sync::atomic::{AtomicU32, Ordering};

use futures::future::try_join_all;
use image::imageops::FilterType;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tracing::Instrument;
use uisuggest_core::{
    rect_to_mask, CallMeta, FeedbackSession, Modification, PromptTexts, Provenance, RegionMark,
    ScreenImage, SessionState, SolutionSpecSet, Suggestion, SuggestionId,
};
use uisuggest_providers::{
    chat_complete, image_edit, ChatParams, ChatVisionProvider, ImageEditProvider,
    ProviderRegistry,
};

use crate::{
    decide_mask_use, parse_suggestion_response, render_direct_edit_prompt, render_edit_prompt,
    render_suggestion_prompt, GenerationConfig, GenerationError, MaskPolicy,
};

/// Returned images whose aspect ratio differs from the input's by more than
/// this relative amount are resampled to the input size.
pub const ASPECT_TOLERANCE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Progress {
    SuggestingSpecs,
    EditingImages { completed: u32, total: u32 },
}

/// Progress sink; called from whichever task finishes a step.
pub type ProgressFn<'a> = &'a (dyn Fn(Progress) + Send + Sync);

pub fn no_progress(_: Progress) {}

/// What to generate suggestions for.
#[derive(Debug, Clone, Copy)]
pub struct GenerationInput<'a> {
    pub screenshot: &'a ScreenImage,
    pub feedback: &'a str,
    pub mark: Option<&'a RegionMark>,
    pub parent: Option<&'a SuggestionId>,
}

/// A parsed suggestion-generation answer and how it was obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecOutcome {
    pub specs: SolutionSpecSet,
    pub prompt: String,
    pub chat_model: String,
    pub temperature: f64,
    /// Summed over re-asks after unparsable answers.
    pub call: CallMeta,
}

/// Asks `chat` for `n` modifications, re-asking up to `parse_retries` times
/// when the answer does not parse.
pub async fn suggest_specs(
    chat: &dyn ChatVisionProvider,
    screenshot: &ScreenImage,
    feedback: &str,
    n: u32,
    config: &GenerationConfig,
) -> Result<SpecOutcome, GenerationError> {
    let prompt = render_suggestion_prompt(n, feedback)?;
    let params = ChatParams {
        temperature: config.temperature,
    };
    let mut call = CallMeta::default();
    let mut tries = 0;
    loop {
        let answer = chat_complete(chat, &prompt, screenshot, &params).await?;
        call.latency_ms += answer.meta.latency_ms;
        call.attempts += answer.meta.attempts;
        match parse_suggestion_response(&answer.value, n as usize) {
            Ok(specs) => {
                return Ok(SpecOutcome {
                    specs,
                    prompt,
                    chat_model: chat.model_id().to_string(),
                    temperature: config.temperature,
                    call,
                })
            }
            Err(e) if tries < config.parse_retries => {
                tracing::warn!(error = %e, try_no = tries + 1, "unparsable suggestion answer, asking again");
                tries += 1;
            }
            Err(e) => return Err(e.into()),
        }
    }
}

fn aspect_deviates(a: (u32, u32), b: (u32, u32)) -> bool {
    let ra = a.0 as f64 / a.1 as f64;
    let rb = b.0 as f64 / b.1 as f64;
    // Epsilon keeps an exact 5% deviation on the accepted side.
    (ra / rb - 1.0).abs() > ASPECT_TOLERANCE + 1e-12
}

fn fit_to_input(returned: ScreenImage, input: (u32, u32)) -> (ScreenImage, bool) {
    if !aspect_deviates(returned.dims(), input) {
        return (returned, false);
    }
    let resized = image::imageops::resize(&returned.to_rgba(), input.0, input.1, FilterType::Triangle);
    let image = ScreenImage::from_rgba(resized).expect("resize keeps non-zero dimensions");
    (image, true)
}

fn suggestion_id(base: &ScreenImage, prompt: &str, index: u32, parent: Option<&SuggestionId>, out: &ScreenImage) -> SuggestionId {
    let mut h = Sha256::new();
    for part in [
        base.pixels(),
        prompt.as_bytes(),
        &index.to_le_bytes(),
        parent.map_or(&b""[..], |p| p.0.as_bytes()),
        out.pixels(),
    ] {
        h.update((part.len() as u64).to_le_bytes());
        h.update(part);
    }
    SuggestionId(hex::encode(&h.finalize()[..12]))
}

/// Issues one edit per modification (or `config.n` direct edits when `specs`
/// is `None`) concurrently and assembles the suggestions in order.
pub async fn realize_specs(
    edit: &dyn ImageEditProvider,
    input: GenerationInput<'_>,
    specs: Option<&SpecOutcome>,
    config: &GenerationConfig,
    progress: ProgressFn<'_>,
) -> Result<Vec<Suggestion>, GenerationError> {
    let mut use_mask = decide_mask_use(config.mask_policy, config.mask_auto_threshold, input.mark);
    if use_mask && config.mask_policy == MaskPolicy::Auto && !edit.supports_mask() {
        tracing::debug!(provider = edit.name(), "provider cannot mask, editing unmasked");
        use_mask = false;
    }
    let mask = match (use_mask, input.mark) {
        (true, Some(mark)) => Some(rect_to_mask(input.screenshot.dims(), mark)?),
        _ => None,
    };

    let jobs: Vec<(String, Option<&Modification>)> = match specs {
        Some(s) => s
            .specs
            .modifications
            .iter()
            .map(|m| {
                render_edit_prompt(&s.specs.ui_description, input.feedback, &m.title, &m.description)
                    .map(|p| (p, Some(m)))
            })
            .collect::<Result<_, _>>()?,
        None => {
            let p = render_direct_edit_prompt(input.feedback)?;
            (0..config.n).map(|_| (p.clone(), None)).collect()
        }
    };

    let total = jobs.len() as u32;
    let completed = AtomicU32::new(0);
    progress(Progress::EditingImages { completed: 0, total });
    let calls = jobs.iter().map(|(prompt, _)| {
        let mask = mask.as_ref();
        let completed = &completed;
        async move {
            let out = image_edit(edit, prompt, input.screenshot, mask, &config.edit_params).await?;
            let done = completed.fetch_add(1, Ordering::SeqCst) + 1;
            progress(Progress::EditingImages { completed: done, total });
            Ok::<_, GenerationError>(out)
        }
    });
    let results = try_join_all(calls).await?;

    Ok(jobs
        .into_iter()
        .zip(results)
        .enumerate()
        .map(|(i, ((prompt, modification), out))| {
            let index = i as u32 + 1;
            let returned_dims = out.value.dims();
            let (image, resampled) = fit_to_input(out.value, input.screenshot.dims());
            Suggestion {
                id: suggestion_id(input.screenshot, &prompt, index, input.parent, &image),
                image,
                modification_index: index,
                spec: modification.cloned(),
                provenance: Provenance {
                    chat_model: specs.map(|s| s.chat_model.clone()),
                    edit_model: edit.model_id().to_string(),
                    mask_used: mask.is_some(),
                    ablation: specs.is_none(),
                    parent_suggestion: input.parent.cloned(),
                    prompt_texts: PromptTexts {
                        suggestion_prompt: specs.map(|s| s.prompt.clone()),
                        edit_prompt: prompt,
                    },
                    ui_description: specs.map(|s| s.specs.ui_description.clone()),
                    temperature: specs.map(|s| s.temperature),
                    returned_dims,
                    resampled,
                    chat_call: specs.map(|s| s.call),
                    edit_call: out.meta,
                },
            }
        })
        .collect())
}

/// Full run for one input: suggestion generation (unless ablated) followed
/// by the edits.
pub async fn generate(
    registry: &ProviderRegistry,
    input: GenerationInput<'_>,
    config: &GenerationConfig,
    progress: ProgressFn<'_>,
) -> Result<Vec<Suggestion>, GenerationError> {
    config.validate()?;
    let edit = registry.edit(&config.edit_provider)?;
    let span = tracing::info_span!("generate", edit = %config.edit_provider, n = config.n, ablation = config.ablation_no_sg);
    async move {
        if config.ablation_no_sg {
            render_direct_edit_prompt(input.feedback)?;
            return realize_specs(edit.as_ref(), input, None, config, progress).await;
        }
        let chat = registry.chat(&config.chat_provider)?;
        progress(Progress::SuggestingSpecs);
        let specs = suggest_specs(chat.as_ref(), input.screenshot, input.feedback, config.n, config).await?;
        realize_specs(edit.as_ref(), input, Some(&specs), config, progress).await
    }
    .instrument(span)
    .await
}

/// One refined suggestion built from `parent`'s image with `edit_text` as
/// the feedback. The refinement is unmasked.
pub async fn refine_suggestion(
    registry: &ProviderRegistry,
    parent: &Suggestion,
    edit_text: &str,
    config: &GenerationConfig,
    progress: ProgressFn<'_>,
) -> Result<Suggestion, GenerationError> {
    let config = GenerationConfig {
        n: 1,
        ..config.clone()
    };
    let input = GenerationInput {
        screenshot: &parent.image,
        feedback: edit_text,
        mark: None,
        parent: Some(&parent.id),
    };
    let mut out = generate(registry, input, &config, progress).await?;
    Ok(out.remove(0))
}

/// Runs whatever generation a session in `Generating` is waiting for: the
/// initial suggestions, or a pending refinement.
pub async fn generate_suggestions(
    registry: &ProviderRegistry,
    session: &FeedbackSession,
    config: &GenerationConfig,
    progress: ProgressFn<'_>,
) -> Result<Vec<Suggestion>, GenerationError> {
    if session.state != SessionState::Generating {
        return Err(GenerationError::InvalidSession(format!(
            "session {} is {:?}, not Generating",
            session.id.0, session.state
        )));
    }
    match &session.pending_refinement {
        Some(pending) => {
            let parent = session.suggestion(pending.parent_index).ok_or_else(|| {
                GenerationError::InvalidSession(format!(
                    "refinement parent #{} does not exist",
                    pending.parent_index
                ))
            })?;
            let s = refine_suggestion(registry, parent, &pending.edit_text, config, progress).await?;
            Ok(vec![s])
        }
        None => {
            let input = GenerationInput {
                screenshot: &session.screenshot,
                feedback: &session.issue_text,
                mark: session.mark.as_ref(),
                parent: None,
            };
            generate(registry, input, config, progress).await
        }
    }
}
