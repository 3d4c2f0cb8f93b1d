//! Deterministic offline providers.
//!
//! Outputs are a pure function of the seed and the call inputs, hashed with
//! SHA-256 so they are identical across runs and platforms.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, OnceLock};

use async_trait::async_trait;
use regex::Regex;
use serde_json::json;
use sha2::{Digest, Sha256};
use uisuggest_core::{CallMeta, MaskImage, PixelRect, ScreenImage};

use crate::{
    ChatParams, ChatVisionProvider, Completion, EditParams, ImageEditProvider, ProviderError,
};

/// Shared call counter for test doubles.
#[derive(Debug, Clone, Default)]
pub struct CallCounter(Arc<AtomicUsize>);

impl CallCounter {
    pub fn get(&self) -> usize {
        self.0.load(Ordering::SeqCst)
    }

    fn bump(&self) {
        self.0.fetch_add(1, Ordering::SeqCst);
    }
}

fn digest(seed: u64, parts: &[&[u8]]) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p);
    }
    h.finalize().into()
}

const DESIGN_MOVES: [(&str, &str); 8] = [
    (
        "Increase text size",
        "Raise the body text to a larger size and increase line spacing so every label is legible at arm's length.",
    ),
    (
        "Raise contrast",
        "Darken foreground text and icons against a lighter background to reach a strong contrast ratio.",
    ),
    (
        "Enlarge touch targets",
        "Give every tappable control a larger hit area and add spacing between neighbouring buttons.",
    ),
    (
        "Add a confirmation step",
        "Show a short confirmation dialog before the action is performed, with clearly labeled confirm and cancel buttons.",
    ),
    (
        "Simplify the layout",
        "Group related items into cards, remove decorative elements and align content to a single column grid.",
    ),
    (
        "Clarify labels",
        "Replace ambiguous icons with icon-plus-text buttons and use plain wording for each action.",
    ),
    (
        "Reorder content by priority",
        "Move the primary action and the most important information to the top of the screen.",
    ),
    (
        "Use a slide-to-confirm control",
        "Replace the single-tap button with a slide-to-confirm control that requires a deliberate horizontal swipe.",
    ),
];

fn requested_count(prompt: &str) -> Option<usize> {
    static RE: OnceLock<Regex> = OnceLock::new();
    let re = RE.get_or_init(|| {
        Regex::new(r"propose (\d+) design modifications").expect("static regex is valid")
    });
    re.captures(prompt)?.get(1)?.as_str().parse().ok()
}

fn quoted_feedback(prompt: &str) -> &str {
    prompt
        .split_once("# User feedback:\n")
        .map(|(_, rest)| rest.split("\n\n# Output format").next().unwrap_or(rest))
        .unwrap_or("")
        .trim()
}

/// Answers suggestion-generation prompts with a fenced JSON block holding
/// exactly the requested number of modifications; any other prompt gets a
/// prose reply.
pub struct MockChatProvider {
    name: String,
    seed: u64,
    counter: CallCounter,
}

impl MockChatProvider {
    pub fn new(name: impl Into<String>, seed: u64) -> Self {
        Self {
            name: name.into(),
            seed,
            counter: CallCounter::default(),
        }
    }

    pub fn with_counter(mut self, counter: CallCounter) -> Self {
        self.counter = counter;
        self
    }

    /// The reply for `prompt`, without counting a call.
    pub fn reply(&self, prompt: &str, image: &ScreenImage) -> String {
        let Some(n) = requested_count(prompt) else {
            return "I can only help with UI design modification requests.".to_string();
        };
        let feedback = quoted_feedback(prompt);
        let h = digest(self.seed, &[feedback.as_bytes(), image.pixels()]);
        let start = h[0] as usize;
        let modifications: Vec<_> = (0..n)
            .map(|i| {
                let (title, description) = DESIGN_MOVES[(start + i) % DESIGN_MOVES.len()];
                json!({
                    "title": format!("{title} (option {})", i + 1),
                    "description": format!("{description} This addresses: {feedback}"),
                })
            })
            .collect();
        let body = json!({
            "ui_description": format!(
                "A {}x{} mobile screen (fingerprint {}).",
                image.width(),
                image.height(),
                hex::encode(&h[..4])
            ),
            "modifications": modifications,
        });
        format!(
            "```json\n{}\n```\n",
            serde_json::to_string_pretty(&body).expect("json values serialize")
        )
    }
}

#[async_trait]
impl ChatVisionProvider for MockChatProvider {
    fn name(&self) -> &str {
        &self.name
    }

    fn model_id(&self) -> &str {
        "mock-chat"
    }

    async fn complete(
        &self,
        prompt: &str,
        image: &ScreenImage,
        _params: &ChatParams,
    ) -> Result<Completion<String>, ProviderError> {
        self.counter.bump();
        Ok(Completion {
            value: self.reply(prompt, image),
            meta: CallMeta {
                latency_ms: 0,
                attempts: 1,
            },
        })
    }
}

/// Paints a solid rectangle whose color is derived from the prompt: over
/// the mask's editable pixels when a mask is given, otherwise over the
/// centered 40% x 20% region. Everything else is copied from the input.
pub struct MockEditProvider {
    name: String,
    seed: u64,
    supports_mask: bool,
    counter: CallCounter,
}

impl MockEditProvider {
    pub fn new(name: impl Into<String>, seed: u64, supports_mask: bool) -> Self {
        Self {
            name: name.into(),
            seed,
            supports_mask,
            counter: CallCounter::default(),
        }
    }

    pub fn with_counter(mut self, counter: CallCounter) -> Self {
        self.counter = counter;
        self
    }

    pub fn color_for(&self, prompt: &str) -> [u8; 3] {
        let h = digest(self.seed, &[prompt.as_bytes()]);
        [h[0], h[1], h[2]]
    }

    /// Region painted when no mask is supplied.
    pub fn default_region(width: u32, height: u32) -> PixelRect {
        let x0 = (width as f64 * 0.3).round() as u32;
        let y0 = (height as f64 * 0.4).round() as u32;
        let x1 = ((width as f64 * 0.7).round() as u32).max(x0 + 1).min(width);
        let y1 = ((height as f64 * 0.6).round() as u32).max(y0 + 1).min(height);
        PixelRect {
            x0: x0.min(width - 1),
            y0: y0.min(height - 1),
            x1,
            y1,
        }
    }

    /// The edit for these inputs, without counting a call.
    pub fn render(&self, prompt: &str, image: &ScreenImage, mask: Option<&MaskImage>) -> ScreenImage {
        let color = self.color_for(prompt);
        let (w, h) = image.dims();
        let c = image.layout().channels();
        let mut pixels = image.pixels().to_vec();
        let region = Self::default_region(w, h);
        for y in 0..h {
            for x in 0..w {
                let paint = match mask {
                    Some(m) => m.is_editable(x, y),
                    None => region.contains(x, y),
                };
                if paint {
                    let i = (y as usize * w as usize + x as usize) * c;
                    pixels[i..i + 3].copy_from_slice(&color);
                }
            }
        }
        ScreenImage::new(w, h, image.layout(), image.format(), pixels)
            .expect("same dimensions as the input")
    }
}

#[async_trait]
impl ImageEditProvider for MockEditProvider {
    fn name(&self) -> &str {
        &self.name
    }

    fn model_id(&self) -> &str {
        "mock-edit"
    }

    fn supports_mask(&self) -> bool {
        self.supports_mask
    }

    async fn edit(
        &self,
        prompt: &str,
        image: &ScreenImage,
        mask: Option<&MaskImage>,
        _params: &EditParams,
    ) -> Result<Completion<ScreenImage>, ProviderError> {
        if mask.is_some() && !self.supports_mask {
            return Err(ProviderError::MaskUnsupported(self.name.clone()));
        }
        self.counter.bump();
        Ok(Completion {
            value: self.render(prompt, image, mask),
            meta: CallMeta {
                latency_ms: 0,
                attempts: 1,
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use uisuggest_core::{rect_to_mask, RegionMark};

    fn screen() -> ScreenImage {
        let pixels = (0..(40 * 60 * 3)).map(|i| (i % 200) as u8).collect();
        ScreenImage::new(
            40,
            60,
            uisuggest_core::PixelLayout::Rgb,
            uisuggest_core::EncodedFormat::Png,
            pixels,
        )
        .unwrap()
    }

    const PROMPT_3: &str = "# Task\n... propose 3 design modifications that address ...\n\n# User feedback:\nText is too small\n\n# Output format:\n...";

    #[tokio::test]
    async fn chat_mock_answers_with_requested_count() {
        let chat = MockChatProvider::new("mock", 7);
        let out = chat
            .complete(PROMPT_3, &screen(), &ChatParams::default())
            .await
            .unwrap();
        assert!(out.value.starts_with("```json\n"));
        let body = out
            .value
            .trim()
            .trim_start_matches("```json")
            .trim_end_matches("```");
        let v: serde_json::Value = serde_json::from_str(body).unwrap();
        assert_eq!(v["modifications"].as_array().unwrap().len(), 3);
        assert!(v["modifications"][0]["description"]
            .as_str()
            .unwrap()
            .contains("Text is too small"));
    }

    #[test]
    fn chat_mock_is_deterministic_and_seeded() {
        let a = MockChatProvider::new("m", 1).reply(PROMPT_3, &screen());
        let b = MockChatProvider::new("m", 1).reply(PROMPT_3, &screen());
        let c = MockChatProvider::new("m", 2).reply(PROMPT_3, &screen());
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn chat_mock_without_request_gives_prose() {
        let out = MockChatProvider::new("m", 1).reply("hello", &screen());
        assert!(!out.contains('{'));
    }

    #[tokio::test]
    async fn masked_edit_only_touches_mask() {
        let editor = MockEditProvider::new("e", 3, true);
        let img = screen();
        let mask = rect_to_mask((40, 60), &RegionMark::new(0.1, 0.1, 0.2, 0.3).unwrap()).unwrap();
        let out = editor
            .edit("make it bigger", &img, Some(&mask), &EditParams::new())
            .await
            .unwrap()
            .value;
        let color = editor.color_for("make it bigger");
        for y in 0..60 {
            for x in 0..40 {
                if mask.is_editable(x, y) {
                    assert_eq!(out.pixel(x, y), &color);
                } else {
                    assert_eq!(out.pixel(x, y), img.pixel(x, y));
                }
            }
        }
    }

    #[tokio::test]
    async fn unmasked_edit_paints_center_band() {
        let editor = MockEditProvider::new("e", 3, false);
        let img = screen();
        let out = editor
            .edit("p", &img, None, &EditParams::new())
            .await
            .unwrap()
            .value;
        let region = MockEditProvider::default_region(40, 60);
        assert_eq!(
            region,
            PixelRect {
                x0: 12,
                y0: 24,
                x1: 28,
                y1: 36
            }
        );
        let color = editor.color_for("p");
        assert_eq!(out.pixel(20, 30), &color);
        assert_eq!(out.pixel(0, 0), img.pixel(0, 0));
    }

    #[test]
    fn different_prompts_give_different_colors() {
        let editor = MockEditProvider::new("e", 3, false);
        assert_ne!(editor.color_for("a"), editor.color_for("b"));
    }
}
