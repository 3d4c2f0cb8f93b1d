//! Uniform access to the two model families the generation pipeline needs:
//! chat models that look at a screenshot and answer in text, and image-edit
//! models that return a modified screenshot.
//!
//! Real providers speak HTTPS/JSON and are described entirely by
//! [`ProviderConfig`] data. [`mock`] holds deterministic offline stand-ins
//! used by tests, the demo server and `bench run --mock`.

mod config;
mod error;
pub mod http;
pub mod mock;
mod ops;
mod rate_limit;
mod registry;
mod retry;

use async_trait::async_trait;
use serde_json::{Map, Value};
use uisuggest_core::{CallMeta, MaskImage, ScreenImage};

pub use config::{builtin_profiles, ProviderConfig, ProviderKind, ProviderProfiles};
pub use error::ProviderError;
pub use ops::{chat_complete, image_edit};
pub use rate_limit::RateLimiter;
pub use registry::ProviderRegistry;
pub use retry::{with_retry, RetryPolicy, Sleeper, TokioSleeper};

/// Free-form provider parameters (e.g. `quality = "high"`).
pub type EditParams = Map<String, Value>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChatParams {
    pub temperature: f64,
}

impl Default for ChatParams {
    fn default() -> Self {
        Self { temperature: 1.0 }
    }
}

/// A provider answer plus call metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct Completion<T> {
    pub value: T,
    pub meta: CallMeta,
}

#[async_trait]
pub trait ChatVisionProvider: Send + Sync {
    fn name(&self) -> &str;
    fn model_id(&self) -> &str;

    /// Returns the raw model text, untrimmed.
    async fn complete(
        &self,
        prompt: &str,
        image: &ScreenImage,
        params: &ChatParams,
    ) -> Result<Completion<String>, ProviderError>;
}

#[async_trait]
pub trait ImageEditProvider: Send + Sync {
    fn name(&self) -> &str;
    fn model_id(&self) -> &str;
    fn supports_mask(&self) -> bool;

    async fn edit(
        &self,
        prompt: &str,
        image: &ScreenImage,
        mask: Option<&MaskImage>,
        params: &EditParams,
    ) -> Result<Completion<ScreenImage>, ProviderError>;
}
