//! HTTPS/JSON adapters for real providers.
//!
//! Every call goes through the provider's rate limiter and retry policy and
//! is timed; the resulting [`CallMeta`] ends up in suggestion provenance.
//! Request logging at debug level never includes credentials or image data.

mod gemini;
mod openai;
mod replicate;

use std::io::Cursor;
use std::sync::Arc;
use std::time::{Duration, Instant};

use async_trait::async_trait;
use base64::Engine as _;
use reqwest::header::HeaderMap;
use reqwest::StatusCode;
use uisuggest_core::{CallMeta, MaskImage, ScreenImage};

use crate::{
    with_retry, ChatParams, ChatVisionProvider, Completion, EditParams, ImageEditProvider,
    ProviderConfig, ProviderError, ProviderKind, RateLimiter, Sleeper, TokioSleeper,
};

/// Shared plumbing for one configured provider.
pub(crate) struct Transport {
    pub(crate) config: ProviderConfig,
    pub(crate) client: reqwest::Client,
    limiter: RateLimiter,
    sleeper: Arc<dyn Sleeper>,
}

impl Transport {
    fn new(config: ProviderConfig, sleeper: Arc<dyn Sleeper>) -> Result<Self, ProviderError> {
        let client = reqwest::Client::builder()
            .timeout(Duration::from_secs(config.timeout_secs.max(1)))
            .build()
            .map_err(|e| ProviderError::Transport(e.to_string()))?;
        Ok(Self {
            limiter: RateLimiter::per_minute(config.rate_limit_per_minute),
            config,
            client,
            sleeper,
        })
    }

    pub(crate) fn url(&self, path: &str) -> String {
        format!("{}/{}", self.config.endpoint.trim_end_matches('/'), path)
    }

    /// Credential check, then rate-limited, retried and timed execution.
    async fn run<T, F, Fut>(&self, op: F) -> Result<Completion<T>, ProviderError>
    where
        F: Fn(String) -> Fut,
        Fut: std::future::Future<Output = Result<T, ProviderError>>,
    {
        let credential = self.config.credential()?;
        let started = Instant::now();
        let (value, attempts) = with_retry(&self.config.retry, self.sleeper.as_ref(), |attempt| {
            let credential = credential.clone();
            let op = &op;
            async move {
                self.limiter.acquire().await;
                tracing::debug!(
                    provider = %self.config.name,
                    model = %self.config.model_id,
                    attempt,
                    "dispatching provider request"
                );
                op(credential).await
            }
        })
        .await?;
        Ok(Completion {
            value,
            meta: CallMeta {
                latency_ms: started.elapsed().as_millis() as u64,
                attempts,
            },
        })
    }
}

pub(crate) fn map_reqwest(e: reqwest::Error) -> ProviderError {
    if e.is_timeout() {
        ProviderError::Timeout
    } else if e.is_decode() {
        ProviderError::BadResponse(e.to_string())
    } else {
        ProviderError::Transport(e.to_string())
    }
}

/// Maps a non-success HTTP status onto the error taxonomy.
pub(crate) fn map_status(status: StatusCode, headers: &HeaderMap, body: &str) -> ProviderError {
    let excerpt: String = body.chars().take(300).collect();
    match status.as_u16() {
        401 | 403 => ProviderError::AuthFailure(format!("{status}: {excerpt}")),
        408 => ProviderError::Timeout,
        429 => ProviderError::RateLimited {
            retry_after_ms: headers
                .get(reqwest::header::RETRY_AFTER)
                .and_then(|v| v.to_str().ok())
                .and_then(|v| v.trim().parse::<u64>().ok())
                .map(|secs| secs * 1000),
        },
        s if s >= 500 => ProviderError::Transport(format!("{status}: {excerpt}")),
        _ => ProviderError::InvalidRequest(format!("{status}: {excerpt}")),
    }
}

/// Sends `request` and returns the body as JSON, mapping failures.
pub(crate) async fn send_json(
    request: reqwest::RequestBuilder,
) -> Result<serde_json::Value, ProviderError> {
    let resp = request.send().await.map_err(map_reqwest)?;
    let status = resp.status();
    let headers = resp.headers().clone();
    let text = resp.text().await.map_err(map_reqwest)?;
    if !status.is_success() {
        return Err(map_status(status, &headers, &text));
    }
    serde_json::from_str(&text).map_err(|e| ProviderError::BadResponse(e.to_string()))
}

pub(crate) fn png_base64(image: &ScreenImage) -> String {
    base64::engine::general_purpose::STANDARD.encode(image.encode_png())
}

pub(crate) fn png_data_url(image: &ScreenImage) -> String {
    format!("data:image/png;base64,{}", png_base64(image))
}

pub(crate) fn decode_base64_image(data: &str) -> Result<ScreenImage, ProviderError> {
    let data = data.rsplit_once("base64,").map_or(data, |(_, d)| d);
    let bytes = base64::engine::general_purpose::STANDARD
        .decode(data.trim())
        .map_err(|e| ProviderError::BadResponse(format!("invalid base64 image: {e}")))?;
    ScreenImage::decode(&bytes).map_err(|e| ProviderError::BadResponse(e.to_string()))
}

/// Mask in the alpha convention some edit APIs expect: transparent pixels
/// are editable, opaque ones preserved.
pub(crate) fn alpha_mask_png(mask: &MaskImage) -> Vec<u8> {
    let pixels: Vec<u8> = mask
        .pixels()
        .iter()
        .flat_map(|&v| {
            let alpha = if v == MaskImage::EDITABLE { 0 } else { 255 };
            [0, 0, 0, alpha]
        })
        .collect();
    let buf = image::RgbaImage::from_raw(mask.width(), mask.height(), pixels)
        .expect("mask dimensions are consistent");
    let mut out = Cursor::new(Vec::new());
    buf.write_to(&mut out, image::ImageFormat::Png)
        .expect("in-memory PNG encoding");
    out.into_inner()
}

/// Call params layered over the profile's configured params.
pub(crate) fn merged_params(config: &ProviderConfig, call: &EditParams) -> EditParams {
    let mut out = config.params.clone();
    for (k, v) in call {
        out.insert(k.clone(), v.clone());
    }
    out
}

/// A chat-vision model reached over HTTP.
pub struct HttpChatProvider {
    transport: Transport,
}

impl HttpChatProvider {
    pub fn new(config: ProviderConfig) -> Result<Self, ProviderError> {
        Self::with_sleeper(config, Arc::new(TokioSleeper))
    }

    pub fn with_sleeper(
        config: ProviderConfig,
        sleeper: Arc<dyn Sleeper>,
    ) -> Result<Self, ProviderError> {
        if config.kind != ProviderKind::OpenaiChat {
            return Err(ProviderError::InvalidRequest(format!(
                "{} is not a chat provider kind",
                config.name
            )));
        }
        Ok(Self {
            transport: Transport::new(config, sleeper)?,
        })
    }
}

#[async_trait]
impl ChatVisionProvider for HttpChatProvider {
    fn name(&self) -> &str {
        &self.transport.config.name
    }

    fn model_id(&self) -> &str {
        &self.transport.config.model_id
    }

    async fn complete(
        &self,
        prompt: &str,
        image: &ScreenImage,
        params: &ChatParams,
    ) -> Result<Completion<String>, ProviderError> {
        let t = &self.transport;
        t.run(|credential| openai::chat(t, credential, prompt, image, params))
            .await
    }
}

/// An image-edit model reached over HTTP.
pub struct HttpEditProvider {
    transport: Transport,
}

impl HttpEditProvider {
    pub fn new(config: ProviderConfig) -> Result<Self, ProviderError> {
        Self::with_sleeper(config, Arc::new(TokioSleeper))
    }

    pub fn with_sleeper(
        config: ProviderConfig,
        sleeper: Arc<dyn Sleeper>,
    ) -> Result<Self, ProviderError> {
        if config.kind == ProviderKind::OpenaiChat {
            return Err(ProviderError::InvalidRequest(format!(
                "{} is not an image-edit provider kind",
                config.name
            )));
        }
        Ok(Self {
            transport: Transport::new(config, sleeper)?,
        })
    }
}

#[async_trait]
impl ImageEditProvider for HttpEditProvider {
    fn name(&self) -> &str {
        &self.transport.config.name
    }

    fn model_id(&self) -> &str {
        &self.transport.config.model_id
    }

    fn supports_mask(&self) -> bool {
        self.transport.config.supports_mask
    }

    async fn edit(
        &self,
        prompt: &str,
        image: &ScreenImage,
        mask: Option<&MaskImage>,
        params: &EditParams,
    ) -> Result<Completion<ScreenImage>, ProviderError> {
        if mask.is_some() && !self.supports_mask() {
            return Err(ProviderError::MaskUnsupported(self.name().to_string()));
        }
        let t = &self.transport;
        let params = merged_params(&t.config, params);
        match t.config.kind {
            ProviderKind::OpenaiImageEdit => {
                t.run(|c| openai::image_edit(t, c, prompt, image, mask, &params))
                    .await
            }
            ProviderKind::Gemini => t.run(|c| gemini::image_edit(t, c, prompt, image, &params)).await,
            ProviderKind::Replicate => {
                t.run(|c| replicate::image_edit(t, c, prompt, image, &params))
                    .await
            }
            ProviderKind::OpenaiChat => unreachable!("rejected at construction"),
        }
    }
}
