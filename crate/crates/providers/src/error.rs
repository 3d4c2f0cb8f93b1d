use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProviderError {
    #[error("request timed out")]
    Timeout,

    #[error("authentication failed: {0}")]
    AuthFailure(String),

    #[error("rate limited by provider")]
    RateLimited { retry_after_ms: Option<u64> },

    #[error("transport error: {0}")]
    Transport(String),

    #[error("provider {0} does not accept masks")]
    MaskUnsupported(String),

    #[error("mask is {mask:?} but image is {image:?}")]
    MaskDimsMismatch { mask: (u32, u32), image: (u32, u32) },

    #[error("invalid request: {0}")]
    InvalidRequest(String),

    #[error("unusable provider response: {0}")]
    BadResponse(String),

    #[error("unknown provider {0}")]
    UnknownProvider(String),
}

impl ProviderError {
    /// Timeouts, rate limiting and transport failures are worth another try;
    /// credential and validation problems are not.
    pub fn is_retryable(&self) -> bool {
        matches!(
            self,
            ProviderError::Timeout
                | ProviderError::RateLimited { .. }
                | ProviderError::Transport(_)
        )
    }
}
