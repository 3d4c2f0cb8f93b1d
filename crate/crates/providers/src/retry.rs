use std::future::Future;
use std::time::Duration;

use async_trait::async_trait;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ProviderError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    pub backoff_base_ms: u64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            max_attempts: 3,
            backoff_base_ms: 500,
        }
    }
}

impl RetryPolicy {
    /// Upper bound of the jittered delay after failed attempt `k` (0-based):
    /// `base * 2^k`.
    pub fn backoff_cap(&self, k: u32) -> Duration {
        Duration::from_millis(self.backoff_base_ms.saturating_mul(1u64 << k.min(20)))
    }
}

#[async_trait]
pub trait Sleeper: Send + Sync {
    async fn sleep(&self, duration: Duration);
}

pub struct TokioSleeper;

#[async_trait]
impl Sleeper for TokioSleeper {
    async fn sleep(&self, duration: Duration) {
        tokio::time::sleep(duration).await;
    }
}

/// Runs `call` until it succeeds, fails with a non-retryable error, or
/// `policy.max_attempts` attempts have been made. The closure receives the
/// 1-based attempt number. Returns the value and the number of attempts.
///
/// Between attempts it sleeps a uniformly random duration in
/// `[0, base * 2^k]` (full jitter), or the provider's `Retry-After` if that
/// is longer.
pub async fn with_retry<T, F, Fut>(
    policy: &RetryPolicy,
    sleeper: &dyn Sleeper,
    mut call: F,
) -> Result<(T, u32), ProviderError>
where
    F: FnMut(u32) -> Fut,
    Fut: Future<Output = Result<T, ProviderError>>,
{
    let max_attempts = policy.max_attempts.max(1);
    let mut attempt = 1;
    loop {
        match call(attempt).await {
            Ok(v) => return Ok((v, attempt)),
            Err(e) if !e.is_retryable() || attempt >= max_attempts => return Err(e),
            Err(e) => {
                let cap = policy.backoff_cap(attempt - 1).as_millis() as u64;
                let mut delay = rand::rng().random_range(0..=cap);
                if let ProviderError::RateLimited {
                    retry_after_ms: Some(after),
                } = e
                {
                    delay = delay.max(after);
                }
                tracing::debug!(attempt, delay_ms = delay, error = %e, "retrying provider call");
                sleeper.sleep(Duration::from_millis(delay)).await;
                attempt += 1;
            }
        }
    }
}
