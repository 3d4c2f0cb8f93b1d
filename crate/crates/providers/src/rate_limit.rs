use std::collections::VecDeque;
use std::time::Duration;

use tokio::sync::Mutex;
use tokio::time::Instant;

/// Sliding-window limiter: at most `limit` dispatches in any `window`.
/// A limit of zero disables limiting.
#[derive(Debug)]
pub struct RateLimiter {
    limit: usize,
    window: Duration,
    dispatched: Mutex<VecDeque<Instant>>,
}

impl RateLimiter {
    pub fn per_minute(limit: u32) -> Self {
        Self::new(limit as usize, Duration::from_secs(60))
    }

    pub fn new(limit: usize, window: Duration) -> Self {
        Self {
            limit,
            window,
            dispatched: Mutex::new(VecDeque::with_capacity(limit)),
        }
    }

    /// Waits until a dispatch slot is free and claims it.
    pub async fn acquire(&self) {
        if self.limit == 0 {
            return;
        }
        loop {
            let wait = {
                let mut log = self.dispatched.lock().await;
                let now = Instant::now();
                while log
                    .front()
                    .is_some_and(|&t| now.duration_since(t) >= self.window)
                {
                    log.pop_front();
                }
                if log.len() < self.limit {
                    log.push_back(now);
                    return;
                }
                self.window - now.duration_since(log[0])
            };
            tokio::time::sleep(wait).await;
        }
    }
}
