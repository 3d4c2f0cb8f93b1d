//! Time and id sources, swappable for deterministic runs.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use chrono::{DateTime, Duration, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub trait Clock: Send + Sync {
    fn now(&self) -> DateTime<Utc>;
}

pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> DateTime<Utc> {
        Utc::now()
    }
}

/// Starts at `start` and advances by `step` on every reading.
pub struct SteppingClock {
    start: DateTime<Utc>,
    step: Duration,
    ticks: AtomicU64,
}

impl SteppingClock {
    pub fn new(start: DateTime<Utc>, step: Duration) -> Self {
        Self {
            start,
            step,
            ticks: AtomicU64::new(0),
        }
    }
}

impl Clock for SteppingClock {
    fn now(&self) -> DateTime<Utc> {
        let n = self.ticks.fetch_add(1, Ordering::SeqCst);
        self.start + self.step * n as i32
    }
}

pub trait IdGen: Send + Sync {
    /// A fresh id such as `s-3f9a...`.
    fn next_id(&self, prefix: &str) -> String;
}

fn format_id(prefix: &str, bits: u64) -> String {
    format!("{prefix}-{bits:016x}")
}

pub struct RandomIds;

impl IdGen for RandomIds {
    fn next_id(&self, prefix: &str) -> String {
        format_id(prefix, rand::rng().random())
    }
}

pub struct SeededIds(Mutex<ChaCha8Rng>);

impl SeededIds {
    pub fn new(seed: u64) -> Self {
        Self(Mutex::new(ChaCha8Rng::seed_from_u64(seed)))
    }
}

impl IdGen for SeededIds {
    fn next_id(&self, prefix: &str) -> String {
        format_id(prefix, self.0.lock().expect("id generator lock").random())
    }
}
