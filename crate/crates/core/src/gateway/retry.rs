use std::sync::Arc;
use std::time::Duration;

pub type Sleeper = Arc<dyn Fn(Duration) + Send + Sync>;

pub fn thread_sleep() -> Sleeper {
    Arc::new(std::thread::sleep)
}

pub fn no_sleep() -> Sleeper {
    Arc::new(|_| {})
}

/// Exponential backoff: `base · 2^retry`, capped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Backoff {
    pub base: Duration,
    pub cap: Duration,
}

impl Default for Backoff {
    fn default() -> Self {
        Backoff { base: Duration::from_millis(500), cap: Duration::from_secs(30) }
    }
}

impl Backoff {
    /// Delay before retry number `retry` (0-based).
    pub fn delay(&self, retry: u32) -> Duration {
        let factor = 1u32.checked_shl(retry.min(31)).unwrap_or(u32::MAX);
        self.base.saturating_mul(factor).min(self.cap)
    }
}

pub(crate) enum Outcome<T, E> {
    Done(T),
    Retry(E),
    Fail(E),
}

/// Runs `op` up to `max_retries + 1` times, sleeping between attempts.
/// Returns the last retryable error together with the attempt count.
pub(crate) fn with_retries<T, E>(
    max_retries: u32,
    backoff: &Backoff,
    sleep: &Sleeper,
    mut op: impl FnMut(u32) -> Outcome<T, E>,
) -> Result<T, (E, u32)> {
    let mut attempt = 0;
    loop {
        match op(attempt) {
            Outcome::Done(v) => return Ok(v),
            Outcome::Fail(e) => return Err((e, attempt + 1)),
            Outcome::Retry(e) if attempt >= max_retries => return Err((e, attempt + 1)),
            Outcome::Retry(_) => {
                sleep(backoff.delay(attempt));
                attempt += 1;
            }
        }
    }
}
