use std::sync::Arc;
use std::time::Duration;

use rand::Rng;

use super::{ChatProvider, ChatRequest, LlmError, ProviderConfig};

/// Failure of a single delivery attempt.
#[derive(Debug, Clone, PartialEq)]
pub enum AttemptError {
    Timeout,
    Transport(String),
    Status { status: u16, body: String },
    Malformed(String),
}

impl AttemptError {
    fn is_retryable(&self) -> bool {
        match self {
            AttemptError::Timeout | AttemptError::Transport(_) => true,
            AttemptError::Status { status, .. } => *status == 429 || *status >= 500,
            AttemptError::Malformed(_) => false,
        }
    }

    fn into_llm_error(self, attempts: u32) -> LlmError {
        match self {
            AttemptError::Timeout => LlmError::Timeout { attempts },
            AttemptError::Transport(message) => LlmError::Transport { attempts, message },
            AttemptError::Status { status, body } => LlmError::ProviderRefusal { status, body },
            AttemptError::Malformed(m) => LlmError::Malformed(m),
        }
    }
}

/// One round trip to a provider, without retries.
pub trait Transport: Send + Sync {
    fn send(&self, request: &ChatRequest) -> Result<String, AttemptError>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct RetryPolicy {
    pub max_retries: u32,
    pub base: Duration,
    pub factor: f64,
    /// Relative jitter, 0.2 means ±20%.
    pub jitter: f64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            max_retries: 2,
            base: Duration::from_millis(250),
            factor: 2.0,
            jitter: 0.2,
        }
    }
}

impl RetryPolicy {
    /// Delay before retry number `retry` (0-based). `unit` in [-1, 1] picks
    /// the point inside the jitter band.
    pub fn delay(&self, retry: u32, unit: f64) -> Duration {
        let nominal = self.base.as_secs_f64() * self.factor.powi(retry as i32);
        let scaled = nominal * (1.0 + self.jitter * unit.clamp(-1.0, 1.0));
        Duration::from_secs_f64(scaled.max(0.0))
    }

    /// Upper bound on total backoff sleep across all retries.
    pub fn max_total_backoff(&self) -> Duration {
        (0..self.max_retries).map(|i| self.delay(i, 1.0)).sum()
    }
}

type Sleeper = Arc<dyn Fn(Duration) + Send + Sync>;

/// A transport wrapped in exponential backoff with jitter.
pub struct ResilientProvider<T> {
    transport: T,
    policy: RetryPolicy,
    sleep: Sleeper,
}

impl<T: Transport> ResilientProvider<T> {
    pub fn new(transport: T, policy: RetryPolicy) -> Self {
        Self {
            transport,
            policy,
            sleep: Arc::new(std::thread::sleep),
        }
    }

    pub fn with_sleeper(mut self, sleep: impl Fn(Duration) + Send + Sync + 'static) -> Self {
        self.sleep = Arc::new(sleep);
        self
    }

    pub fn transport(&self) -> &T {
        &self.transport
    }
}

impl<T: Transport> ChatProvider for ResilientProvider<T> {
    fn complete(&self, request: &ChatRequest) -> Result<String, LlmError> {
        request.validate()?;
        let max_attempts = self.policy.max_retries + 1;
        let mut attempt = 0;
        loop {
            attempt += 1;
            match self.transport.send(request) {
                Ok(text) => return Ok(text),
                Err(err) if err.is_retryable() && attempt < max_attempts => {
                    let unit = rand::rng().random_range(-1.0..=1.0);
                    let delay = self.policy.delay(attempt - 1, unit);
                    tracing::warn!(?err, attempt, ?delay, provider = %request.provider, "retrying provider call");
                    (self.sleep)(delay);
                }
                Err(err) => return Err(err.into_llm_error(attempt)),
            }
        }
    }
}

/// Send `request` through the provider described by `config`.
pub fn complete(request: &ChatRequest, config: &ProviderConfig) -> Result<String, LlmError> {
    config.build()?.complete(request)
}

#[cfg(test)]
mod tests {
    use std::sync::atomic::{AtomicU32, Ordering};
    use std::sync::Mutex;

    use super::*;
    use crate::llm::ProviderRole;

    struct Flaky {
        failures: u32,
        error: AttemptError,
        calls: AtomicU32,
    }

    impl Flaky {
        fn new(failures: u32, error: AttemptError) -> Self {
            Self {
                failures,
                error,
                calls: AtomicU32::new(0),
            }
        }
    }

    impl Transport for Flaky {
        fn send(&self, _request: &ChatRequest) -> Result<String, AttemptError> {
            let n = self.calls.fetch_add(1, Ordering::SeqCst) + 1;
            if n <= self.failures {
                Err(self.error.clone())
            } else {
                Ok("done".into())
            }
        }
    }

    fn request() -> ChatRequest {
        ChatRequest::single(ProviderRole::Assistant, "hello")
    }

    fn policy(max_retries: u32) -> RetryPolicy {
        RetryPolicy {
            max_retries,
            ..RetryPolicy::default()
        }
    }

    #[test]
    fn succeeds_after_two_failures() {
        let sleeps = Arc::new(Mutex::new(Vec::new()));
        let log = sleeps.clone();
        let provider = ResilientProvider::new(
            Flaky::new(2, AttemptError::Transport("reset".into())),
            policy(3),
        )
        .with_sleeper(move |d| log.lock().unwrap().push(d));
        assert_eq!(provider.complete(&request()).unwrap(), "done");
        assert_eq!(provider.transport().calls.load(Ordering::SeqCst), 3);

        let sleeps = sleeps.lock().unwrap();
        assert_eq!(sleeps.len(), 2);
        // 250ms ±20%, then 500ms ±20%
        assert!(sleeps[0] >= Duration::from_millis(200) && sleeps[0] <= Duration::from_millis(300));
        assert!(sleeps[1] >= Duration::from_millis(400) && sleeps[1] <= Duration::from_millis(600));
    }

    #[test]
    fn zero_retries_fails_fast() {
        let provider = ResilientProvider::new(
            Flaky::new(1, AttemptError::Transport("refused".into())),
            policy(0),
        )
        .with_sleeper(|_| panic!("no sleep expected"));
        let err = provider.complete(&request()).unwrap_err();
        assert!(matches!(err, LlmError::Transport { attempts: 1, .. }));
    }

    #[test]
    fn timeouts_report_attempts() {
        let provider = ResilientProvider::new(Flaky::new(10, AttemptError::Timeout), policy(2))
            .with_sleeper(|_| {});
        assert_eq!(provider.complete(&request()), Err(LlmError::Timeout { attempts: 3 }));
    }

    #[test]
    fn client_errors_are_not_retried() {
        let provider = ResilientProvider::new(
            Flaky::new(
                1,
                AttemptError::Status {
                    status: 400,
                    body: "bad".into(),
                },
            ),
            policy(3),
        )
        .with_sleeper(|_| {});
        let err = provider.complete(&request()).unwrap_err();
        assert_eq!(
            err,
            LlmError::ProviderRefusal {
                status: 400,
                body: "bad".into()
            }
        );
        assert_eq!(provider.transport().calls.load(Ordering::SeqCst), 1);
    }

    #[test]
    fn delay_grows_geometrically() {
        let p = RetryPolicy::default();
        assert_eq!(p.delay(0, 0.0), Duration::from_millis(250));
        assert_eq!(p.delay(1, 0.0), Duration::from_millis(500));
        assert_eq!(p.delay(2, 0.0), Duration::from_millis(1000));
        assert_eq!(p.delay(0, 1.0), Duration::from_millis(300));
        assert_eq!(p.delay(0, -1.0), Duration::from_millis(200));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn attempts_equal_min_of_success_and_budget(failures in 0u32..8, max_retries in 0u32..6) {
                let provider = ResilientProvider::new(
                    Flaky::new(failures, AttemptError::Transport("x".into())),
                    policy(max_retries),
                )
                .with_sleeper(|_| {});
                let result = provider.complete(&request());
                let observed = provider.transport().calls.load(Ordering::SeqCst);
                prop_assert_eq!(observed, (failures + 1).min(max_retries + 1));
                prop_assert_eq!(result.is_ok(), failures <= max_retries);
            }
        }
    }
}
