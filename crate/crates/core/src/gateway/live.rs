//! Live backend speaking the de-facto chat-completions HTTP contract.
//!
//! Candidate scoring prefers teacher-forcing through the legacy
//! `/completions` endpoint (`echo=true`), summing the log-probabilities of
//! the candidate suffix. Endpoints without that support can fall back to
//! first-token scoring or report scoring as unsupported.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use serde_json::{json, Value};

use super::backend::{LogprobMode, PolicyBackend};
use super::types::{
    softmax_from_logprobs, ActionDistribution, BackendError, CompletionResult, DistributionEntry,
    Message, Role, ScoringMethod, TokenUsage,
};

pub const API_KEY_ENV: &str = "REFLACT_API_KEY";
pub const BASE_URL_ENV: &str = "REFLACT_BASE_URL";

/// Process-wide count of attempted HTTP requests; the scripted and replay
/// paths never touch it, which is what the no-network guarantee audits.
static NETWORK_ATTEMPTS: AtomicU64 = AtomicU64::new(0);

pub fn network_attempts() -> u64 {
    NETWORK_ATTEMPTS.load(Ordering::Relaxed)
}

fn record_attempt() {
    NETWORK_ATTEMPTS.fetch_add(1, Ordering::Relaxed);
}

/// Token-bucket rate limiter shared by every live backend of one run;
/// episodes block until a token is available.
#[derive(Debug)]
pub struct RateLimiter {
    bucket: Mutex<Bucket>,
    rate_per_sec: f64,
    capacity: f64,
}

#[derive(Debug)]
struct Bucket {
    tokens: f64,
    refilled: Instant,
}

impl RateLimiter {
    pub fn new(rate_per_sec: f64, burst: u32) -> Arc<Self> {
        let capacity = burst.max(1) as f64;
        Arc::new(Self {
            bucket: Mutex::new(Bucket {
                tokens: capacity,
                refilled: Instant::now(),
            }),
            rate_per_sec: rate_per_sec.max(0.001),
            capacity,
        })
    }

    /// Take one token, sleeping until the bucket refills far enough.
    pub fn acquire(&self) {
        loop {
            let wait = {
                let mut bucket = self.bucket.lock().expect("rate limiter lock");
                let elapsed = bucket.refilled.elapsed().as_secs_f64();
                bucket.tokens = (bucket.tokens + elapsed * self.rate_per_sec).min(self.capacity);
                bucket.refilled = Instant::now();
                if bucket.tokens >= 1.0 {
                    bucket.tokens -= 1.0;
                    return;
                }
                (1.0 - bucket.tokens) / self.rate_per_sec
            };
            std::thread::sleep(Duration::from_secs_f64(wait.min(0.25)));
        }
    }
}

#[derive(Debug, Clone)]
pub struct LiveConfig {
    pub base_url: String,
    pub model_name: String,
    pub temperature: f64,
    pub max_tokens: u32,
    pub logprob_mode: LogprobMode,
    pub max_retries: u32,
    pub timeout: Duration,
    pub backoff_base: Duration,
}

impl LiveConfig {
    pub fn new(base_url: impl Into<String>, model_name: impl Into<String>) -> Self {
        Self {
            base_url: base_url.into(),
            model_name: model_name.into(),
            temperature: 0.0,
            max_tokens: 256,
            logprob_mode: LogprobMode::Echo,
            max_retries: 3,
            timeout: Duration::from_secs(60),
            backoff_base: Duration::from_millis(200),
        }
    }
}

pub struct LiveBackend {
    cfg: LiveConfig,
    api_key: String,
    client: reqwest::blocking::Client,
    limiter: Option<Arc<RateLimiter>>,
}

impl LiveBackend {
    /// The API key comes from the environment, never from config files.
    pub fn new(cfg: LiveConfig) -> Result<Self, BackendError> {
        let api_key =
            std::env::var(API_KEY_ENV).map_err(|_| BackendError::MissingSecret(API_KEY_ENV))?;
        let client = reqwest::blocking::Client::builder()
            .timeout(cfg.timeout)
            .build()
            .map_err(|e| BackendError::Transport {
                attempts: 0,
                detail: e.to_string(),
            })?;
        Ok(Self {
            cfg,
            api_key,
            client,
            limiter: None,
        })
    }

    /// Share a token bucket across the backends of one suite run.
    pub fn with_limiter(mut self, limiter: Arc<RateLimiter>) -> Self {
        self.limiter = Some(limiter);
        self
    }

    fn post_json(&self, path: &str, body: &Value) -> Result<Value, BackendError> {
        let url = format!("{}{}", self.cfg.base_url.trim_end_matches('/'), path);
        let mut last_detail = String::new();
        for attempt in 0..self.cfg.max_retries {
            if attempt > 0 {
                std::thread::sleep(self.cfg.backoff_base * 2u32.pow(attempt - 1));
            }
            if let Some(limiter) = &self.limiter {
                limiter.acquire();
            }
            record_attempt();
            let sent = self
                .client
                .post(&url)
                .bearer_auth(&self.api_key)
                .json(body)
                .send();
            match sent {
                Ok(resp) => {
                    let status = resp.status();
                    if status.is_success() {
                        return resp
                            .json::<Value>()
                            .map_err(|e| BackendError::BadResponse(e.to_string()));
                    }
                    let transient = status.as_u16() == 429 || status.is_server_error();
                    last_detail = format!("HTTP {status}");
                    if !transient {
                        return Err(BackendError::Transport {
                            attempts: attempt + 1,
                            detail: last_detail,
                        });
                    }
                }
                Err(e) => last_detail = e.to_string(),
            }
        }
        Err(BackendError::Transport {
            attempts: self.cfg.max_retries,
            detail: last_detail,
        })
    }

    fn chat_body(&self, messages: &[Message]) -> Value {
        json!({
            "model": self.cfg.model_name,
            "messages": messages,
            "temperature": self.cfg.temperature,
            "max_tokens": self.cfg.max_tokens,
        })
    }

    /// Flatten a chat into a single prompt for the completions endpoint,
    /// ending at the assistant's turn so candidates append directly.
    fn flatten(messages: &[Message]) -> String {
        let mut out = String::new();
        for m in messages {
            let role = match m.role {
                Role::System => "system",
                Role::User => "user",
                Role::Assistant => "assistant",
            };
            out.push_str(role);
            out.push_str(": ");
            out.push_str(&m.content);
            out.push_str("\n\n");
        }
        out.push_str("assistant: ");
        out
    }

    /// Sum the log-probabilities of the candidate suffix of an echoed prompt.
    fn echo_score(&self, base: &str, candidate: &str) -> Result<f64, BackendError> {
        let prompt = format!("{base}{candidate}");
        let body = json!({
            "model": self.cfg.model_name,
            "prompt": prompt,
            "max_tokens": 0,
            "echo": true,
            "logprobs": 1,
            "temperature": 0.0,
        });
        let resp = self.post_json("/completions", &body)?;
        let lp = resp["choices"][0]["logprobs"].clone();
        let offsets = lp["text_offset"].as_array().cloned().ok_or_else(|| {
            BackendError::UnsupportedByBackend("endpoint returned no logprobs".into())
        })?;
        let token_logprobs = lp["token_logprobs"].as_array().cloned().ok_or_else(|| {
            BackendError::UnsupportedByBackend("endpoint returned no token logprobs".into())
        })?;
        let cut = base.len() as u64;
        let mut sum = 0.0;
        for (off, lp) in offsets.iter().zip(token_logprobs.iter()) {
            if off.as_u64().unwrap_or(0) >= cut {
                // The first token of a sequence can carry null.
                sum += lp.as_f64().unwrap_or(0.0);
            }
        }
        Ok(sum)
    }

    fn first_token_scores(
        &self,
        messages: &[Message],
        candidates: &[String],
    ) -> Result<Vec<f64>, BackendError> {
        let mut body = self.chat_body(messages);
        body["max_tokens"] = json!(1);
        body["logprobs"] = json!(true);
        body["top_logprobs"] = json!(20);
        let resp = self.post_json("/chat/completions", &body)?;
        let top = resp["choices"][0]["logprobs"]["content"][0]["top_logprobs"]
            .as_array()
            .cloned()
            .ok_or_else(|| {
                BackendError::UnsupportedByBackend("endpoint returned no logprobs".into())
            })?;
        const FLOOR: f64 = -30.0;
        Ok(candidates
            .iter()
            .map(|cand| {
                top.iter()
                    .filter_map(|entry| {
                        let token = entry["token"].as_str()?;
                        let lp = entry["logprob"].as_f64()?;
                        cand.starts_with(token.trim_start()).then_some(lp)
                    })
                    .fold(FLOOR, f64::max)
            })
            .collect())
    }
}

impl PolicyBackend for LiveBackend {
    fn complete(&mut self, messages: &[Message]) -> Result<CompletionResult, BackendError> {
        let resp = self.post_json("/chat/completions", &self.chat_body(messages))?;
        let text = resp["choices"][0]["message"]["content"]
            .as_str()
            .ok_or_else(|| BackendError::BadResponse("missing choices[0].message.content".into()))?
            .to_string();
        let usage = resp.get("usage").and_then(|u| {
            Some(TokenUsage {
                prompt_tokens: u["prompt_tokens"].as_u64()?,
                completion_tokens: u["completion_tokens"].as_u64()?,
            })
        });
        let finish_reason = resp["choices"][0]["finish_reason"]
            .as_str()
            .map(str::to_string);
        Ok(CompletionResult {
            text,
            usage,
            finish_reason,
        })
    }

    fn score_candidates(
        &mut self,
        messages: &[Message],
        candidates: &[String],
    ) -> Result<ActionDistribution, BackendError> {
        if candidates.is_empty() {
            return Err(BackendError::UnsupportedByBackend(
                "empty candidate set".into(),
            ));
        }
        let logprobs: Vec<f64> = match self.cfg.logprob_mode {
            LogprobMode::None => {
                return Err(BackendError::UnsupportedByBackend(
                    "logprob scoring disabled for this endpoint".into(),
                ))
            }
            LogprobMode::Echo => {
                let base = Self::flatten(messages);
                candidates
                    .iter()
                    .map(|c| self.echo_score(&base, c))
                    .collect::<Result<_, _>>()?
            }
            LogprobMode::FirstToken => self.first_token_scores(messages, candidates)?,
        };
        let probs = softmax_from_logprobs(&logprobs);
        let dist = ActionDistribution {
            entries: candidates
                .iter()
                .zip(probs)
                .map(|(c, p)| DistributionEntry {
                    action_text: c.clone(),
                    probability: p,
                })
                .collect(),
            method: ScoringMethod::Scored,
        };
        dist.check_invariants().map_err(BackendError::BadResponse)?;
        Ok(dist)
    }

    fn descriptor(&self) -> String {
        format!("live:{}", self.cfg.model_name)
    }
}
