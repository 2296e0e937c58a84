//! Replay backend: serves recorded assistant messages verbatim, in call
//! order, so a stored episode re-executes byte-for-byte.

use std::collections::VecDeque;

use super::backend::PolicyBackend;
use super::types::{ActionDistribution, BackendError, CompletionResult, Message, TokenUsage};

/// One recorded completion call.
#[derive(Debug, Clone)]
pub struct ReplayedCompletion {
    pub text: String,
    pub usage: Option<TokenUsage>,
}

pub struct ReplayBackend {
    completions: VecDeque<ReplayedCompletion>,
    /// One slot per recorded step; None replays a step whose scoring was
    /// skipped or degraded.
    distributions: VecDeque<Option<ActionDistribution>>,
    log_path: String,
    cursor: usize,
    len: usize,
}

impl ReplayBackend {
    pub fn new(
        completions: Vec<ReplayedCompletion>,
        distributions: Vec<Option<ActionDistribution>>,
        log_path: impl Into<String>,
    ) -> Self {
        let len = completions.len();
        Self {
            completions: completions.into(),
            distributions: distributions.into(),
            log_path: log_path.into(),
            cursor: 0,
            len,
        }
    }
}

impl PolicyBackend for ReplayBackend {
    fn complete(&mut self, _messages: &[Message]) -> Result<CompletionResult, BackendError> {
        let rec = self
            .completions
            .pop_front()
            .ok_or(BackendError::ReplayExhausted { cursor: self.len })?;
        self.cursor += 1;
        Ok(CompletionResult {
            text: rec.text,
            usage: rec.usage,
            finish_reason: Some("replay".into()),
        })
    }

    fn score_candidates(
        &mut self,
        _messages: &[Message],
        _candidates: &[String],
    ) -> Result<ActionDistribution, BackendError> {
        self.distributions
            .pop_front()
            .flatten()
            .ok_or_else(|| BackendError::UnsupportedByBackend("no recorded distribution".into()))
    }

    fn descriptor(&self) -> String {
        format!("replay:{}", self.log_path)
    }
}
