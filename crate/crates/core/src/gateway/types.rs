//! Transport types shared by every policy backend.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub role: Role,
    pub content: String,
}

impl Message {
    pub fn system(content: impl Into<String>) -> Self {
        Self {
            role: Role::System,
            content: content.into(),
        }
    }
    pub fn user(content: impl Into<String>) -> Self {
        Self {
            role: Role::User,
            content: content.into(),
        }
    }
    pub fn assistant(content: impl Into<String>) -> Self {
        Self {
            role: Role::Assistant,
            content: content.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenUsage {
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompletionResult {
    pub text: String,
    pub usage: Option<TokenUsage>,
    pub finish_reason: Option<String>,
}

/// A probability distribution over candidate action texts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionDistribution {
    pub entries: Vec<DistributionEntry>,
    pub method: ScoringMethod,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionEntry {
    pub action_text: String,
    pub probability: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoringMethod {
    Scored,
    Scripted,
    Replayed,
}

impl ActionDistribution {
    /// Entries must be distinct, non-negative and sum to one.
    pub fn check_invariants(&self) -> Result<(), String> {
        let total: f64 = self.entries.iter().map(|e| e.probability).sum();
        if (total - 1.0).abs() > 1e-6 {
            return Err(format!("probabilities sum to {total}"));
        }
        if self.entries.iter().any(|e| e.probability < 0.0) {
            return Err("negative probability".to_string());
        }
        let mut texts: Vec<&str> = self
            .entries
            .iter()
            .map(|e| e.action_text.as_str())
            .collect();
        texts.sort_unstable();
        texts.dedup();
        if texts.len() != self.entries.len() {
            return Err("duplicate candidate texts".to_string());
        }
        Ok(())
    }

    pub fn one_hot(candidates: &[String], hot: usize, method: ScoringMethod) -> Self {
        Self {
            entries: candidates
                .iter()
                .enumerate()
                .map(|(i, c)| DistributionEntry {
                    action_text: c.clone(),
                    probability: if i == hot { 1.0 } else { 0.0 },
                })
                .collect(),
            method,
        }
    }

    pub fn uniform(candidates: &[String], method: ScoringMethod) -> Self {
        let p = 1.0 / candidates.len() as f64;
        Self {
            entries: candidates
                .iter()
                .map(|c| DistributionEntry {
                    action_text: c.clone(),
                    probability: p,
                })
                .collect(),
            method,
        }
    }
}

/// Stable softmax over summed sequence log-probabilities.
pub fn softmax_from_logprobs(logprobs: &[f64]) -> Vec<f64> {
    let max = logprobs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logprobs.iter().map(|lp| (lp - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

#[derive(Debug, Error)]
pub enum BackendError {
    #[error("transport failed after {attempts} attempt(s): {detail}")]
    Transport { attempts: u32, detail: String },
    #[error("replay log exhausted at entry {cursor}")]
    ReplayExhausted { cursor: usize },
    #[error("scripted plan exhausted after {len} action(s)")]
    ScriptedDone { len: usize },
    #[error("backend cannot score candidates: {0}")]
    UnsupportedByBackend(String),
    #[error("missing secret: set {0} for live backends")]
    MissingSecret(&'static str),
    #[error("malformed response: {0}")]
    BadResponse(String),
}
