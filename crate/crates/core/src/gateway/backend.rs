//! The backend trait and serializable backend descriptors.

use serde::{Deserialize, Serialize};

use super::types::{ActionDistribution, BackendError, CompletionResult, Message};

/// A thought/action policy: produces one completion per turn and, when
/// supported, scores a candidate action set.
pub trait PolicyBackend: Send {
    fn complete(&mut self, messages: &[Message]) -> Result<CompletionResult, BackendError>;

    fn score_candidates(
        &mut self,
        messages: &[Message],
        candidates: &[String],
    ) -> Result<ActionDistribution, BackendError>;

    /// Short descriptor recorded in trajectory headers, e.g. "scripted:oracle".
    fn descriptor(&self) -> String;
}

/// How a live backend extracts candidate log-probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LogprobMode {
    /// Teacher-forcing through the legacy completions endpoint (echo=true);
    /// exact summed sequence log-probabilities.
    #[default]
    Echo,
    /// One chat request, first generated token's top log-probabilities
    /// matched against candidate prefixes. Approximate.
    FirstToken,
    /// The endpoint exposes no log-probabilities; scoring is unsupported.
    None,
}

/// Deterministic test policies for the scripted backend.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScriptedPolicy {
    /// Follow the oracle plan.
    Oracle,
    /// Emit an action the environment always rejects.
    Fail,
    /// Fail on trial 0, follow the oracle from trial 1 on.
    FailThenOracle,
    /// Uniform scoring unless an injected thought names the oracle action.
    Probe,
}

impl ScriptedPolicy {
    pub fn label(self) -> &'static str {
        match self {
            ScriptedPolicy::Oracle => "oracle",
            ScriptedPolicy::Fail => "fail",
            ScriptedPolicy::FailThenOracle => "fail-then-oracle",
            ScriptedPolicy::Probe => "probe",
        }
    }

    pub fn from_label(label: &str) -> Option<Self> {
        match label.to_lowercase().replace('_', "-").as_str() {
            "oracle" => Some(ScriptedPolicy::Oracle),
            "fail" => Some(ScriptedPolicy::Fail),
            "fail-then-oracle" => Some(ScriptedPolicy::FailThenOracle),
            "probe" => Some(ScriptedPolicy::Probe),
            _ => None,
        }
    }
}

/// Serializable backend selector; the runner instantiates a concrete
/// backend per episode from this.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BackendKind {
    Live {
        base_url: String,
        model_name: String,
        #[serde(default)]
        temperature: f64,
        #[serde(default = "default_max_tokens")]
        max_tokens: u32,
        #[serde(default)]
        logprob_mode: LogprobMode,
        /// Shared token-bucket rate limit across the run's episodes.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        requests_per_second: Option<f64>,
        /// Per-request timeout; the transport default applies when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        timeout_secs: Option<u64>,
    },
    Replay {
        log_path: String,
    },
    Scripted {
        #[serde(default = "default_policy")]
        policy: ScriptedPolicy,
    },
}

fn default_max_tokens() -> u32 {
    256
}

fn default_policy() -> ScriptedPolicy {
    ScriptedPolicy::Oracle
}

impl BackendKind {
    pub fn scripted_oracle() -> Self {
        BackendKind::Scripted {
            policy: ScriptedPolicy::Oracle,
        }
    }

    pub fn descriptor(&self) -> String {
        match self {
            BackendKind::Live { model_name, .. } => format!("live:{model_name}"),
            BackendKind::Replay { log_path } => format!("replay:{log_path}"),
            BackendKind::Scripted { policy } => format!("scripted:{}", policy.label()),
        }
    }
}
