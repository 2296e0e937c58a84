//! Backends for the thought/action policy: live chat endpoints, replayed
//! logs, and scripted oracle policies, plus candidate-set scoring.

pub mod backend;
pub mod live;
pub mod replay;
pub mod scripted;
pub mod types;

pub use backend::{BackendKind, LogprobMode, PolicyBackend, ScriptedPolicy};
pub use live::{network_attempts, LiveBackend, LiveConfig, RateLimiter, API_KEY_ENV, BASE_URL_ENV};
pub use replay::{ReplayBackend, ReplayedCompletion};
pub use scripted::{ScriptedBackend, FAIL_ACTION, SCRIPTED_REFLECTION};
pub use types::{
    softmax_from_logprobs, ActionDistribution, BackendError, CompletionResult, DistributionEntry,
    Message, Role, ScoringMethod, TokenUsage,
};
