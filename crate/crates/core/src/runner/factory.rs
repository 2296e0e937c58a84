//! Per-episode backend construction from a serializable descriptor.

use std::path::PathBuf;

use crate::backbones::kind::BackboneKind;
use crate::gateway::backend::{BackendKind, PolicyBackend};
use crate::gateway::live::{LiveBackend, LiveConfig, RateLimiter};
use crate::gateway::replay::ReplayBackend;
use crate::gateway::scripted::ScriptedBackend;
use crate::taskgen::generate::TaskSpec;

use super::episode::RunnerError;
use super::persist::{read_trajectory_file, replay_completions, replay_distributions};

#[derive(Debug, Clone)]
pub struct BackendFactory {
    kind: BackendKind,
    limiter: Option<std::sync::Arc<RateLimiter>>,
}

impl BackendFactory {
    pub fn new(kind: BackendKind) -> Self {
        let limiter = match &kind {
            BackendKind::Live {
                requests_per_second: Some(rps),
                ..
            } => Some(RateLimiter::new(*rps, 1)),
            _ => None,
        };
        Self { kind, limiter }
    }

    pub fn descriptor(&self) -> String {
        self.kind.descriptor()
    }

    pub fn kind(&self) -> &BackendKind {
        &self.kind
    }

    /// Backends are single-episode-owned; live episodes share only process
    /// state (the network audit), replay and scripted ones own their cursor.
    pub fn build(
        &self,
        task: &TaskSpec,
        backbone: BackboneKind,
        trial_index: u32,
    ) -> Result<Box<dyn PolicyBackend>, RunnerError> {
        match &self.kind {
            BackendKind::Scripted { policy } => Ok(Box::new(ScriptedBackend::new(
                task,
                backbone,
                *policy,
                trial_index,
            )?)),
            BackendKind::Replay { log_path } => {
                let stored = read_trajectory_file(&PathBuf::from(log_path))?;
                Ok(Box::new(ReplayBackend::new(
                    replay_completions(&stored.trajectory),
                    replay_distributions(&stored.trajectory),
                    log_path.clone(),
                )))
            }
            BackendKind::Live {
                base_url,
                model_name,
                temperature,
                max_tokens,
                logprob_mode,
                requests_per_second: _,
                timeout_secs,
            } => {
                let mut cfg = LiveConfig::new(base_url.clone(), model_name.clone());
                cfg.temperature = *temperature;
                cfg.max_tokens = *max_tokens;
                cfg.logprob_mode = *logprob_mode;
                if let Some(secs) = timeout_secs {
                    cfg.timeout = std::time::Duration::from_secs(*secs);
                }
                let mut backend = LiveBackend::new(cfg)?;
                if let Some(limiter) = &self.limiter {
                    backend = backend.with_limiter(limiter.clone());
                }
                Ok(Box::new(backend))
            }
        }
    }
}
