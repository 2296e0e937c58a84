//! The reasoning–acting loop for one episode.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backbones::catalog::{
    effective_parse_kind, format_reminder, CatalogError, CatalogFlavor,
};
use crate::backbones::context::{turn_messages, Context, HistoryEntry};
use crate::backbones::kind::{Backbone, BackboneKind};
use crate::backbones::parse::parse_output;
use crate::gateway::types::{ActionDistribution, BackendError, Message, TokenUsage};
use crate::gateway::PolicyBackend;
use crate::taskgen::generate::TaskSpec;
use crate::world::goal::{evaluate_goal, ProgressReport};
use crate::world::grammar::parse_action;
use crate::world::render::render_scene;
use crate::world::step::{step, step_rejected};
use crate::world::valid::valid_actions;

use super::config::RunConfig;

#[derive(Debug, Error)]
pub enum RunnerError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error("backend construction failed: {0}")]
    Backend(#[from] BackendError),
    #[error("oracle failure: {0}")]
    Oracle(#[from] crate::taskgen::oracle::OracleError),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed trajectory log: {0}")]
    BadLog(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: u32,
    pub reasoning_text: Option<String>,
    pub action_text: String,
    pub parsed: Option<crate::world::grammar::ActionCommand>,
    pub observation_text: String,
    pub nothing_happened: bool,
    /// Latched progress after this step.
    pub progress: f64,
    pub usage: Option<TokenUsage>,
    pub distribution: Option<ActionDistribution>,
    pub lenient_parse: bool,
    /// The completion this turn settled on, verbatim.
    pub raw_output: String,
    /// Earlier malformed completions consumed by corrective retries, in
    /// call order; replay must serve these before `raw_output`.
    pub discarded_attempts: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminatedBy {
    Goal,
    Budget,
    BackendError,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub task_id: String,
    pub backbone: BackboneKind,
    pub backend: String,
    pub steps: Vec<StepRecord>,
    pub final_progress: f64,
    pub success: bool,
    pub terminated_by: TerminatedBy,
    /// Measured, not persisted: keeps stored trajectories and manifests
    /// bit-identical across reruns.
    #[serde(skip, default)]
    pub wall_time: Duration,
}

impl Trajectory {
    pub fn check_invariants(&self) -> Result<(), String> {
        if self.success && self.terminated_by != TerminatedBy::Goal {
            return Err("successful trajectory not terminated by goal".to_string());
        }
        for (i, s) in self.steps.iter().enumerate() {
            if s.t as usize != i + 1 {
                return Err(format!("step index {} at position {i}", s.t));
            }
        }
        Ok(())
    }
}

/// The initial observation: scene description plus the task line.
pub fn initial_observation(task: &TaskSpec) -> String {
    format!(
        "{}\n{}",
        render_scene(&task.initial_state),
        task.instruction_text
    )
}

fn merge_usage(a: Option<TokenUsage>, b: Option<TokenUsage>) -> Option<TokenUsage> {
    match (a, b) {
        (Some(x), Some(y)) => Some(TokenUsage {
            prompt_tokens: x.prompt_tokens + y.prompt_tokens,
            completion_tokens: x.completion_tokens + y.completion_tokens,
        }),
        (Some(x), None) | (None, Some(x)) => Some(x),
        (None, None) => None,
    }
}

/// Run one episode: build context, complete, parse, act, evaluate; stop on
/// success, exhausted budget, or an unrecoverable backend failure. Format
/// failures become in-band invalid actions after the corrective retries.
pub fn run_episode(
    task: &TaskSpec,
    backbone: &Backbone,
    backend: &mut dyn PolicyBackend,
    cfg: &RunConfig,
    memory: &[String],
) -> Result<Trajectory, RunnerError> {
    cfg.check().map_err(RunnerError::InvalidConfig)?;
    let started = Instant::now();
    let flavor = CatalogFlavor::from(task.env_flavor());

    let mut state = task.initial_state.clone();
    let mut ctx = Context::new(
        task.instruction_text.clone(),
        task.env_flavor(),
        task.task_type,
        initial_observation(task),
    );
    let mut progress = ProgressReport::zero();
    let mut steps: Vec<StepRecord> = Vec::new();
    let mut terminated_by = TerminatedBy::Budget;

    'episode: for t in 1..=cfg.step_budget {
        debug_assert_eq!(ctx.t, t);
        let messages = turn_messages(backbone, &ctx, memory)?;

        let distribution = if cfg.record_distributions {
            score_candidates_for_state(&state, backend, &messages)
        } else {
            None
        };

        // Completion, with corrective retries on format errors.
        let effective = effective_parse_kind(backbone.kind, t);
        let mut discarded: Vec<String> = Vec::new();
        let mut usage: Option<TokenUsage> = None;
        let mut parsed_output = None;
        let mut last_raw = String::new();
        let mut call_messages: Vec<Message> = messages;
        for attempt in 0..=cfg.retry_on_format_error {
            let completion = match backend.complete(&call_messages) {
                Ok(c) => c,
                Err(_) => {
                    terminated_by = TerminatedBy::BackendError;
                    break 'episode;
                }
            };
            usage = merge_usage(usage, completion.usage);
            last_raw = completion.text.clone();
            match parse_output(effective, &completion.text) {
                Ok(out) => {
                    parsed_output = Some(out);
                    break;
                }
                Err(_) if attempt < cfg.retry_on_format_error => {
                    discarded.push(completion.text.clone());
                    call_messages.push(Message::assistant(completion.text));
                    call_messages.push(Message::user(format_reminder(effective, flavor)?));
                }
                Err(_) => {}
            }
        }

        let (reasoning_text, action_text, lenient, raw_output) = match &parsed_output {
            Some(out) => (
                out.reasoning_text.clone(),
                out.action_text.clone(),
                out.lenient,
                out.raw.clone(),
            ),
            // Unrecoverable format failure: in-band invalid action.
            None => (None, String::new(), false, last_raw.clone()),
        };

        let (next_state, obs, parsed_cmd) = if action_text.is_empty() {
            let (s, o) = step_rejected(state);
            (s, o, None)
        } else {
            match parse_action(&action_text) {
                Ok(cmd) => {
                    let (s, o) = step(state, &cmd);
                    (s, o, Some(cmd))
                }
                Err(_) => {
                    let (s, o) = step_rejected(state);
                    (s, o, None)
                }
            }
        };
        state = next_state;
        progress = evaluate_goal(&state, &task.goal, &progress);

        steps.push(StepRecord {
            t,
            reasoning_text: reasoning_text.clone(),
            action_text: action_text.clone(),
            parsed: parsed_cmd,
            observation_text: obs.text.clone(),
            nothing_happened: obs.nothing_happened,
            progress: progress.progress,
            usage,
            distribution,
            lenient_parse: lenient,
            raw_output: raw_output.clone(),
            discarded_attempts: discarded,
        });
        ctx.push_turn(HistoryEntry {
            reasoning_text,
            action_text,
            raw_output,
            observation_text: obs.text,
        });

        if progress.success {
            terminated_by = TerminatedBy::Goal;
            break;
        }
    }

    let traj = Trajectory {
        task_id: task.task_id.clone(),
        backbone: backbone.kind,
        backend: backend.descriptor(),
        steps,
        final_progress: progress.progress,
        success: progress.success && terminated_by == TerminatedBy::Goal,
        terminated_by,
        wall_time: started.elapsed(),
    };
    debug_assert!(traj.check_invariants().is_ok());
    Ok(traj)
}

fn score_candidates_for_state(
    state: &crate::world::state::WorldState,
    backend: &mut dyn PolicyBackend,
    messages: &[Message],
) -> Option<ActionDistribution> {
    let candidates: Vec<String> = valid_actions(state).iter().map(|c| c.render()).collect();
    if candidates.is_empty() {
        return None;
    }
    // Scoring is best-effort: endpoints without logprobs degrade to
    // unscored steps, flagged later in reports.
    backend.score_candidates(messages, &candidates).ok()
}
