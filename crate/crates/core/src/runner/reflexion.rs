//! The multi-trial protocol: run, reflect on failure, carry the reflection
//! into the next attempt's system prompt, repeat.

use serde::{Deserialize, Serialize};

use crate::backbones::kind::Backbone;
use crate::gateway::backend::BackendKind;
use crate::gateway::scripted::SCRIPTED_REFLECTION;
use crate::gateway::types::Message;
use crate::taskgen::generate::TaskSpec;

use super::config::RunConfig;
use super::episode::{initial_observation, run_episode, RunnerError, TerminatedBy, Trajectory};
use super::factory::BackendFactory;

/// One reflection per failed trial, at most.
pub const REFLEXION_MEMORY_CAP: usize = 3;

pub const REFLEXION_INSTRUCTION: &str = "You will be shown the log of a failed attempt at a \
task. Diagnose why the attempt failed and write a short plan for the next attempt. Answer in \
two or three sentences.";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReflexionMemory {
    pub task_id: String,
    pub reflections: Vec<String>,
    pub trial_index: u32,
}

impl ReflexionMemory {
    pub fn new(task_id: impl Into<String>) -> Self {
        Self {
            task_id: task_id.into(),
            reflections: Vec::new(),
            trial_index: 0,
        }
    }

    /// Capped push; the memory never grows past one entry per trial.
    pub fn record(&mut self, reflection: String) {
        if self.reflections.len() < REFLEXION_MEMORY_CAP {
            self.reflections.push(reflection);
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrialResult {
    pub trial_index: u32,
    /// True when the task was already solved and the trial was not run.
    pub skipped: bool,
    pub trajectory: Option<Trajectory>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReflexionOutcome {
    pub task_id: String,
    pub trials: Vec<TrialResult>,
    pub memory: ReflexionMemory,
    /// Set when a backend failure aborted the remaining trials.
    pub aborted: bool,
}

impl ReflexionOutcome {
    pub fn solved_at(&self) -> Option<u32> {
        self.trials
            .iter()
            .find(|t| t.trajectory.as_ref().map(|tr| tr.success).unwrap_or(false))
            .map(|t| t.trial_index)
    }
}

/// Render a failed trajectory as a plain transcript for the reflection call.
pub fn failure_transcript(task: &TaskSpec, traj: &Trajectory) -> String {
    let mut out = initial_observation(task);
    for step in &traj.steps {
        out.push_str("\n\n");
        out.push_str(&step.raw_output);
        out.push_str("\nObservation: ");
        out.push_str(&step.observation_text);
    }
    out.push_str("\n\nThe attempt ended in failure.");
    out
}

/// One completion call that turns a failed trajectory into advice for the
/// next attempt. Scripted and replay backends return a fixed canned string.
pub fn reflect_on_failure(
    task: &TaskSpec,
    traj: &Trajectory,
    factory: &BackendFactory,
) -> Result<String, RunnerError> {
    if traj.success {
        return Err(RunnerError::Precondition(
            "reflect_on_failure called on a successful trajectory".to_string(),
        ));
    }
    match factory.kind() {
        BackendKind::Scripted { .. } | BackendKind::Replay { .. } => {
            Ok(SCRIPTED_REFLECTION.to_string())
        }
        BackendKind::Live { .. } => {
            let mut backend = factory.build(task, traj.backbone, 0)?;
            let messages = vec![
                Message::system(REFLEXION_INSTRUCTION),
                Message::user(failure_transcript(task, traj)),
            ];
            let completion = backend.complete(&messages)?;
            Ok(completion.text.trim().to_string())
        }
    }
}

/// Run up to `n_trials` attempts. Trial 0 starts with empty memory; each
/// failed trial appends one reflection; solved tasks are not re-run.
pub fn run_reflexion(
    task: &TaskSpec,
    backbone: &Backbone,
    factory: &BackendFactory,
    cfg: &RunConfig,
    n_trials: u32,
) -> Result<ReflexionOutcome, RunnerError> {
    if n_trials < 1 {
        return Err(RunnerError::InvalidConfig(
            "n_trials must be at least 1".to_string(),
        ));
    }
    let mut memory = ReflexionMemory::new(&task.task_id);
    let mut trials = Vec::new();
    let mut solved = false;
    let mut aborted = false;

    for trial in 0..n_trials {
        memory.trial_index = trial;
        if solved || aborted {
            trials.push(TrialResult {
                trial_index: trial,
                skipped: true,
                trajectory: None,
            });
            continue;
        }
        let mut backend = factory.build(task, backbone.kind, trial)?;
        let traj = run_episode(task, backbone, backend.as_mut(), cfg, &memory.reflections)?;
        if traj.terminated_by == TerminatedBy::BackendError {
            aborted = true;
            trials.push(TrialResult {
                trial_index: trial,
                skipped: false,
                trajectory: Some(traj),
            });
            continue;
        }
        if traj.success {
            solved = true;
        } else {
            let reflection = reflect_on_failure(task, &traj, factory)?;
            memory.record(reflection);
        }
        trials.push(TrialResult {
            trial_index: trial,
            skipped: false,
            trajectory: Some(traj),
        });
    }

    Ok(ReflexionOutcome {
        task_id: task.task_id.clone(),
        trials,
        memory,
        aborted,
    })
}
