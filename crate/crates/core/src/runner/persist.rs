//! Trajectory persistence: JSON-Lines with a header line, one step record
//! per line, and a closing summary line. Byte-stable across reruns for
//! deterministic backends.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::backbones::kind::BackboneKind;
use crate::gateway::replay::ReplayedCompletion;
use crate::gateway::types::ActionDistribution;
use crate::taskgen::generate::TaskSpec;

use super::config::RunConfig;
use super::episode::{RunnerError, StepRecord, TerminatedBy, Trajectory};

pub const TRAJECTORY_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrajectoryHeader {
    #[serde(rename = "type")]
    pub record_type: String,
    pub schema_version: u32,
    pub task_id: String,
    pub kind: BackboneKind,
    pub backend: String,
    pub config_hash: String,
    pub config: RunConfig,
    pub task: TaskSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct StepLine {
    #[serde(rename = "type")]
    record_type: String,
    #[serde(flatten)]
    step: StepRecord,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct EndLine {
    #[serde(rename = "type")]
    record_type: String,
    steps: usize,
    final_progress: f64,
    success: bool,
    terminated_by: TerminatedBy,
}

/// Recursively sort object keys so hashing is order-independent.
pub fn canonical_json(value: &Value) -> String {
    fn sort(value: &Value) -> Value {
        match value {
            Value::Object(map) => {
                let sorted: BTreeMap<String, Value> =
                    map.iter().map(|(k, v)| (k.clone(), sort(v))).collect();
                serde_json::to_value(sorted).expect("sorted object")
            }
            Value::Array(items) => Value::Array(items.iter().map(sort).collect()),
            other => other.clone(),
        }
    }
    sort(value).to_string()
}

/// Provenance hash recorded in every artifact header.
pub fn config_hash(value: &Value) -> String {
    let mut hasher = Sha256::new();
    hasher.update(canonical_json(value).as_bytes());
    let digest = hasher.finalize();
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

pub fn trajectory_to_jsonl(
    task: &TaskSpec,
    cfg: &RunConfig,
    hash: &str,
    traj: &Trajectory,
) -> String {
    let header = TrajectoryHeader {
        record_type: "header".to_string(),
        schema_version: TRAJECTORY_SCHEMA_VERSION,
        task_id: traj.task_id.clone(),
        kind: traj.backbone,
        backend: traj.backend.clone(),
        config_hash: hash.to_string(),
        config: cfg.clone(),
        task: task.clone(),
    };
    let mut out = serde_json::to_string(&header).expect("header serializes");
    out.push('\n');
    for step in &traj.steps {
        let line = StepLine {
            record_type: "step".to_string(),
            step: step.clone(),
        };
        out.push_str(&serde_json::to_string(&line).expect("step serializes"));
        out.push('\n');
    }
    let end = EndLine {
        record_type: "end".to_string(),
        steps: traj.steps.len(),
        final_progress: traj.final_progress,
        success: traj.success,
        terminated_by: traj.terminated_by,
    };
    out.push_str(&serde_json::to_string(&end).expect("end serializes"));
    out.push('\n');
    out
}

#[derive(Debug, Clone)]
pub struct StoredTrajectory {
    pub header: TrajectoryHeader,
    pub trajectory: Trajectory,
}

pub fn parse_trajectory_jsonl(text: &str) -> Result<StoredTrajectory, RunnerError> {
    let mut lines = text.lines();
    let header: TrajectoryHeader = serde_json::from_str(
        lines
            .next()
            .ok_or_else(|| RunnerError::BadLog("empty log".into()))?,
    )
    .map_err(|e| RunnerError::BadLog(format!("bad header: {e}")))?;
    if header.record_type != "header" {
        return Err(RunnerError::BadLog("first line is not a header".into()));
    }
    let mut steps = Vec::new();
    let mut end: Option<EndLine> = None;
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let value: Value = serde_json::from_str(line)
            .map_err(|e| RunnerError::BadLog(format!("bad line: {e}")))?;
        match value["type"].as_str() {
            Some("step") => {
                let step: StepLine = serde_json::from_value(value)
                    .map_err(|e| RunnerError::BadLog(format!("bad step: {e}")))?;
                steps.push(step.step);
            }
            Some("end") => {
                end = Some(
                    serde_json::from_value(value)
                        .map_err(|e| RunnerError::BadLog(format!("bad end line: {e}")))?,
                );
            }
            other => {
                return Err(RunnerError::BadLog(format!(
                    "unknown record type {other:?}"
                )))
            }
        }
    }
    let end = end.ok_or_else(|| RunnerError::BadLog("missing end line".into()))?;
    let trajectory = Trajectory {
        task_id: header.task_id.clone(),
        backbone: header.kind,
        backend: header.backend.clone(),
        steps,
        final_progress: end.final_progress,
        success: end.success,
        terminated_by: end.terminated_by,
        wall_time: std::time::Duration::ZERO,
    };
    Ok(StoredTrajectory { header, trajectory })
}

pub fn read_trajectory_file(path: &Path) -> Result<StoredTrajectory, RunnerError> {
    parse_trajectory_jsonl(&std::fs::read_to_string(path)?)
}

/// The completion queue a replay backend must serve: per step, any
/// discarded retry attempts first, then the settled output.
pub fn replay_completions(traj: &Trajectory) -> Vec<ReplayedCompletion> {
    let mut out = Vec::new();
    for step in &traj.steps {
        for attempt in &step.discarded_attempts {
            out.push(ReplayedCompletion {
                text: attempt.clone(),
                usage: None,
            });
        }
        out.push(ReplayedCompletion {
            text: step.raw_output.clone(),
            usage: step.usage,
        });
    }
    out
}

/// Per-step scoring results, aligned with the replayed completion order.
pub fn replay_distributions(traj: &Trajectory) -> Vec<Option<ActionDistribution>> {
    traj.steps.iter().map(|s| s.distribution.clone()).collect()
}
