//! Suite runs: the cartesian product of tasks and backbones, optionally in
//! parallel, with deterministic ordering and resumable on-disk results.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::backbones::kind::Backbone;
use crate::taskgen::generate::TaskSpec;

use super::config::RunConfig;
use super::episode::{run_episode, RunnerError, TerminatedBy, Trajectory};
use super::factory::BackendFactory;
use super::persist::{
    config_hash, read_trajectory_file, trajectory_to_jsonl, TRAJECTORY_SCHEMA_VERSION,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeSummary {
    pub task_id: String,
    pub kind: crate::backbones::kind::BackboneKind,
    pub file: Option<String>,
    pub success: bool,
    pub final_progress: f64,
    pub steps: usize,
    pub terminated_by: TerminatedBy,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KindAggregate {
    pub episodes: usize,
    pub success_rate: f64,
    pub average_reward: f64,
}

/// Manifest of a suite run; serialization is bit-stable for deterministic
/// backends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultSet {
    pub schema_version: u32,
    pub config_hash: String,
    pub backend: String,
    pub episodes: Vec<EpisodeSummary>,
    pub aggregates: BTreeMap<String, KindAggregate>,
}

#[derive(Debug)]
pub struct SuiteOutput {
    pub result_set: ResultSet,
    /// Trajectories in manifest order.
    pub trajectories: Vec<Trajectory>,
}

pub fn suite_config_hash(cfg: &RunConfig, backend_descriptor: &str) -> String {
    config_hash(&json!({
        "schema_version": TRAJECTORY_SCHEMA_VERSION,
        "run": cfg,
        "backend": backend_descriptor,
    }))
}

pub fn trajectory_file_name(task_id: &str, kind: crate::backbones::kind::BackboneKind) -> String {
    format!("{task_id}__{}.jsonl", kind.label())
}

/// Run every (task, backbone) pair. Output ordering is (task_id, kind
/// label) regardless of execution order; completed episodes found in
/// `out_dir` are loaded instead of re-run.
pub fn run_suite(
    tasks: &[TaskSpec],
    kinds: &[Backbone],
    factory: &BackendFactory,
    cfg: &RunConfig,
    out_dir: Option<&Path>,
) -> Result<SuiteOutput, RunnerError> {
    if tasks.is_empty() {
        return Err(RunnerError::InvalidConfig("empty task list".to_string()));
    }
    if kinds.is_empty() {
        return Err(RunnerError::InvalidConfig(
            "empty backbone list".to_string(),
        ));
    }
    cfg.check().map_err(RunnerError::InvalidConfig)?;

    let hash = suite_config_hash(cfg, &factory.descriptor());
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)?;
    }

    let mut pairs: Vec<(&TaskSpec, &Backbone)> = Vec::new();
    for task in tasks {
        for kind in kinds {
            pairs.push((task, kind));
        }
    }
    pairs.sort_by(|a, b| {
        (a.0.task_id.as_str(), a.1.kind.label()).cmp(&(b.0.task_id.as_str(), b.1.kind.label()))
    });

    let run_one = |&(task, backbone): &(&TaskSpec, &Backbone)| -> Result<Trajectory, RunnerError> {
        if let Some(dir) = out_dir {
            let path = dir.join(trajectory_file_name(&task.task_id, backbone.kind));
            if path.exists() {
                let stored = read_trajectory_file(&path)?;
                if stored.header.config_hash == hash {
                    return Ok(stored.trajectory);
                }
            }
        }
        let mut backend = factory.build(task, backbone.kind, 0)?;
        let traj = run_episode(task, backbone, backend.as_mut(), cfg, &[])?;
        if let Some(dir) = out_dir {
            let path = dir.join(trajectory_file_name(&task.task_id, backbone.kind));
            std::fs::write(&path, trajectory_to_jsonl(task, cfg, &hash, &traj))?;
        }
        Ok(traj)
    };

    let workers = cfg.parallel_episodes.max(1) as usize;
    let trajectories: Vec<Trajectory> = if workers <= 1 || pairs.len() <= 1 {
        pairs.iter().map(run_one).collect::<Result<_, _>>()?
    } else {
        let slots: Mutex<Vec<Option<Result<Trajectory, RunnerError>>>> =
            Mutex::new((0..pairs.len()).map(|_| None).collect());
        let next = AtomicUsize::new(0);
        std::thread::scope(|scope| {
            for _ in 0..workers.min(pairs.len()) {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    if i >= pairs.len() {
                        break;
                    }
                    let result = run_one(&pairs[i]);
                    if let Some(slot) = slots.lock().expect("slots lock").get_mut(i) {
                        *slot = Some(result);
                    }
                });
            }
        });
        slots
            .into_inner()
            .expect("slots")
            .into_iter()
            .map(|slot| slot.expect("every pair executed"))
            .collect::<Result<_, _>>()?
    };

    let episodes: Vec<EpisodeSummary> = pairs
        .iter()
        .zip(&trajectories)
        .map(|(&(task, backbone), traj)| EpisodeSummary {
            task_id: task.task_id.clone(),
            kind: backbone.kind,
            file: out_dir.map(|_| trajectory_file_name(&task.task_id, backbone.kind)),
            success: traj.success,
            final_progress: traj.final_progress,
            steps: traj.steps.len(),
            terminated_by: traj.terminated_by,
        })
        .collect();

    let mut aggregates: BTreeMap<String, KindAggregate> = BTreeMap::new();
    for kind in kinds {
        let label = kind.kind.label().to_string();
        let of_kind: Vec<&EpisodeSummary> =
            episodes.iter().filter(|e| e.kind == kind.kind).collect();
        let n = of_kind.len();
        let successes = of_kind.iter().filter(|e| e.success).count();
        let reward: f64 = of_kind.iter().map(|e| e.final_progress).sum();
        aggregates.insert(
            label,
            KindAggregate {
                episodes: n,
                success_rate: if n == 0 {
                    0.0
                } else {
                    successes as f64 / n as f64
                },
                average_reward: if n == 0 { 0.0 } else { reward / n as f64 },
            },
        );
    }

    let result_set = ResultSet {
        schema_version: TRAJECTORY_SCHEMA_VERSION,
        config_hash: hash,
        backend: factory.descriptor(),
        episodes,
        aggregates,
    };
    if let Some(dir) = out_dir {
        write_manifest(dir, &result_set)?;
    }
    Ok(SuiteOutput {
        result_set,
        trajectories,
    })
}

pub const MANIFEST_FILE: &str = "manifest.json";

pub fn write_manifest(dir: &Path, result_set: &ResultSet) -> Result<(), RunnerError> {
    let mut text = serde_json::to_string_pretty(result_set).expect("manifest serializes");
    text.push('\n');
    std::fs::write(dir.join(MANIFEST_FILE), text)?;
    Ok(())
}

pub fn read_manifest(dir: &Path) -> Result<ResultSet, RunnerError> {
    let text = std::fs::read_to_string(dir.join(MANIFEST_FILE))?;
    serde_json::from_str(&text).map_err(|e| RunnerError::BadLog(format!("bad manifest: {e}")))
}
