//! Episode execution: the per-step reasoning–acting loop, suite runs over
//! task × backbone grids, the Reflexion trial protocol, and trajectory
//! persistence.

pub mod config;
pub mod episode;
pub mod factory;
pub mod persist;
pub mod reflexion;
pub mod suite;

pub use config::RunConfig;
pub use episode::{
    initial_observation, run_episode, RunnerError, StepRecord, TerminatedBy, Trajectory,
};
pub use factory::BackendFactory;
pub use persist::{
    canonical_json, config_hash, parse_trajectory_jsonl, read_trajectory_file, replay_completions,
    replay_distributions, trajectory_to_jsonl, StoredTrajectory, TrajectoryHeader,
    TRAJECTORY_SCHEMA_VERSION,
};
pub use reflexion::{
    failure_transcript, reflect_on_failure, run_reflexion, ReflexionMemory, ReflexionOutcome,
    TrialResult, REFLEXION_INSTRUCTION, REFLEXION_MEMORY_CAP,
};
pub use suite::{
    read_manifest, run_suite, suite_config_hash, trajectory_file_name, write_manifest,
    EpisodeSummary, KindAggregate, ResultSet, SuiteOutput, MANIFEST_FILE,
};

/// Re-execute a stored trajectory with a replay backend built from its own
/// log and serialize the result; byte-identity with the original bytes is
/// the replay-fidelity check.
pub fn replay_stored(stored: &StoredTrajectory) -> Result<String, RunnerError> {
    use crate::backbones::kind::Backbone;
    use crate::gateway::replay::ReplayBackend;

    let mut backend = ReplayBackend::new(
        replay_completions(&stored.trajectory),
        replay_distributions(&stored.trajectory),
        stored.trajectory.backend.clone(),
    );
    let backbone = Backbone::new(stored.header.kind);
    let mut traj = run_episode(
        &stored.header.task,
        &backbone,
        &mut backend,
        &stored.header.config,
        &[],
    )?;
    // The descriptor names the replay source; restore the original so the
    // serialized bytes compare directly.
    traj.backend = stored.trajectory.backend.clone();
    Ok(trajectory_to_jsonl(
        &stored.header.task,
        &stored.header.config,
        &stored.header.config_hash,
        &traj,
    ))
}
