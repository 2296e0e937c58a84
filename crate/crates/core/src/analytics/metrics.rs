//! Per-kind diagnostics over recorded trajectories: entropy, hallucinated
//! actions, token spend, step counts, success / reward aggregates and
//! discounted returns.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backbones::kind::BackboneKind;
use crate::gateway::types::ActionDistribution;
use crate::runner::episode::Trajectory;
use crate::world::goal::GoalFlavor;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("distribution is not normalized (sum {0})")]
    NotNormalized(f64),
    #[error("no trajectories for this kind")]
    EmptyResultSet,
    #[error("no recorded distributions for this kind")]
    NoDistributions,
}

/// Shannon entropy in nats, with 0·ln 0 taken as 0.
pub fn entropy(dist: &ActionDistribution) -> Result<f64, MetricsError> {
    let total: f64 = dist.entries.iter().map(|e| e.probability).sum();
    if (total - 1.0).abs() > 1e-6 {
        return Err(MetricsError::NotNormalized(total));
    }
    Ok(dist
        .entries
        .iter()
        .map(|e| {
            let p = e.probability;
            if p > 0.0 {
                -p * p.ln()
            } else {
                0.0
            }
        })
        .sum())
}

fn of_kind(trajectories: &[Trajectory], kind: BackboneKind) -> Vec<&Trajectory> {
    trajectories.iter().filter(|t| t.backbone == kind).collect()
}

/// Mean entropy over every scored action turn of the kind.
pub fn mean_entropy(trajectories: &[Trajectory], kind: BackboneKind) -> Result<f64, MetricsError> {
    let trajs = of_kind(trajectories, kind);
    if trajs.is_empty() {
        return Err(MetricsError::EmptyResultSet);
    }
    let mut values = Vec::new();
    for traj in trajs {
        for step in &traj.steps {
            if let Some(dist) = &step.distribution {
                values.push(entropy(dist)?);
            }
        }
    }
    if values.is_empty() {
        return Err(MetricsError::NoDistributions);
    }
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

/// Share of executed actions the environment rejected in-band.
pub fn hallucination_rate(
    trajectories: &[Trajectory],
    kind: BackboneKind,
) -> Result<f64, MetricsError> {
    let trajs = of_kind(trajectories, kind);
    let total: usize = trajs.iter().map(|t| t.steps.len()).sum();
    if total == 0 {
        return Err(MetricsError::EmptyResultSet);
    }
    let rejected: usize = trajs
        .iter()
        .map(|t| t.steps.iter().filter(|s| s.nothing_happened).count())
        .sum();
    Ok(rejected as f64 / total as f64)
}

/// Completion tokens per step. Falls back to whitespace token counts when
/// the backend reported no usage; the flag marks the metric approximate.
pub fn tokens_per_step(
    trajectories: &[Trajectory],
    kind: BackboneKind,
) -> Result<(f64, bool), MetricsError> {
    let trajs = of_kind(trajectories, kind);
    let total_steps: usize = trajs.iter().map(|t| t.steps.len()).sum();
    if total_steps == 0 {
        return Err(MetricsError::EmptyResultSet);
    }
    let mut tokens = 0u64;
    let mut approximate = false;
    for traj in trajs {
        for step in &traj.steps {
            match step.usage {
                Some(u) => tokens += u.completion_tokens,
                None => {
                    approximate = true;
                    tokens += step.raw_output.split_whitespace().count() as u64;
                }
            }
        }
    }
    Ok((tokens as f64 / total_steps as f64, approximate))
}

pub fn steps_per_episode(
    trajectories: &[Trajectory],
    kind: BackboneKind,
) -> Result<f64, MetricsError> {
    let trajs = of_kind(trajectories, kind);
    if trajs.is_empty() {
        return Err(MetricsError::EmptyResultSet);
    }
    Ok(trajs.iter().map(|t| t.steps.len() as f64).sum::<f64>() / trajs.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub success_rate: f64,
    pub average_reward: f64,
}

/// Success rate and mean final progress. Success honors the flavor's
/// threshold rule: at least 0.7 for dense episodes, exactly 1.0 for binary.
pub fn aggregate(
    trajectories: &[Trajectory],
    kind: BackboneKind,
    flavor: GoalFlavor,
) -> Result<Aggregate, MetricsError> {
    let trajs = of_kind(trajectories, kind);
    if trajs.is_empty() {
        return Err(MetricsError::EmptyResultSet);
    }
    let threshold = match flavor {
        GoalFlavor::Binary => 1.0,
        GoalFlavor::Dense => crate::world::goal::DENSE_SUCCESS_THRESHOLD,
    };
    let successes = trajs
        .iter()
        .filter(|t| t.final_progress + 1e-9 >= threshold)
        .count();
    let reward: f64 = trajs.iter().map(|t| t.final_progress).sum();
    Ok(Aggregate {
        success_rate: successes as f64 / trajs.len() as f64,
        average_reward: reward / trajs.len() as f64,
    })
}

/// Discounted return over per-step progress deltas, evaluated from the
/// episode start. With gamma = 1 the deltas telescope to final progress.
pub fn discounted_return(traj: &Trajectory, gamma: f64) -> f64 {
    let mut previous = 0.0;
    let mut total = 0.0;
    let mut discount = 1.0;
    for step in &traj.steps {
        let reward = step.progress - previous;
        previous = step.progress;
        total += discount * reward;
        discount *= gamma;
    }
    total
}

/// Returns per-step rewards reconstructed from latched progress.
pub fn step_rewards(traj: &Trajectory) -> Vec<f64> {
    let mut previous = 0.0;
    traj.steps
        .iter()
        .map(|s| {
            let r = s.progress - previous;
            previous = s.progress;
            r
        })
        .collect()
}
