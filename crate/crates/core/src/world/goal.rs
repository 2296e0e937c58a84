//! Goal specifications and progress evaluation.
//!
//! A goal is an ordered list of weighted checkpoints over the hidden state.
//! Checkpoints latch: once satisfied in an episode they stay counted, which
//! makes progress monotone. Household tasks succeed only at full progress;
//! science tasks succeed at the dense threshold (0.7 by default).

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

use super::state::WorldState;

const WEIGHT_EPS: f64 = 1e-9;
/// Slack for threshold comparisons so that a progress of exactly 0.700
/// counts as success despite float accumulation.
const PROGRESS_EPS: f64 = 1e-9;

pub const DENSE_SUCCESS_THRESHOLD: f64 = 0.7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GoalFlavor {
    Binary,
    Dense,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskType {
    Put,
    Clean,
    Heat,
    Cool,
    Examine,
    PutTwo,
}

impl TaskType {
    pub const ALL: [TaskType; 6] = [
        TaskType::Put,
        TaskType::Clean,
        TaskType::Heat,
        TaskType::Cool,
        TaskType::Examine,
        TaskType::PutTwo,
    ];

    pub fn label(self) -> &'static str {
        match self {
            TaskType::Put => "put",
            TaskType::Clean => "clean",
            TaskType::Heat => "heat",
            TaskType::Cool => "cool",
            TaskType::Examine => "examine",
            TaskType::PutTwo => "puttwo",
        }
    }

    pub fn from_label(label: &str) -> Option<Self> {
        match label.to_lowercase().as_str() {
            "put" => Some(TaskType::Put),
            "clean" => Some(TaskType::Clean),
            "heat" => Some(TaskType::Heat),
            "cool" => Some(TaskType::Cool),
            "examine" => Some(TaskType::Examine),
            "puttwo" | "put_two" | "put two" => Some(TaskType::PutTwo),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    Hot,
    Cold,
    Clean,
    ExaminedUnderLamp,
}

impl Condition {
    fn holds(self, obj: &super::state::ObjectInstance) -> bool {
        match self {
            Condition::Hot => obj.hot,
            Condition::Cold => obj.cold,
            Condition::Clean => obj.clean,
            Condition::ExaminedUnderLamp => obj.examined_under_lamp,
        }
    }
}

/// A checkpoint predicate over the current hidden state. Predicates carry
/// only data so goals serialize with the task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Predicate {
    /// The agent stands at this exact receptacle.
    AgentAt { recep: String },
    /// The agent stands at any receptacle of the class.
    AgentAtClass { recep_class: String },
    /// The agent holds some object of the class.
    Holding { class: String },
    /// Some object of the class (held or placed) satisfies the condition.
    HasCondition { class: String, condition: Condition },
    /// At least `min` objects of the class sit in receptacles of
    /// `recep_class`, each satisfying all listed conditions.
    CountAtReceptacleClass {
        class: String,
        recep_class: String,
        min: u32,
        conditions: Vec<Condition>,
    },
}

impl Predicate {
    pub fn eval(&self, state: &WorldState) -> bool {
        match self {
            Predicate::AgentAt { recep } => state
                .at_receptacle()
                .map(|r| r.entity.key() == *recep)
                .unwrap_or(false),
            Predicate::AgentAtClass { recep_class } => state
                .at_receptacle()
                .map(|r| r.entity.class == *recep_class)
                .unwrap_or(false),
            Predicate::Holding { class } => state
                .inventory
                .iter()
                .any(|k| state.objects[k].entity.class == *class),
            Predicate::HasCondition { class, condition } => state
                .objects
                .values()
                .any(|o| o.entity.class == *class && condition.holds(o)),
            Predicate::CountAtReceptacleClass {
                class,
                recep_class,
                min,
                conditions,
            } => {
                let count: u32 = state
                    .receptacles
                    .values()
                    .filter(|r| r.entity.class == *recep_class)
                    .flat_map(|r| r.contents.iter())
                    .filter(|k| {
                        let obj = &state.objects[*k];
                        obj.entity.class == *class && conditions.iter().all(|c| c.holds(obj))
                    })
                    .count() as u32;
                count >= *min
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub predicate: Predicate,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoalSpec {
    pub flavor: GoalFlavor,
    pub task_type: TaskType,
    pub target_object_class: String,
    /// Goal receptacle class; absent for examine tasks.
    pub target_receptacle: Option<String>,
    pub checkpoints: Vec<Checkpoint>,
    pub success_threshold: f64,
}

impl GoalSpec {
    /// Checkpoint weights must sum to one; binary goals must demand full
    /// progress.
    pub fn check_invariants(&self) -> Result<(), String> {
        let total: f64 = self.checkpoints.iter().map(|c| c.weight).sum();
        if (total - 1.0).abs() > WEIGHT_EPS {
            return Err(format!("checkpoint weights sum to {total}, not 1.0"));
        }
        if self.checkpoints.iter().any(|c| c.weight < 0.0) {
            return Err("negative checkpoint weight".to_string());
        }
        if self.flavor == GoalFlavor::Binary && (self.success_threshold - 1.0).abs() > WEIGHT_EPS {
            return Err("binary goals require threshold 1.0".to_string());
        }
        if self.success_threshold <= 0.0 || self.success_threshold > 1.0 + WEIGHT_EPS {
            return Err("threshold outside (0, 1]".to_string());
        }
        Ok(())
    }
}

/// Progress snapshot for one episode; feed the previous report back in to
/// keep the latch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProgressReport {
    pub progress: f64,
    pub success: bool,
    pub latched_checkpoints: BTreeSet<usize>,
}

impl ProgressReport {
    pub fn zero() -> Self {
        Self {
            progress: 0.0,
            success: false,
            latched_checkpoints: BTreeSet::new(),
        }
    }
}

/// Re-evaluate all checkpoints, union with the previously latched set, and
/// sum the latched weights.
pub fn evaluate_goal(
    state: &WorldState,
    goal: &GoalSpec,
    prior: &ProgressReport,
) -> ProgressReport {
    let mut latched = prior.latched_checkpoints.clone();
    for (i, cp) in goal.checkpoints.iter().enumerate() {
        if !latched.contains(&i) && cp.predicate.eval(state) {
            latched.insert(i);
        }
    }
    // Fold from +0.0: std's float Sum starts at -0.0, which would leak a
    // negative zero into serialized reports.
    let progress: f64 = latched
        .iter()
        .map(|&i| goal.checkpoints[i].weight)
        .fold(0.0, |a, w| a + w);
    let success = progress + PROGRESS_EPS >= goal.success_threshold;
    ProgressReport {
        progress,
        success,
        latched_checkpoints: latched,
    }
}
