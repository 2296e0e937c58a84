//! Seeded task generation. `generate` is a pure function of
//! (seed, task type, flavor): identical inputs yield byte-identical specs.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::world::entity::EntityRef;
use crate::world::goal::{
    Checkpoint, Condition, GoalFlavor, GoalSpec, Predicate, TaskType, DENSE_SUCCESS_THRESHOLD,
};
use crate::world::state::{EnvFlavor, WorldState};
use crate::world::step::{CLEANING_DEVICE, COOLING_DEVICE, HEATING_DEVICE};

use super::templates::{self, RoomTemplate};

/// Identifier of the frozen seeding scheme, recorded in every task for
/// cross-implementation reproducibility.
pub const RNG_ALGORITHM: &str = "chacha12-mod-v1";

pub const TASK_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GenerateError {
    #[error("task type {task_type:?} is not supported for flavor {flavor:?}")]
    UnsupportedTaskType { task_type: String, flavor: String },
}

/// A fully materialized task: scene, goal and instruction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub schema_version: u32,
    pub task_id: String,
    pub seed: u64,
    pub flavor: GoalFlavor,
    pub task_type: TaskType,
    pub rng_algorithm: String,
    /// Full task line, e.g. "Your task is to: put some spraybottle on toilet."
    pub instruction_text: String,
    pub initial_state: WorldState,
    pub goal: GoalSpec,
}

impl TaskSpec {
    pub fn env_flavor(&self) -> EnvFlavor {
        match self.flavor {
            GoalFlavor::Binary => EnvFlavor::Household,
            GoalFlavor::Dense => EnvFlavor::Science,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("task serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}

/// Deterministic 64-bit mix of the generation inputs.
fn stream_seed(seed: u64, task_type: TaskType, flavor: EnvFlavor) -> u64 {
    let t = task_type as u64 + 1;
    let f = flavor as u64 + 1;
    seed ^ t.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ f.wrapping_mul(0xd2b7_4407_b1ce_6e93)
}

fn pick<'a, T>(rng: &mut ChaCha12Rng, items: &'a [T]) -> &'a T {
    &items[(rng.next_u64() % items.len() as u64) as usize]
}

/// Human phrasing per task type, class names without indices.
pub fn instruction_phrase(task_type: TaskType, obj: &str, recep: Option<&str>) -> String {
    match task_type {
        TaskType::Put => format!("put some {obj} on {}", recep.unwrap_or("")),
        TaskType::Clean => format!("put a clean {obj} in {}", recep.unwrap_or("")),
        TaskType::Heat => format!("put a hot {obj} in {}", recep.unwrap_or("")),
        TaskType::Cool => format!("cool some {obj} and put it in {}", recep.unwrap_or("")),
        TaskType::Examine => format!("examine the {obj} with the desklamp"),
        TaskType::PutTwo => format!("find two {obj} and put them in {}", recep.unwrap_or("")),
    }
}

fn condition_for(task_type: TaskType) -> Option<Condition> {
    match task_type {
        TaskType::Clean => Some(Condition::Clean),
        TaskType::Heat => Some(Condition::Hot),
        TaskType::Cool => Some(Condition::Cold),
        TaskType::Examine => Some(Condition::ExaminedUnderLamp),
        TaskType::Put | TaskType::PutTwo => None,
    }
}

pub fn device_class_for(task_type: TaskType) -> Option<&'static str> {
    match task_type {
        TaskType::Clean => Some(CLEANING_DEVICE),
        TaskType::Heat => Some(HEATING_DEVICE),
        TaskType::Cool => Some(COOLING_DEVICE),
        _ => None,
    }
}

fn build_state(template: &RoomTemplate, env: EnvFlavor, rng: &mut ChaCha12Rng) -> WorldState {
    let mut state = WorldState::new(env, template.rooms.iter().map(|r| r.to_string()).collect());
    // Per-class counters so indices continue across rooms.
    let mut next_index: std::collections::BTreeMap<&str, u32> = Default::default();
    for group in template.receps {
        let start = *next_index.get(group.class).unwrap_or(&1);
        for i in 0..group.count {
            let is_open = group.openable && (rng.next_u64() & 1 == 1);
            state.add_receptacle(
                EntityRef::new(group.class, start + i),
                group.room,
                group.openable,
                is_open,
            );
        }
        next_index.insert(group.class, start + group.count);
    }
    for (class, recep) in template.fixtures {
        state.add_object(EntityRef::new(*class, 1), recep);
    }
    state
}

fn goal_checkpoints(
    flavor: GoalFlavor,
    task_type: TaskType,
    target: &str,
    goal_class: Option<&str>,
    src_recep: &str,
    lamp_recep: Option<&str>,
) -> Vec<Checkpoint> {
    let cond = condition_for(task_type);
    let delivered = |min: u32| Predicate::CountAtReceptacleClass {
        class: target.to_string(),
        recep_class: goal_class.unwrap_or_default().to_string(),
        min,
        conditions: cond
            .into_iter()
            .filter(|c| *c != Condition::ExaminedUnderLamp)
            .collect(),
    };
    match flavor {
        GoalFlavor::Binary => match task_type {
            TaskType::Examine => vec![Checkpoint {
                predicate: Predicate::HasCondition {
                    class: target.to_string(),
                    condition: Condition::ExaminedUnderLamp,
                },
                weight: 1.0,
            }],
            TaskType::PutTwo => vec![
                Checkpoint {
                    predicate: delivered(1),
                    weight: 0.5,
                },
                Checkpoint {
                    predicate: delivered(2),
                    weight: 0.5,
                },
            ],
            _ => vec![Checkpoint {
                predicate: delivered(1),
                weight: 1.0,
            }],
        },
        GoalFlavor::Dense => {
            let found = Checkpoint {
                predicate: Predicate::AgentAt {
                    recep: src_recep.to_string(),
                },
                weight: 0.15,
            };
            let taken = Checkpoint {
                predicate: Predicate::Holding {
                    class: target.to_string(),
                },
                weight: 0.15,
            };
            match task_type {
                TaskType::Put => vec![
                    Checkpoint {
                        predicate: found.predicate.clone(),
                        weight: 0.2,
                    },
                    Checkpoint {
                        predicate: taken.predicate.clone(),
                        weight: 0.2,
                    },
                    Checkpoint {
                        predicate: Predicate::AgentAtClass {
                            recep_class: goal_class.unwrap_or_default().to_string(),
                        },
                        weight: 0.2,
                    },
                    Checkpoint {
                        predicate: delivered(1),
                        weight: 0.4,
                    },
                ],
                TaskType::PutTwo => vec![
                    found,
                    taken,
                    Checkpoint {
                        predicate: delivered(1),
                        weight: 0.3,
                    },
                    Checkpoint {
                        predicate: delivered(2),
                        weight: 0.4,
                    },
                ],
                TaskType::Examine => vec![
                    Checkpoint {
                        predicate: found.predicate.clone(),
                        weight: 0.2,
                    },
                    Checkpoint {
                        predicate: taken.predicate.clone(),
                        weight: 0.2,
                    },
                    Checkpoint {
                        predicate: Predicate::AgentAt {
                            recep: lamp_recep.unwrap_or_default().to_string(),
                        },
                        weight: 0.2,
                    },
                    Checkpoint {
                        predicate: Predicate::HasCondition {
                            class: target.to_string(),
                            condition: Condition::ExaminedUnderLamp,
                        },
                        weight: 0.4,
                    },
                ],
                // Clean / heat / cool: found, taken, conditioned, at goal, delivered.
                _ => vec![
                    found,
                    taken,
                    Checkpoint {
                        predicate: Predicate::HasCondition {
                            class: target.to_string(),
                            condition: cond.expect("condition task"),
                        },
                        weight: 0.15,
                    },
                    Checkpoint {
                        predicate: Predicate::AgentAtClass {
                            recep_class: goal_class.unwrap_or_default().to_string(),
                        },
                        weight: 0.15,
                    },
                    Checkpoint {
                        predicate: delivered(1),
                        weight: 0.4,
                    },
                ],
            }
        }
    }
}

/// Generate a solvable task from a seed.
pub fn generate(seed: u64, task_type: TaskType, env: EnvFlavor) -> Result<TaskSpec, GenerateError> {
    let flavor = match env {
        EnvFlavor::Household => GoalFlavor::Binary,
        EnvFlavor::Science => GoalFlavor::Dense,
    };
    let mut rng = ChaCha12Rng::seed_from_u64(stream_seed(seed, task_type, env));

    let target_class = pick(&mut rng, templates::target_pool(env, task_type)).to_string();
    let template = templates::template_for(env, task_type, &target_class);
    let mut state = build_state(template, env, &mut rng);

    let goal_class = if task_type == TaskType::Examine {
        None
    } else {
        Some(pick(&mut rng, templates::goal_pool(task_type, template)).to_string())
    };

    // Eligible source receptacles: anything except the goal class for the
    // plain placement tasks, which would otherwise start pre-solved.
    let recep_keys: Vec<String> = state
        .receptacles_ordered()
        .iter()
        .filter(|r| match (&goal_class, task_type) {
            (Some(gc), TaskType::Put | TaskType::PutTwo) => r.entity.class != *gc,
            _ => true,
        })
        .map(|r| r.entity.key())
        .collect();

    let needed = if task_type == TaskType::PutTwo { 2 } else { 1 };
    let mut src_receps = Vec::new();
    for i in 0..needed {
        let src = pick(&mut rng, &recep_keys).clone();
        state.add_object(EntityRef::new(target_class.clone(), i as u32 + 1), &src);
        src_receps.push(src);
    }

    // Distractors never share the target class so goal counting stays exact.
    let all_recep_keys: Vec<String> = state
        .receptacles_ordered()
        .iter()
        .map(|r| r.entity.key())
        .collect();
    let distractor_classes: Vec<&str> = template
        .distractor_classes
        .iter()
        .copied()
        .filter(|c| *c != target_class)
        .collect();
    let mut class_counters: std::collections::BTreeMap<String, u32> = Default::default();
    let n_distractors = 3 + (rng.next_u64() % 4) as usize;
    for _ in 0..n_distractors {
        let class = pick(&mut rng, &distractor_classes).to_string();
        let recep = pick(&mut rng, &all_recep_keys).clone();
        let idx = class_counters.entry(class.clone()).or_insert(0);
        *idx += 1;
        state.add_object(EntityRef::new(class, *idx), &recep);
    }

    let lamp_recep = template
        .fixtures
        .iter()
        .find(|(class, _)| *class == "desklamp")
        .map(|(_, recep)| recep.to_string());

    let goal = GoalSpec {
        flavor,
        task_type,
        target_object_class: target_class.clone(),
        target_receptacle: goal_class.clone(),
        checkpoints: goal_checkpoints(
            flavor,
            task_type,
            &target_class,
            goal_class.as_deref(),
            &src_receps[0],
            lamp_recep.as_deref(),
        ),
        success_threshold: match flavor {
            GoalFlavor::Binary => 1.0,
            GoalFlavor::Dense => DENSE_SUCCESS_THRESHOLD,
        },
    };

    debug_assert!(state.check_invariants().is_ok());
    debug_assert!(goal.check_invariants().is_ok());

    let phrase = instruction_phrase(task_type, &target_class, goal_class.as_deref());
    Ok(TaskSpec {
        schema_version: TASK_SCHEMA_VERSION,
        task_id: format!("{}-{}-{:05}", task_type.label(), env.goal_label(), seed),
        seed,
        flavor,
        task_type,
        rng_algorithm: RNG_ALGORITHM.to_string(),
        instruction_text: format!("Your task is to: {phrase}."),
        initial_state: state,
        goal,
    })
}
