//! Full-visibility deterministic solver. The oracle backs the scripted
//! policy backend and produces the replayable plans the test suite leans on.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::world::entity::EntityRef;
use crate::world::goal::{evaluate_goal, ProgressReport, TaskType};
use crate::world::grammar::ActionCommand;
use crate::world::state::{AgentLocation, EnvFlavor, WorldState};
use crate::world::step::{step, LAMP_CLASS};

use super::generate::{device_class_for, TaskSpec};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OraclePlan {
    pub actions: Vec<ActionCommand>,
    pub expected_steps: usize,
}

impl OraclePlan {
    pub fn action_texts(&self) -> Vec<String> {
        self.actions.iter().map(|a| a.render()).collect()
    }
}

#[derive(Debug, Error)]
pub enum OracleError {
    /// Must never fire on generated tasks; firing signals a generator bug.
    #[error("task {task_id} is unsolvable: {reason}")]
    Unsolvable { task_id: String, reason: String },
}

struct Planner {
    state: WorldState,
    plan: Vec<ActionCommand>,
    task_id: String,
}

impl Planner {
    fn emit(&mut self, cmd: ActionCommand) -> Result<(), OracleError> {
        let (next, obs) = step(self.state.clone(), &cmd);
        if obs.nothing_happened {
            return Err(OracleError::Unsolvable {
                task_id: self.task_id.clone(),
                reason: format!("planned action rejected: {}", cmd.render()),
            });
        }
        self.state = next;
        self.plan.push(cmd);
        Ok(())
    }

    fn goto(&mut self, recep_key: &str) -> Result<(), OracleError> {
        let recep = self
            .state
            .receptacles
            .get(recep_key)
            .cloned()
            .ok_or_else(|| OracleError::Unsolvable {
                task_id: self.task_id.clone(),
                reason: format!("no receptacle {recep_key}"),
            })?;
        if self.state.flavor == EnvFlavor::Science && recep.room != self.state.current_room() {
            self.emit(ActionCommand::Teleport {
                room: recep.room.clone(),
            })?;
        }
        let already_there = matches!(
            &self.state.agent_location,
            AgentLocation::AtReceptacle { recep: here } if here == recep_key
        );
        if !already_there {
            self.emit(ActionCommand::GoTo {
                recep: recep.entity.clone(),
            })?;
        }
        Ok(())
    }

    fn ensure_open(&mut self, recep_key: &str) -> Result<(), OracleError> {
        let recep = &self.state.receptacles[recep_key];
        if recep.openable && !recep.is_open {
            let entity = recep.entity.clone();
            self.emit(ActionCommand::Open { recep: entity })?;
        }
        Ok(())
    }

    /// First receptacle of the class, scanning in entity order.
    fn first_of_class(&self, class: &str) -> Option<String> {
        self.state
            .receptacles_ordered()
            .iter()
            .find(|r| r.entity.class == class)
            .map(|r| r.entity.key())
    }

    /// Target instances ordered by the receptacle holding them, then by the
    /// object's own index; receptacle order is the lexicographic search
    /// order, so ties break by receptacle index ascending.
    fn locate_targets(&self, class: &str) -> Vec<(String, EntityRef)> {
        let mut found = Vec::new();
        for recep in self.state.receptacles_ordered() {
            let mut here: Vec<EntityRef> = recep
                .contents
                .iter()
                .map(|k| self.state.objects[k].entity.clone())
                .filter(|e| e.class == class)
                .collect();
            here.sort();
            for obj in here {
                found.push((recep.entity.key(), obj));
            }
        }
        found
    }

    fn fetch(&mut self, src: &str, obj: &EntityRef) -> Result<(), OracleError> {
        self.goto(src)?;
        self.ensure_open(src)?;
        self.emit(ActionCommand::Take {
            obj: obj.clone(),
            recep: self.state.receptacles[src].entity.clone(),
        })
    }

    fn deliver(&mut self, goal_key: &str, obj: &EntityRef) -> Result<(), OracleError> {
        self.goto(goal_key)?;
        self.ensure_open(goal_key)?;
        self.emit(ActionCommand::Put {
            obj: obj.clone(),
            recep: self.state.receptacles[goal_key].entity.clone(),
        })
    }

    fn unsolvable(&self, reason: &str) -> OracleError {
        OracleError::Unsolvable {
            task_id: self.task_id.clone(),
            reason: reason.to_string(),
        }
    }
}

/// Plan a solution with full state visibility. Deterministic: searches and
/// tie-breaks follow entity order throughout.
pub fn oracle_solve(task: &TaskSpec) -> Result<OraclePlan, OracleError> {
    let mut p = Planner {
        state: task.initial_state.clone(),
        plan: Vec::new(),
        task_id: task.task_id.clone(),
    };
    let target_class = &task.goal.target_object_class;
    let needed = if task.task_type == TaskType::PutTwo {
        2
    } else {
        1
    };

    let targets = p.locate_targets(target_class);
    if targets.len() < needed {
        return Err(p.unsolvable(&format!(
            "need {needed} instance(s) of {target_class}, found {}",
            targets.len()
        )));
    }
    let chosen: Vec<(String, EntityRef)> = targets.into_iter().take(needed).collect();

    let goal_key = match &task.goal.target_receptacle {
        Some(class) => Some(
            p.first_of_class(class)
                .ok_or_else(|| p.unsolvable(&format!("no receptacle of class {class}")))?,
        ),
        None => None,
    };

    if needed > 1 && p.state.flavor.inventory_cap() >= needed {
        // Batch: collect every instance, then deliver them together.
        for (src, obj) in &chosen {
            p.fetch(src, obj)?;
        }
        let goal_key = goal_key.as_ref().expect("placement tasks have a goal");
        p.goto(goal_key)?;
        p.ensure_open(goal_key)?;
        for (_, obj) in &chosen {
            p.emit(ActionCommand::Put {
                obj: obj.clone(),
                recep: p.state.receptacles[goal_key.as_str()].entity.clone(),
            })?;
        }
    } else {
        for (src, obj) in &chosen {
            p.fetch(src, obj)?;
            if let Some(device_class) = device_class_for(task.task_type) {
                if !condition_met(&p.state, &obj.key(), task.task_type) {
                    let device = p
                        .first_of_class(device_class)
                        .ok_or_else(|| p.unsolvable(&format!("no {device_class} present")))?;
                    p.goto(&device)?;
                    let recep = p.state.receptacles[&device].entity.clone();
                    let cmd = match task.task_type {
                        TaskType::Clean => ActionCommand::Clean {
                            obj: obj.clone(),
                            recep,
                        },
                        TaskType::Heat => ActionCommand::Heat {
                            obj: obj.clone(),
                            recep,
                        },
                        TaskType::Cool => ActionCommand::Cool {
                            obj: obj.clone(),
                            recep,
                        },
                        _ => unreachable!("device implies a condition task"),
                    };
                    p.emit(cmd)?;
                }
            }
            if task.task_type == TaskType::Examine {
                let lamp = p
                    .locate_targets(LAMP_CLASS)
                    .first()
                    .map(|(recep, obj)| (recep.clone(), obj.clone()))
                    .ok_or_else(|| p.unsolvable("no desklamp present"))?;
                p.goto(&lamp.0)?;
                p.emit(ActionCommand::Use { obj: lamp.1 })?;
            } else {
                let goal_key = goal_key.as_ref().expect("placement tasks have a goal");
                p.deliver(goal_key, obj)?;
            }
        }
    }

    // Sanity: the simulated plan must actually satisfy the goal.
    let report = replay_progress(task, &p.plan).map_err(|reason| p.unsolvable(&reason))?;
    if !report.success {
        return Err(p.unsolvable(&format!("plan ends at progress {}", report.progress)));
    }

    let expected_steps = p.plan.len();
    Ok(OraclePlan {
        actions: p.plan,
        expected_steps,
    })
}

fn condition_met(state: &WorldState, obj_key: &str, task_type: TaskType) -> bool {
    let obj = &state.objects[obj_key];
    match task_type {
        TaskType::Clean => obj.clean,
        TaskType::Heat => obj.hot,
        TaskType::Cool => obj.cold,
        _ => false,
    }
}

/// Replay a plan from the task's initial state; fails on any in-band
/// rejection. Returns the final progress report.
pub fn replay_progress(task: &TaskSpec, plan: &[ActionCommand]) -> Result<ProgressReport, String> {
    let mut state = task.initial_state.clone();
    let mut report = ProgressReport::zero();
    for cmd in plan {
        let (next, obs) = step(state, cmd);
        if obs.nothing_happened {
            return Err(format!("replay rejected action {}", cmd.render()));
        }
        state = next;
        report = evaluate_goal(&state, &task.goal, &report);
    }
    Ok(report)
}

/// Upper bound on acceptable plan length: setup and finish work plus two
/// actions per visited receptacle.
pub fn plan_length_bound(plan: &OraclePlan) -> usize {
    let mut visited: std::collections::BTreeSet<String> = Default::default();
    for cmd in &plan.actions {
        if let ActionCommand::GoTo { recep } = cmd {
            visited.insert(recep.key());
        }
    }
    2 + 2 * visited.len() + 4
}
