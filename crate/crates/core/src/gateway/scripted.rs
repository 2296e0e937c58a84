//! The scripted policy backend: replays oracle plans through any backbone's
//! output format. The format wrapper only changes surface text; the embedded
//! action is always the plan's next step.

use crate::backbones::catalog::effective_parse_kind;
use crate::backbones::kind::BackboneKind;
use crate::backbones::parse::render_output;
use crate::taskgen::generate::TaskSpec;
use crate::taskgen::oracle::{oracle_solve, OracleError};
use crate::world::grammar::ActionCommand;

use super::backend::{PolicyBackend, ScriptedPolicy};
use super::types::{
    ActionDistribution, BackendError, CompletionResult, Message, Role, ScoringMethod,
};

/// The action emitted by the fail policy; parses fine, never executes.
pub const FAIL_ACTION: &str = "go to void 1";

/// Fixed reflection text returned when a scripted backend is asked for a
/// post-task reflection (test mode).
pub const SCRIPTED_REFLECTION: &str = "I failed to complete the task in the allotted steps. \
Next attempt, I should search receptacles systematically, take the target object, apply any \
required device action, and deliver it to the goal receptacle.";

pub struct ScriptedBackend {
    plan: Vec<ActionCommand>,
    kind: BackboneKind,
    policy: ScriptedPolicy,
    goal_text: String,
    failing: bool,
    cursor: usize,
    turn: u32,
    // Tracked along the plan for honest state fillers.
    location: String,
    inventory: String,
}

impl ScriptedBackend {
    pub fn new(
        task: &TaskSpec,
        kind: BackboneKind,
        policy: ScriptedPolicy,
        trial_index: u32,
    ) -> Result<Self, OracleError> {
        let plan = oracle_solve(task)?.actions;
        let failing = match policy {
            ScriptedPolicy::Fail => true,
            ScriptedPolicy::FailThenOracle => trial_index == 0,
            ScriptedPolicy::Oracle | ScriptedPolicy::Probe => false,
        };
        let goal_text = task
            .instruction_text
            .strip_prefix("Your task is to: ")
            .unwrap_or(&task.instruction_text)
            .trim_end_matches('.')
            .to_string();
        Ok(Self {
            plan,
            kind,
            policy,
            goal_text,
            failing,
            cursor: 0,
            turn: 0,
            location: "middle of the room".to_string(),
            inventory: "none".to_string(),
        })
    }

    fn next_action(&self) -> Option<&ActionCommand> {
        self.plan.get(self.cursor)
    }

    /// Move the plan cursor to step `t` (1-based), replaying the tracked
    /// location/inventory; used when probing a mid-episode context.
    pub fn fast_forward(&mut self, t: u32) {
        let target = (t.saturating_sub(1)) as usize;
        while self.cursor < target.min(self.plan.len()) {
            let cmd = self.plan[self.cursor].clone();
            self.track(&cmd);
            self.cursor += 1;
            self.turn += 1;
        }
    }

    fn track(&mut self, cmd: &ActionCommand) {
        match cmd {
            ActionCommand::GoTo { recep } => self.location = recep.key(),
            ActionCommand::Teleport { room } => self.location = room.clone(),
            ActionCommand::Take { obj, .. } => self.inventory = obj.key(),
            ActionCommand::Put { .. } => self.inventory = "none".to_string(),
            _ => {}
        }
    }

    fn reasoning_for(&self, effective: BackboneKind, action: &str) -> Option<String> {
        let state_sentence = format!(
            "Currently, I am at {}, holding {}",
            self.location,
            if self.inventory == "none" {
                "nothing".to_string()
            } else {
                format!("a {}", self.inventory)
            }
        );
        match effective {
            BackboneKind::NoThinking => None,
            BackboneKind::ReAct | BackboneKind::PlanAndAct => {
                Some(format!("To continue the task, I will {action}."))
            }
            BackboneKind::ReflAct => Some(format!(
                "{state_sentence}; to move toward the goal of {}, I will {action}.",
                self.goal_text
            )),
            BackboneKind::StateOnly => Some(format!("{state_sentence}.")),
            BackboneKind::GoalOnly => Some(format!("{}.", self.goal_text)),
            BackboneKind::StateGoal => {
                Some(format!("State: {state_sentence}, Goal: {}", self.goal_text))
            }
            BackboneKind::StateGoalThought => Some(format!(
                "Goal: {}\nCurrent location: {}\nCurrent inventory: {}\nThought: I will {action}.",
                self.goal_text, self.location, self.inventory
            )),
        }
    }
}

impl PolicyBackend for ScriptedBackend {
    fn complete(&mut self, _messages: &[Message]) -> Result<CompletionResult, BackendError> {
        self.turn += 1;
        let action = if self.failing {
            FAIL_ACTION.to_string()
        } else {
            let cmd = self
                .next_action()
                .ok_or(BackendError::ScriptedDone {
                    len: self.plan.len(),
                })?
                .clone();
            self.cursor += 1;
            self.track(&cmd);
            cmd.render()
        };
        let effective = effective_parse_kind(self.kind, self.turn);
        let reasoning = self.reasoning_for(effective, &action);
        Ok(CompletionResult {
            text: render_output(effective, reasoning.as_deref(), &action),
            usage: None,
            finish_reason: Some("stop".to_string()),
        })
    }

    fn score_candidates(
        &mut self,
        messages: &[Message],
        candidates: &[String],
    ) -> Result<ActionDistribution, BackendError> {
        if candidates.is_empty() {
            return Err(BackendError::UnsupportedByBackend(
                "empty candidate set".into(),
            ));
        }
        let oracle_action = self.next_action().map(|c| c.render());
        let hot = match self.policy {
            ScriptedPolicy::Probe => {
                // Sharpen only when an injected trailing thought names the
                // oracle action; the base distribution stays uniform.
                let injected = messages
                    .last()
                    .filter(|m| m.role == Role::Assistant)
                    .map(|m| m.content.as_str())
                    .unwrap_or("");
                oracle_action
                    .as_ref()
                    .filter(|a| !injected.is_empty() && injected.contains(a.as_str()))
                    .and_then(|a| candidates.iter().position(|c| c == a))
            }
            _ if self.failing => None,
            _ => oracle_action
                .as_ref()
                .and_then(|a| candidates.iter().position(|c| c == a)),
        };
        let dist = match hot {
            Some(i) => ActionDistribution::one_hot(candidates, i, ScoringMethod::Scripted),
            None => ActionDistribution::uniform(candidates, ScoringMethod::Scripted),
        };
        debug_assert!(dist.check_invariants().is_ok());
        Ok(dist)
    }

    fn descriptor(&self) -> String {
        format!("scripted:{}", self.policy.label())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taskgen::generate::generate;
    use crate::world::goal::TaskType;
    use crate::world::state::EnvFlavor;

    fn task() -> TaskSpec {
        generate(7, TaskType::Put, EnvFlavor::Household).unwrap()
    }

    #[test]
    fn nothinking_render_is_a_bare_action_line() {
        let t = task();
        let mut b =
            ScriptedBackend::new(&t, BackboneKind::NoThinking, ScriptedPolicy::Oracle, 0).unwrap();
        let first = oracle_solve(&t).unwrap().actions[0].render();
        let out = b.complete(&[]).unwrap();
        assert_eq!(out.text, format!("Action: {first}"));
    }

    #[test]
    fn every_backbone_format_embeds_the_same_action() {
        let t = task();
        let first = oracle_solve(&t).unwrap().actions[0].render();
        for kind in BackboneKind::ALL {
            let mut b = ScriptedBackend::new(&t, kind, ScriptedPolicy::Oracle, 0).unwrap();
            let out = b.complete(&[]).unwrap();
            let parsed = crate::backbones::parse::parse_output(kind, &out.text).unwrap();
            assert!(
                !parsed.lenient,
                "{kind:?} rendered off-format: {}",
                out.text
            );
            assert_eq!(parsed.action_text, first, "{kind:?}");
        }
    }

    #[test]
    fn scoring_is_one_hot_on_the_oracle_action_else_uniform() {
        let t = task();
        let first = oracle_solve(&t).unwrap().actions[0].render();
        let mut b =
            ScriptedBackend::new(&t, BackboneKind::ReflAct, ScriptedPolicy::Oracle, 0).unwrap();
        let candidates = vec![first.clone(), "go to toilet 1".into(), "look".into()];
        let dist = b.score_candidates(&[], &candidates).unwrap();
        assert_eq!(dist.entries[0].probability, 1.0);

        let without: Vec<String> = vec![
            "go to toilet 1".into(),
            "look".into(),
            "open cabinet 1".into(),
            "close cabinet 1".into(),
        ];
        let dist = b.score_candidates(&[], &without).unwrap();
        for e in &dist.entries {
            assert!((e.probability - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn fail_then_oracle_switches_on_trial_index() {
        let t = task();
        let mut trial0 = ScriptedBackend::new(
            &t,
            BackboneKind::NoThinking,
            ScriptedPolicy::FailThenOracle,
            0,
        )
        .unwrap();
        assert_eq!(
            trial0.complete(&[]).unwrap().text,
            format!("Action: {FAIL_ACTION}")
        );
        let mut trial1 = ScriptedBackend::new(
            &t,
            BackboneKind::NoThinking,
            ScriptedPolicy::FailThenOracle,
            1,
        )
        .unwrap();
        assert!(trial1
            .complete(&[])
            .unwrap()
            .text
            .starts_with("Action: go to"));
    }

    #[test]
    fn probe_policy_sharpens_only_on_matching_thoughts() {
        let t = task();
        let first = oracle_solve(&t).unwrap().actions[0].render();
        let candidates = vec![first.clone(), "go to toilet 1".into()];
        let mut b =
            ScriptedBackend::new(&t, BackboneKind::ReflAct, ScriptedPolicy::Probe, 0).unwrap();
        let base = b.score_candidates(&[], &candidates).unwrap();
        assert!((base.entries[0].probability - 0.5).abs() < 1e-12);
        let injected = vec![Message::assistant(format!("Thought: I should {first}."))];
        let sharp = b.score_candidates(&injected, &candidates).unwrap();
        assert_eq!(sharp.entries[0].probability, 1.0);
    }
}
