//! The reasoning frameworks and their per-step reasoning schedule.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackboneKind {
    NoThinking,
    ReAct,
    PlanAndAct,
    ReflAct,
    StateOnly,
    GoalOnly,
    StateGoal,
    StateGoalThought,
}

impl BackboneKind {
    pub const ALL: [BackboneKind; 8] = [
        BackboneKind::NoThinking,
        BackboneKind::ReAct,
        BackboneKind::PlanAndAct,
        BackboneKind::ReflAct,
        BackboneKind::StateOnly,
        BackboneKind::GoalOnly,
        BackboneKind::StateGoal,
        BackboneKind::StateGoalThought,
    ];

    pub fn label(self) -> &'static str {
        match self {
            BackboneKind::NoThinking => "nothinking",
            BackboneKind::ReAct => "react",
            BackboneKind::PlanAndAct => "planandact",
            BackboneKind::ReflAct => "reflact",
            BackboneKind::StateOnly => "stateonly",
            BackboneKind::GoalOnly => "goalonly",
            BackboneKind::StateGoal => "stategoal",
            BackboneKind::StateGoalThought => "stategoalthought",
        }
    }

    pub fn from_label(label: &str) -> Option<Self> {
        match label.to_lowercase().replace(['-', '_'], "").as_str() {
            "nothinking" => Some(BackboneKind::NoThinking),
            "react" => Some(BackboneKind::ReAct),
            "planandact" => Some(BackboneKind::PlanAndAct),
            "reflact" => Some(BackboneKind::ReflAct),
            "stateonly" | "state" => Some(BackboneKind::StateOnly),
            "goalonly" | "goal" => Some(BackboneKind::GoalOnly),
            "stategoal" => Some(BackboneKind::StateGoal),
            "stategoalthought" => Some(BackboneKind::StateGoalThought),
            _ => None,
        }
    }

    /// Label of the single reasoning line, for the plain-labeled kinds.
    pub fn reasoning_label(self) -> Option<&'static str> {
        match self {
            BackboneKind::NoThinking => None,
            BackboneKind::ReAct | BackboneKind::PlanAndAct | BackboneKind::StateGoalThought => {
                Some("Thought")
            }
            BackboneKind::ReflAct => Some("Reflection"),
            BackboneKind::StateOnly => Some("State"),
            BackboneKind::GoalOnly => Some("Goal"),
            BackboneKind::StateGoal => Some("State"),
        }
    }

    /// Whether the kind renders a multi-label block before the action.
    pub fn is_multi_label(self) -> bool {
        matches!(
            self,
            BackboneKind::StateGoal | BackboneKind::StateGoalThought
        )
    }
}

/// A backbone selection plus an optional replacement for the instruction's
/// format paragraph (the action-list paragraph is never overridable).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Backbone {
    pub kind: BackboneKind,
    pub instruction_override: Option<String>,
}

impl Backbone {
    pub fn new(kind: BackboneKind) -> Self {
        Self {
            kind,
            instruction_override: None,
        }
    }

    pub fn with_override(kind: BackboneKind, text: impl Into<String>) -> Self {
        Self {
            kind,
            instruction_override: Some(text.into()),
        }
    }
}

impl From<BackboneKind> for Backbone {
    fn from(kind: BackboneKind) -> Self {
        Backbone::new(kind)
    }
}

/// Whether the backbone produces a reasoning segment at step `t`.
/// Plan-and-Act reasons only on the first step; NoThinking never does.
pub fn should_reason(kind: BackboneKind, t: u32) -> bool {
    debug_assert!(t >= 1);
    match kind {
        BackboneKind::NoThinking => false,
        BackboneKind::PlanAndAct => t == 1,
        _ => true,
    }
}
