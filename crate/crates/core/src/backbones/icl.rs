//! One-shot example rendering.
//!
//! Example files use a kind-neutral union encoding: each agent turn carries
//! a `Thought:` line (when the plain-thought transcript reasons at that
//! turn), a `Reflection:` line, `Meta-Location:` / `Meta-Inventory:`
//! annotations, the `Action:` line and the following `Observation:` lines.
//! Rendering filters and synthesizes per backbone so the thought-family
//! kinds derive mechanically: NoThinking strips every reasoning line and
//! Plan-and-Act keeps only the first thought.

use super::catalog::{icl_source, CatalogError, CatalogFlavor};
use super::kind::BackboneKind;
use crate::world::goal::TaskType;

const THOUGHT: &str = "Thought: ";
const REFLECTION: &str = "Reflection: ";
const META_LOCATION: &str = "Meta-Location: ";
const META_INVENTORY: &str = "Meta-Inventory: ";
const ACTION: &str = "Action: ";
const TASK_PREFIX: &str = "Your task is to: ";

struct RenderState {
    kind: BackboneKind,
    goal: String,
    location: String,
    inventory: String,
    turn_thought: Option<String>,
    emitted_first_thought: bool,
    dropping_continuation: bool,
    lines: Vec<String>,
    turns: Vec<String>,
    current_turn: Vec<String>,
}

impl RenderState {
    fn emit(&mut self, line: &str) {
        self.lines.push(line.to_string());
        self.dropping_continuation = false;
    }

    fn emit_turn_line(&mut self, line: String) {
        self.current_turn.push(line.clone());
        self.lines.push(line);
        self.dropping_continuation = false;
    }

    fn location_phrase(&self) -> String {
        if self.location == "middle of the room" {
            "in the middle of the room".to_string()
        } else {
            format!("at {}", self.location)
        }
    }

    fn inventory_phrase(&self) -> String {
        if self.inventory == "none" {
            "nothing".to_string()
        } else {
            format!("a {}", self.inventory)
        }
    }

    fn state_sentence(&self) -> String {
        format!(
            "Currently, I am {}, holding {}",
            self.location_phrase(),
            self.inventory_phrase()
        )
    }

    /// Reasoning lines the ablation kinds prepend to each action.
    fn ablation_lines(&self, action: &str) -> Vec<String> {
        match self.kind {
            BackboneKind::StateOnly => vec![format!("State: {}.", self.state_sentence())],
            BackboneKind::GoalOnly => vec![format!("Goal: {}.", self.goal)],
            BackboneKind::StateGoal => {
                vec![format!(
                    "State: {}, Goal: {}",
                    self.state_sentence(),
                    self.goal
                )]
            }
            BackboneKind::StateGoalThought => {
                let thought = self
                    .turn_thought
                    .clone()
                    .unwrap_or_else(|| format!("I will {action}."));
                vec![
                    format!("Goal: {}", self.goal),
                    format!("Current location: {}", self.location),
                    format!("Current inventory: {}", self.inventory),
                    format!("Thought: {thought}"),
                ]
            }
            _ => Vec::new(),
        }
    }
}

fn render_lines(kind: BackboneKind, source: &str) -> (String, Vec<String>) {
    let goal = source
        .lines()
        .find_map(|l| l.strip_prefix(TASK_PREFIX))
        .map(|g| g.trim_end_matches('.').to_string())
        .unwrap_or_default();

    let mut st = RenderState {
        kind,
        goal,
        location: "middle of the room".to_string(),
        inventory: "none".to_string(),
        turn_thought: None,
        emitted_first_thought: false,
        dropping_continuation: false,
        lines: Vec::new(),
        turns: Vec::new(),
        current_turn: Vec::new(),
    };

    for line in source.lines() {
        if let Some(text) = line.strip_prefix(THOUGHT) {
            st.turn_thought = Some(text.to_string());
            let keep = match kind {
                BackboneKind::ReAct => true,
                BackboneKind::PlanAndAct => !st.emitted_first_thought,
                _ => false,
            };
            if keep {
                st.emitted_first_thought = true;
                st.emit_turn_line(line.to_string());
            } else {
                st.dropping_continuation = true;
            }
        } else if line.strip_prefix(REFLECTION).is_some() {
            if kind == BackboneKind::ReflAct {
                st.emit_turn_line(line.to_string());
            } else {
                st.dropping_continuation = true;
            }
        } else if let Some(loc) = line.strip_prefix(META_LOCATION) {
            st.location = loc.to_string();
            st.dropping_continuation = true;
        } else if let Some(inv) = line.strip_prefix(META_INVENTORY) {
            st.inventory = inv.to_string();
            st.dropping_continuation = true;
        } else if let Some(action) = line.strip_prefix(ACTION) {
            for extra in st.ablation_lines(action) {
                st.emit_turn_line(extra);
            }
            st.emit_turn_line(line.to_string());
            st.turns.push(st.current_turn.join("\n"));
            st.current_turn.clear();
            st.turn_thought = None;
        } else if line.is_empty() {
            st.emit("");
        } else if st.dropping_continuation {
            // Continuation of a filtered line.
        } else {
            st.emit(line);
        }
    }

    // Collapse blank-line runs left by filtered paragraphs.
    let mut out: Vec<String> = Vec::new();
    for line in st.lines {
        if line.is_empty() && out.last().map(|l: &String| l.is_empty()).unwrap_or(true) {
            continue;
        }
        out.push(line);
    }
    while out.last().map(|l| l.is_empty()).unwrap_or(false) {
        out.pop();
    }
    (out.join("\n"), st.turns)
}

/// The one-shot transcript as rendered for a backbone.
pub fn render_icl(
    kind: BackboneKind,
    flavor: CatalogFlavor,
    task_type: TaskType,
) -> Result<String, CatalogError> {
    let ablation =
        kind.is_multi_label() || matches!(kind, BackboneKind::StateOnly | BackboneKind::GoalOnly);
    if ablation && !matches!(flavor, CatalogFlavor::Household) {
        return Err(CatalogError::UnknownCombination {
            kind: kind.label(),
            flavor: flavor.dir(),
        });
    }
    Ok(render_lines(kind, icl_source(flavor, task_type)?).0)
}

/// The rendered agent turns of the transcript, in order; each entry is
/// exactly what an assistant message would contain.
pub fn icl_agent_turns(
    kind: BackboneKind,
    flavor: CatalogFlavor,
    task_type: TaskType,
) -> Result<Vec<String>, CatalogError> {
    Ok(render_lines(kind, icl_source(flavor, task_type)?).1)
}
