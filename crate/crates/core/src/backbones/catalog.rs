//! The instruction and one-shot example catalog.
//!
//! Files live under `prompts/{flavor}/{kind}/instruction.txt` and
//! `prompts/{flavor}/icl/{task_type}.txt` and are embedded at build time.
//! Instruction blocks share every paragraph except the format paragraph
//! (the line containing the format marker), which is what an
//! `instruction_override` replaces.

use thiserror::Error;

use super::kind::{should_reason, Backbone, BackboneKind};
use crate::world::goal::TaskType;
use crate::world::state::EnvFlavor;

/// Marker present in every format paragraph.
pub const FORMAT_MARKER: &str = "strictly follow this format";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CatalogError {
    #[error("no catalog entry for kind {kind} in flavor {flavor}")]
    UnknownCombination {
        kind: &'static str,
        flavor: &'static str,
    },
    #[error("no one-shot example for task type {task_type} in flavor {flavor}")]
    MissingExample {
        task_type: &'static str,
        flavor: &'static str,
    },
}

/// Catalog flavors. `Household` and `Science` drive the runnable
/// environments; `Jericho` is carried as reference prompt data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CatalogFlavor {
    Household,
    Science,
    Jericho,
}

impl From<EnvFlavor> for CatalogFlavor {
    fn from(f: EnvFlavor) -> Self {
        match f {
            EnvFlavor::Household => CatalogFlavor::Household,
            EnvFlavor::Science => CatalogFlavor::Science,
        }
    }
}

impl CatalogFlavor {
    pub fn dir(self) -> &'static str {
        match self {
            CatalogFlavor::Household => "household",
            CatalogFlavor::Science => "science",
            CatalogFlavor::Jericho => "jericho",
        }
    }
}

macro_rules! hh {
    ($kind:literal) => {
        include_str!(concat!(
            "../../prompts/household/",
            $kind,
            "/instruction.txt"
        ))
    };
}

/// Raw instruction text for a (kind, flavor) pair.
pub fn instruction_text(
    kind: BackboneKind,
    flavor: CatalogFlavor,
) -> Result<&'static str, CatalogError> {
    let unknown = || CatalogError::UnknownCombination {
        kind: kind.label(),
        flavor: flavor.dir(),
    };
    match flavor {
        CatalogFlavor::Household => Ok(match kind {
            BackboneKind::NoThinking => hh!("nothinking"),
            BackboneKind::ReAct => hh!("react"),
            BackboneKind::PlanAndAct => hh!("planandact"),
            BackboneKind::ReflAct => hh!("reflact"),
            BackboneKind::StateOnly => hh!("stateonly"),
            BackboneKind::GoalOnly => hh!("goalonly"),
            BackboneKind::StateGoal => hh!("stategoal"),
            BackboneKind::StateGoalThought => hh!("stategoalthought"),
        }),
        CatalogFlavor::Science => match kind {
            BackboneKind::NoThinking => Ok(include_str!(
                "../../prompts/science/nothinking/instruction.txt"
            )),
            BackboneKind::ReAct => Ok(include_str!("../../prompts/science/react/instruction.txt")),
            BackboneKind::ReflAct => Ok(include_str!(
                "../../prompts/science/reflact/instruction.txt"
            )),
            _ => Err(unknown()),
        },
        CatalogFlavor::Jericho => match kind {
            BackboneKind::NoThinking => Ok(include_str!(
                "../../prompts/jericho/nothinking/instruction.txt"
            )),
            BackboneKind::ReAct => Ok(include_str!("../../prompts/jericho/react/instruction.txt")),
            BackboneKind::ReflAct => Ok(include_str!(
                "../../prompts/jericho/reflact/instruction.txt"
            )),
            _ => Err(unknown()),
        },
    }
}

/// Raw one-shot example source (kind-neutral encoding).
pub fn icl_source(
    flavor: CatalogFlavor,
    task_type: TaskType,
) -> Result<&'static str, CatalogError> {
    match flavor {
        CatalogFlavor::Household => Ok(match task_type {
            TaskType::Put => include_str!("../../prompts/household/icl/put.txt"),
            TaskType::Clean => include_str!("../../prompts/household/icl/clean.txt"),
            TaskType::Heat => include_str!("../../prompts/household/icl/heat.txt"),
            TaskType::Cool => include_str!("../../prompts/household/icl/cool.txt"),
            TaskType::Examine => include_str!("../../prompts/household/icl/examine.txt"),
            TaskType::PutTwo => include_str!("../../prompts/household/icl/puttwo.txt"),
        }),
        // One worked example serves every science / jericho task type.
        CatalogFlavor::Science => Ok(include_str!("../../prompts/science/icl/default.txt")),
        CatalogFlavor::Jericho => Ok(include_str!("../../prompts/jericho/icl/default.txt")),
    }
}

/// Replace the format paragraph (the marker line). The action-list and
/// reminder paragraphs are never touched.
pub fn apply_override(instruction: &str, replacement: &str) -> String {
    let mut out: Vec<&str> = Vec::new();
    let mut replaced = false;
    for line in instruction.lines() {
        if !replaced && line.contains(FORMAT_MARKER) {
            out.push(replacement);
            replaced = true;
        } else {
            out.push(line);
        }
    }
    let mut text = out.join("\n");
    if instruction.ends_with('\n') {
        text.push('\n');
    }
    text
}

fn format_line(instruction: &str) -> Option<&str> {
    instruction.lines().find(|l| l.contains(FORMAT_MARKER))
}

/// The verbatim instruction block for the backbone, with any override
/// applied to the format paragraph only.
pub fn system_prompt(backbone: &Backbone, flavor: CatalogFlavor) -> Result<String, CatalogError> {
    let base = instruction_text(backbone.kind, flavor)?;
    Ok(match &backbone.instruction_override {
        Some(replacement) => apply_override(base, replacement),
        None => base.to_string(),
    })
}

/// Instruction block in effect at step `t`. Plan-and-Act carries its
/// planning format only on the first step and the direct-action format
/// afterwards.
pub fn system_prompt_at_step(
    backbone: &Backbone,
    flavor: CatalogFlavor,
    t: u32,
) -> Result<String, CatalogError> {
    let base = system_prompt(backbone, flavor)?;
    if backbone.kind == BackboneKind::PlanAndAct && !should_reason(backbone.kind, t) {
        let nothinking = instruction_text(BackboneKind::NoThinking, flavor)?;
        if let Some(direct) = format_line(nothinking) {
            return Ok(apply_override(&base, direct));
        }
    }
    Ok(base)
}

/// The kind whose output format applies at step `t`.
pub fn effective_parse_kind(kind: BackboneKind, t: u32) -> BackboneKind {
    if kind == BackboneKind::PlanAndAct && !should_reason(kind, t) {
        BackboneKind::NoThinking
    } else {
        kind
    }
}

/// The quoted format fragment of the instruction, used for corrective
/// re-prompts, e.g. `Your output must strictly follow this format:"..."`.
pub fn format_reminder(kind: BackboneKind, flavor: CatalogFlavor) -> Result<String, CatalogError> {
    let base = instruction_text(kind, flavor)?;
    let line = format_line(base).unwrap_or(base);
    let start = line.find("Your output").unwrap_or(0);
    Ok(line[start..].trim().to_string())
}
