//! Parsing one model response into reasoning plus a single action line.
//!
//! A strict pass enforces the backbone's label layout. When that fails, a
//! lenient pass accepts any response containing exactly one "Action:" line,
//! flagging the turn for telemetry. More than one action line is always an
//! error — the instruction allows only one per response.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::kind::BackboneKind;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReasoningOutput {
    /// The thought / reflection segment. For the multi-label kinds this is
    /// the labeled block verbatim; for single-label kinds the label is
    /// stripped. Absent for bare-action outputs.
    pub reasoning_text: Option<String>,
    /// Single line, no label prefix.
    pub action_text: String,
    pub raw: String,
    /// True when only the lenient pass accepted the output.
    pub lenient: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormatError {
    #[error("no \"Action:\" line in the output")]
    MissingAction,
    #[error("more than one \"Action:\" line in the output")]
    MultipleActions,
    #[error("output does not follow the {label:?} format")]
    MissingRequiredLabel { label: &'static str },
}

const KNOWN_LABELS: [&str; 8] = [
    "action",
    "thought",
    "reflection",
    "state",
    "goal",
    "current location",
    "current inventory",
    "observation",
];

fn label_of(line: &str) -> Option<(&str, &str)> {
    let trimmed = line.trim_start();
    let colon = trimmed.find(':')?;
    let head = trimmed[..colon].trim().to_lowercase();
    KNOWN_LABELS
        .iter()
        .find(|l| **l == head)
        .map(|l| (*l, trimmed[colon + 1..].trim_start()))
}

fn is_action_line(line: &str) -> bool {
    matches!(label_of(line), Some(("action", _)))
}

/// Strip the label and tolerate a doubled "Action: Action: ..." artifact.
fn action_content(line: &str) -> String {
    let mut content = match label_of(line) {
        Some(("action", rest)) => rest.to_string(),
        _ => line.trim().to_string(),
    };
    if let Some(("action", rest)) = label_of(&content) {
        content = rest.to_string();
    }
    content.trim().to_string()
}

struct Lines<'a> {
    all: Vec<&'a str>,
    action_positions: Vec<usize>,
}

fn split_lines(raw: &str) -> Lines<'_> {
    let mut all: Vec<&str> = raw.lines().map(|l| l.trim_end()).collect();
    while all.first().map(|l| l.is_empty()).unwrap_or(false) {
        all.remove(0);
    }
    while all.last().map(|l| l.is_empty()).unwrap_or(false) {
        all.pop();
    }
    let action_positions = all
        .iter()
        .enumerate()
        .filter(|(_, l)| is_action_line(l))
        .map(|(i, _)| i)
        .collect();
    Lines {
        all,
        action_positions,
    }
}

fn check_action_count(lines: &Lines) -> Result<usize, FormatError> {
    match lines.action_positions.len() {
        0 => Err(FormatError::MissingAction),
        1 => Ok(lines.action_positions[0]),
        _ => Err(FormatError::MultipleActions),
    }
}

/// Strict pass: the single action line must close the output and the block
/// before it must carry exactly the backbone's labels.
pub fn parse_output_strict(kind: BackboneKind, raw: &str) -> Result<ReasoningOutput, FormatError> {
    let lines = split_lines(raw);
    let action_at = check_action_count(&lines)?;
    if action_at != lines.all.len().saturating_sub(1) {
        return Err(FormatError::MissingRequiredLabel { label: "Action" });
    }
    let action_text = action_content(lines.all[action_at]);
    if action_text.is_empty() {
        return Err(FormatError::MissingAction);
    }
    let block: Vec<&str> = lines.all[..action_at]
        .iter()
        .copied()
        .filter(|l| !l.is_empty())
        .collect();

    let single_label = |label: &'static str,
                        required: bool|
     -> Result<Option<String>, FormatError> {
        if block.is_empty() {
            return if required {
                Err(FormatError::MissingRequiredLabel { label })
            } else {
                Ok(None)
            };
        }
        let (head, rest) = label_of(block[0]).ok_or(FormatError::MissingRequiredLabel { label })?;
        if !head.eq_ignore_ascii_case(label) {
            return Err(FormatError::MissingRequiredLabel { label });
        }
        // Later lines may only be unlabeled continuations.
        let mut text = rest.to_string();
        for line in &block[1..] {
            if label_of(line).is_some() {
                return Err(FormatError::MissingRequiredLabel { label });
            }
            text.push('\n');
            text.push_str(line);
        }
        Ok(Some(text))
    };

    let labels_in_order = |expected: &[&'static str]| -> Result<(), FormatError> {
        let found: Vec<&str> = block
            .iter()
            .filter_map(|l| label_of(l).map(|(h, _)| h))
            .collect();
        let mut want = expected.iter();
        let mut cursor = want.next();
        for head in found {
            match cursor {
                Some(label) if head.eq_ignore_ascii_case(label) => cursor = want.next(),
                Some(_) => {
                    return Err(FormatError::MissingRequiredLabel {
                        label: expected[expected.len() - 1 - want.len()],
                    })
                }
                None => return Err(FormatError::MissingRequiredLabel { label: "Action" }),
            }
        }
        match cursor {
            None => Ok(()),
            Some(label) => Err(FormatError::MissingRequiredLabel { label }),
        }
    };

    let reasoning_text = match kind {
        BackboneKind::NoThinking => {
            if !block.is_empty() {
                return Err(FormatError::MissingRequiredLabel { label: "Action" });
            }
            None
        }
        BackboneKind::ReAct | BackboneKind::PlanAndAct => single_label("thought", false)?,
        BackboneKind::ReflAct => single_label("reflection", true)?,
        BackboneKind::StateOnly => single_label("state", true)?,
        BackboneKind::GoalOnly => single_label("goal", true)?,
        BackboneKind::StateGoal => {
            if block.is_empty() || !matches!(label_of(block[0]), Some(("state", _))) {
                return Err(FormatError::MissingRequiredLabel { label: "State" });
            }
            let joined = block.join("\n");
            if !joined.to_lowercase().contains("goal:") {
                return Err(FormatError::MissingRequiredLabel { label: "Goal" });
            }
            Some(joined)
        }
        BackboneKind::StateGoalThought => {
            labels_in_order(&["goal", "current location", "current inventory", "thought"])?;
            Some(block.join("\n"))
        }
    };

    Ok(ReasoningOutput {
        reasoning_text,
        action_text,
        raw: raw.to_string(),
        lenient: false,
    })
}

fn parse_output_lenient(raw: &str) -> Result<ReasoningOutput, FormatError> {
    let lines = split_lines(raw);
    let action_at = check_action_count(&lines)?;
    let action_text = action_content(lines.all[action_at]);
    if action_text.is_empty() {
        return Err(FormatError::MissingAction);
    }
    let prior = lines.all[..action_at].join("\n").trim().to_string();
    Ok(ReasoningOutput {
        reasoning_text: (!prior.is_empty()).then_some(prior),
        action_text,
        raw: raw.to_string(),
        lenient: true,
    })
}

/// Two-pass parse: strict first, lenient salvage second.
pub fn parse_output(kind: BackboneKind, raw: &str) -> Result<ReasoningOutput, FormatError> {
    match parse_output_strict(kind, raw) {
        Ok(out) => Ok(out),
        Err(e @ (FormatError::MissingAction | FormatError::MultipleActions)) => Err(e),
        Err(_) => parse_output_lenient(raw),
    }
}

/// Render reasoning and action back into the backbone's surface form.
/// Inverse of the strict parse for well-formed turns.
pub fn render_output(kind: BackboneKind, reasoning: Option<&str>, action: &str) -> String {
    match (kind, reasoning) {
        (_, None) => format!("Action: {action}"),
        (BackboneKind::NoThinking, Some(_)) => format!("Action: {action}"),
        (BackboneKind::ReAct | BackboneKind::PlanAndAct, Some(r)) => {
            format!("Thought: {r}\nAction: {action}")
        }
        (BackboneKind::ReflAct, Some(r)) => format!("Reflection: {r}\nAction: {action}"),
        (BackboneKind::StateOnly, Some(r)) => format!("State: {r}\nAction: {action}"),
        (BackboneKind::GoalOnly, Some(r)) => format!("Goal: {r}\nAction: {action}"),
        (BackboneKind::StateGoal | BackboneKind::StateGoalThought, Some(r)) => {
            format!("{r}\nAction: {action}")
        }
    }
}
