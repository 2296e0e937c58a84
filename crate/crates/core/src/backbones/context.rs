//! The per-episode context: task line, interaction history, latest
//! observation — and its deterministic serialization into chat messages.

use serde::{Deserialize, Serialize};

use super::catalog::{system_prompt_at_step, CatalogError, CatalogFlavor};
use super::icl::render_icl;
use super::kind::Backbone;
use crate::gateway::types::Message;
use crate::world::goal::TaskType;
use crate::world::state::EnvFlavor;

pub const MEMORY_HEADER: &str = "Your memory from previous attempts:";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub reasoning_text: Option<String>,
    pub action_text: String,
    /// The assistant message exactly as produced, replayed verbatim when
    /// reconstructing the conversation.
    pub raw_output: String,
    pub observation_text: String,
}

/// Context at step `t`: the history holds the `t - 1` completed turns and
/// the latest observation is the final user message.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Context {
    pub task_instruction: String,
    pub env_flavor: EnvFlavor,
    pub task_type: TaskType,
    /// Scene description plus the task line; the first user message.
    pub initial_observation: String,
    pub history: Vec<HistoryEntry>,
    pub t: u32,
}

impl Context {
    pub fn new(
        task_instruction: impl Into<String>,
        env_flavor: EnvFlavor,
        task_type: TaskType,
        initial_observation: impl Into<String>,
    ) -> Self {
        Self {
            task_instruction: task_instruction.into(),
            env_flavor,
            task_type,
            initial_observation: initial_observation.into(),
            history: Vec::new(),
            t: 1,
        }
    }

    /// Append a completed turn; the context is append-only per step.
    pub fn push_turn(&mut self, entry: HistoryEntry) {
        self.history.push(entry);
        self.t += 1;
    }

    pub fn latest_observation(&self) -> &str {
        self.history
            .last()
            .map(|e| e.observation_text.as_str())
            .unwrap_or(&self.initial_observation)
    }

    pub fn check_invariants(&self) -> Result<(), String> {
        if self.history.len() + 1 != self.t as usize {
            return Err(format!(
                "history length {} does not match step {}",
                self.history.len(),
                self.t
            ));
        }
        Ok(())
    }
}

/// Assemble the full system text: instruction block, one-shot example, and
/// any Reflexion memory block.
pub fn system_text(
    backbone: &Backbone,
    ctx: &Context,
    memory: &[String],
) -> Result<String, CatalogError> {
    let flavor = CatalogFlavor::from(ctx.env_flavor);
    let instruction = system_prompt_at_step(backbone, flavor, ctx.t)?;
    let icl = render_icl(backbone.kind, flavor, ctx.task_type)?;
    let mut text = format!("{}\nHere is an example:\n{}", instruction.trim_end(), icl);
    if !memory.is_empty() {
        text.push_str("\n\n");
        text.push_str(MEMORY_HEADER);
        for (i, reflection) in memory.iter().enumerate() {
            text.push_str(&format!("\n{}. {}", i + 1, reflection));
        }
    }
    Ok(text)
}

/// The chat-message view of the context: system prompt, then alternating
/// user observations and assistant turns, ending with the user message
/// that carries the latest observation.
pub fn turn_messages(
    backbone: &Backbone,
    ctx: &Context,
    memory: &[String],
) -> Result<Vec<Message>, CatalogError> {
    let mut messages = Vec::with_capacity(2 + 2 * ctx.history.len());
    messages.push(Message::system(system_text(backbone, ctx, memory)?));
    messages.push(Message::user(ctx.initial_observation.clone()));
    for entry in &ctx.history {
        messages.push(Message::assistant(entry.raw_output.clone()));
        messages.push(Message::user(entry.observation_text.clone()));
    }
    Ok(messages)
}
