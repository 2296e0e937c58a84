//! Prompt construction and output parsing for the reasoning frameworks:
//! NoThinking, ReAct, Plan-and-Act, ReflAct and the verbalization ablations,
//! backed by the verbatim instruction and one-shot example catalog.

pub mod catalog;
pub mod context;
pub mod icl;
pub mod kind;
pub mod parse;

pub use catalog::{
    apply_override, effective_parse_kind, format_reminder, instruction_text, system_prompt,
    system_prompt_at_step, CatalogError, CatalogFlavor, FORMAT_MARKER,
};
pub use context::{system_text, turn_messages, Context, HistoryEntry, MEMORY_HEADER};
pub use icl::{icl_agent_turns, render_icl};
pub use kind::{should_reason, Backbone, BackboneKind};
pub use parse::{parse_output, parse_output_strict, render_output, FormatError, ReasoningOutput};
