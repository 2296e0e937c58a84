//! The thought-injection probe: append each thought variant to a fixed
//! context and record how the candidate-action distribution shifts.

use crate::backbones::context::{turn_messages, Context};
use crate::backbones::kind::Backbone;
use crate::backbones::parse::render_output;
use crate::gateway::types::{ActionDistribution, BackendError, Message};
use crate::gateway::PolicyBackend;

use super::super::backbones::catalog::CatalogError;

#[derive(Debug, thiserror::Error)]
pub enum ProbeError {
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
}

/// Score the candidates once per thought variant. An empty variant scores
/// the unmodified context; a non-empty one is appended as a partial
/// assistant turn in the backbone's reasoning format.
pub fn probe_thought_influence(
    backbone: &Backbone,
    ctx: &Context,
    thought_variants: &[String],
    backend: &mut dyn PolicyBackend,
    candidates: &[String],
) -> Result<Vec<ActionDistribution>, ProbeError> {
    let base = turn_messages(backbone, ctx, &[])?;
    let mut out = Vec::with_capacity(thought_variants.len());
    for variant in thought_variants {
        let mut messages = base.clone();
        if !variant.is_empty() {
            // Render the reasoning segment in the backbone's format and drop
            // the trailing empty action line; only the thought is injected.
            let rendered = render_output(backbone.kind, Some(variant), "");
            let labeled = rendered
                .strip_suffix("\nAction: ")
                .unwrap_or(&rendered)
                .to_string();
            messages.push(Message::assistant(labeled));
        }
        out.push(backend.score_candidates(&messages, candidates)?);
    }
    Ok(out)
}
