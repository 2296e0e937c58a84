//! Report assembly: metrics.csv, overlap.csv and report.md with stable
//! column order and byte-identical output for identical inputs.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::backbones::kind::BackboneKind;
use crate::runner::episode::Trajectory;
use crate::world::goal::GoalFlavor;

use super::metrics::{
    aggregate, hallucination_rate, mean_entropy, steps_per_episode, tokens_per_step, MetricsError,
};
use super::overlap::OverlapReport;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KindMetrics {
    pub kind: String,
    pub episodes: usize,
    pub success_rate: f64,
    pub average_reward: f64,
    pub mean_entropy: Option<f64>,
    pub hallucination_rate: f64,
    pub tokens_per_step: f64,
    pub steps_per_episode: f64,
    /// Names of metrics computed from fallbacks or skipped entirely.
    pub approx_flags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub per_kind: Vec<KindMetrics>,
    pub episode_count: usize,
    pub config_hash: String,
}

/// Compute the full per-kind table. Kinds appear in the given order.
pub fn compute_metrics(
    trajectories: &[Trajectory],
    kinds: &[BackboneKind],
    flavor: GoalFlavor,
    config_hash: &str,
) -> Result<MetricsReport, MetricsError> {
    let mut per_kind = Vec::new();
    for &kind in kinds {
        let agg = aggregate(trajectories, kind, flavor)?;
        let mut approx_flags = Vec::new();
        let entropy = match mean_entropy(trajectories, kind) {
            Ok(v) => Some(v),
            Err(MetricsError::NoDistributions) => {
                approx_flags.push("entropy_skipped".to_string());
                None
            }
            Err(e) => return Err(e),
        };
        let (tokens, tokens_approx) = tokens_per_step(trajectories, kind)?;
        if tokens_approx {
            approx_flags.push("tokens_approximate".to_string());
        }
        per_kind.push(KindMetrics {
            kind: kind.label().to_string(),
            episodes: trajectories.iter().filter(|t| t.backbone == kind).count(),
            success_rate: agg.success_rate,
            average_reward: agg.average_reward,
            mean_entropy: entropy,
            hallucination_rate: hallucination_rate(trajectories, kind)?,
            tokens_per_step: tokens,
            steps_per_episode: steps_per_episode(trajectories, kind)?,
            approx_flags,
        });
    }
    Ok(MetricsReport {
        per_kind,
        episode_count: trajectories.len(),
        config_hash: config_hash.to_string(),
    })
}

fn fmt(v: f64) -> String {
    format!("{v:.6}")
}

pub const METRICS_CSV_HEADER: &str = "kind,episodes,success_rate,average_reward,mean_entropy,hallucination_rate,tokens_per_step,steps_per_episode,approx_flags";

pub fn metrics_csv(report: &MetricsReport) -> String {
    let mut out = String::from(METRICS_CSV_HEADER);
    out.push('\n');
    for k in &report.per_kind {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            k.kind,
            k.episodes,
            fmt(k.success_rate),
            fmt(k.average_reward),
            k.mean_entropy.map(fmt).unwrap_or_default(),
            fmt(k.hallucination_rate),
            fmt(k.tokens_per_step),
            fmt(k.steps_per_episode),
            k.approx_flags.join(";"),
        ));
    }
    out
}

pub const OVERLAP_CSV_HEADER: &str = "category,count,task_ids";

pub fn overlap_csv(report: &OverlapReport) -> String {
    let mut out = String::from(OVERLAP_CSV_HEADER);
    out.push('\n');
    for (subset, tasks) in &report.categories {
        let ids: Vec<&str> = tasks.iter().map(String::as_str).collect();
        out.push_str(&format!(
            "{},{},{}\n",
            OverlapReport::category_label(subset),
            tasks.len(),
            ids.join(";"),
        ));
    }
    out
}

/// Reported-context reference values. Annotations only: they come from
/// hosted-model evaluations and are never asserted by this code base.
pub const ENTROPY_ANCHOR: &str = "paper ref: 1.23 / 0.30";
pub const STEPS_ANCHOR: &str = "paper ref: 21.0 / 18.6 / 16.5";

pub fn report_markdown(
    metrics: &MetricsReport,
    overlap: Option<&OverlapReport>,
    include_anchors: bool,
) -> String {
    let mut out = String::new();
    out.push_str("# Run report\n\n");
    out.push_str(&format!(
        "{} episode(s), config hash `{}`.\n\n",
        metrics.episode_count, metrics.config_hash
    ));
    out.push_str("## Metrics by backbone\n\n");
    out.push_str("| kind | episodes | success rate | average reward | mean entropy (nats) | hallucination rate | tokens/step | steps/episode | flags |\n");
    out.push_str("|---|---|---|---|---|---|---|---|---|\n");
    for k in &metrics.per_kind {
        out.push_str(&format!(
            "| {} | {} | {} | {} | {} | {} | {} | {} | {} |\n",
            k.kind,
            k.episodes,
            fmt(k.success_rate),
            fmt(k.average_reward),
            k.mean_entropy.map(fmt).unwrap_or_else(|| "-".to_string()),
            fmt(k.hallucination_rate),
            fmt(k.tokens_per_step),
            fmt(k.steps_per_episode),
            if k.approx_flags.is_empty() {
                "-".to_string()
            } else {
                k.approx_flags.join(";")
            },
        ));
    }
    if let Some(overlap) = overlap {
        out.push_str("\n## Failure overlap\n\n");
        out.push_str("| category | count | tasks |\n|---|---|---|\n");
        for (subset, tasks) in &overlap.categories {
            let ids: Vec<&str> = tasks.iter().map(String::as_str).collect();
            out.push_str(&format!(
                "| {} | {} | {} |\n",
                OverlapReport::category_label(subset),
                tasks.len(),
                if ids.is_empty() {
                    "-".to_string()
                } else {
                    ids.join(", ")
                },
            ));
        }
    }
    if include_anchors {
        out.push_str("\n## Reference anchors\n\n");
        out.push_str(
            "Reported-context values from hosted-model evaluations of these backbones; \
annotations only, never asserted by this suite.\n\n",
        );
        out.push_str(&format!(
            "- mean action-distribution entropy, NoThinking vs ReAct — {ENTROPY_ANCHOR}\n"
        ));
        out.push_str(&format!(
            "- steps per episode, NoThinking / ReAct / ReflAct — {STEPS_ANCHOR}\n"
        ));
    }
    out
}

/// Emit metrics.csv, overlap.csv (when present) and report.md into `dir`.
pub fn write_report(
    dir: &Path,
    metrics: &MetricsReport,
    overlap: Option<&OverlapReport>,
    include_anchors: bool,
) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("metrics.csv"), metrics_csv(metrics))?;
    if let Some(overlap) = overlap {
        std::fs::write(dir.join("overlap.csv"), overlap_csv(overlap))?;
    }
    std::fs::write(
        dir.join("report.md"),
        report_markdown(metrics, overlap, include_anchors),
    )?;
    Ok(())
}

/// Failed-task sets per kind, keyed by the kind label, with the shared
/// task universe; feeds the overlap report.
pub fn failures_by_kind(
    trajectories: &[Trajectory],
) -> (BTreeSet<String>, BTreeMap<String, BTreeSet<String>>) {
    let mut universe = BTreeSet::new();
    let mut failed: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for traj in trajectories {
        universe.insert(traj.task_id.clone());
        let entry = failed.entry(traj.backbone.label().to_string()).or_default();
        if !traj.success {
            entry.insert(traj.task_id.clone());
        }
    }
    (universe, failed)
}
