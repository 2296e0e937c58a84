//! Diagnostics over recorded runs: entropy, hallucinated actions, token
//! spend, step counts, success/reward aggregates, failure overlap and the
//! thought-injection probe.

pub mod metrics;
pub mod overlap;
pub mod probe;
pub mod report;

pub use metrics::{
    aggregate, discounted_return, entropy, hallucination_rate, mean_entropy, step_rewards,
    steps_per_episode, tokens_per_step, Aggregate, MetricsError,
};
pub use overlap::{
    brute_force_category, failure_overlap, FailureSubset, OverlapError, OverlapReport,
};
pub use probe::{probe_thought_influence, ProbeError};
pub use report::{
    compute_metrics, failures_by_kind, metrics_csv, overlap_csv, report_markdown, write_report,
    KindMetrics, MetricsReport, ENTROPY_ANCHOR, METRICS_CSV_HEADER, OVERLAP_CSV_HEADER,
    STEPS_ANCHOR,
};
