//! Analytics over real runs: the thought-injection probe, report files and
//! aggregate recomputability.

use reflact_core::analytics::{
    compute_metrics, entropy, failure_overlap, failures_by_kind, metrics_csv, overlap_csv,
    probe_thought_influence, report_markdown, write_report,
};
use reflact_core::backbones::{Backbone, BackboneKind, Context};
use reflact_core::gateway::{BackendKind, ScriptedBackend, ScriptedPolicy};
use reflact_core::runner::{initial_observation, run_suite, BackendFactory, RunConfig};
use reflact_core::taskgen::{generate, oracle_solve};
use reflact_core::world::goal::{GoalFlavor, TaskType};
use reflact_core::world::state::EnvFlavor;
use reflact_core::world::valid_actions;

#[test]
fn probe_identity_and_sharpening() {
    let task = generate(3, TaskType::Put, EnvFlavor::Household).unwrap();
    let oracle_action = oracle_solve(&task).unwrap().actions[0].render();
    let candidates: Vec<String> = valid_actions(&task.initial_state)
        .iter()
        .map(|c| c.render())
        .collect();
    assert!(candidates.contains(&oracle_action));

    let ctx = Context::new(
        task.instruction_text.clone(),
        task.env_flavor(),
        task.task_type,
        initial_observation(&task),
    );
    let backbone = Backbone::new(BackboneKind::ReflAct);
    let mut backend =
        ScriptedBackend::new(&task, BackboneKind::ReflAct, ScriptedPolicy::Probe, 0).unwrap();
    let variants = vec![
        String::new(),
        format!("Currently, I should {oracle_action} to make progress."),
        "The moon is made of cheese.".to_string(),
    ];
    let dists =
        probe_thought_influence(&backbone, &ctx, &variants, &mut backend, &candidates).unwrap();
    assert_eq!(dists.len(), 3);

    // Empty variant: the base distribution unchanged (uniform for the probe
    // policy).
    let base_h = entropy(&dists[0]).unwrap();
    assert!((base_h - (candidates.len() as f64).ln()).abs() < 1e-9);

    // Matching thought sharpens to one-hot: entropy strictly decreases.
    let sharp_h = entropy(&dists[1]).unwrap();
    assert_eq!(sharp_h, 0.0);
    assert!(sharp_h < base_h);

    // An unrelated thought leaves the distribution at base.
    let junk_h = entropy(&dists[2]).unwrap();
    assert!((junk_h - base_h).abs() < 1e-9);
}

#[test]
fn reports_are_deterministic_and_recomputable() {
    let tasks: Vec<_> = (0..6)
        .map(|seed| generate(seed, TaskType::ALL[seed as usize % 6], EnvFlavor::Household).unwrap())
        .collect();
    let kinds = vec![
        Backbone::new(BackboneKind::NoThinking),
        Backbone::new(BackboneKind::ReflAct),
    ];
    let factory = BackendFactory::new(BackendKind::scripted_oracle());
    let cfg = RunConfig::default();
    let output = run_suite(&tasks, &kinds, &factory, &cfg, None).unwrap();

    let metrics = compute_metrics(
        &output.trajectories,
        &[BackboneKind::NoThinking, BackboneKind::ReflAct],
        GoalFlavor::Binary,
        &output.result_set.config_hash,
    )
    .unwrap();

    // Success rate recomputed from raw trajectories equals the stored value.
    for k in &metrics.per_kind {
        assert_eq!(
            k.success_rate,
            output.result_set.aggregates[&k.kind].success_rate
        );
        assert_eq!(
            k.average_reward,
            output.result_set.aggregates[&k.kind].average_reward
        );
    }

    let csv = metrics_csv(&metrics);
    assert!(csv.starts_with(
        "kind,episodes,success_rate,average_reward,mean_entropy,hallucination_rate,tokens_per_step,steps_per_episode,approx_flags\n"
    ));
    assert_eq!(csv.lines().count(), 3, "header plus one row per kind");

    let (universe, failed) = failures_by_kind(&output.trajectories);
    let overlap = failure_overlap(&universe, &failed).unwrap();
    let md = report_markdown(&metrics, Some(&overlap), true);
    assert!(md.contains("paper ref: 1.23 / 0.30"));
    assert!(md.contains("paper ref: 21.0 / 18.6 / 16.5"));

    // Writing twice yields byte-identical files.
    let dir = tempfile::tempdir().unwrap();
    write_report(dir.path(), &metrics, Some(&overlap), true).unwrap();
    let first = (
        std::fs::read(dir.path().join("metrics.csv")).unwrap(),
        std::fs::read(dir.path().join("overlap.csv")).unwrap(),
        std::fs::read(dir.path().join("report.md")).unwrap(),
    );
    write_report(dir.path(), &metrics, Some(&overlap), true).unwrap();
    let second = (
        std::fs::read(dir.path().join("metrics.csv")).unwrap(),
        std::fs::read(dir.path().join("overlap.csv")).unwrap(),
        std::fs::read(dir.path().join("report.md")).unwrap(),
    );
    assert_eq!(first, second);
    assert_eq!(
        overlap_csv(&overlap).lines().next().unwrap(),
        "category,count,task_ids"
    );
}
