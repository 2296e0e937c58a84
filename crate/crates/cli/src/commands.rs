//! Subcommand implementations. Exit codes: 0 success, 1 task failures,
//! 2 configuration errors.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, Context as _, Result};

use reflact_core::analytics::{
    compute_metrics, entropy, failure_overlap, failures_by_kind, probe_thought_influence,
    write_report,
};
use reflact_core::backbones::{Backbone, BackboneKind, Context, HistoryEntry};
use reflact_core::gateway::{
    network_attempts, BackendKind, PolicyBackend, ScriptedBackend, ScriptedPolicy,
};
use reflact_core::runner::{
    initial_observation, read_trajectory_file, replay_stored, run_reflexion, run_suite,
    suite_config_hash, trajectory_to_jsonl, BackendFactory, RunConfig,
};
use reflact_core::serve::EnvSession;
use reflact_core::taskgen::{generate, oracle_solve, verify_solvable, TaskSpec};
use reflact_core::world::goal::{evaluate_goal, ProgressReport, TaskType};
use reflact_core::world::state::EnvFlavor;
use reflact_core::world::{parse_action, step, step_rejected, valid_actions};

use crate::config::{parse_seed_range, CliConfig};
use crate::{RunArgs, SelectionArgs};

const EXIT_OK: u8 = 0;
const EXIT_TASK: u8 = 1;
const EXIT_CONFIG: u8 = 2;

fn config_err(message: impl std::fmt::Display) -> Result<u8> {
    eprintln!("config error: {message}");
    Ok(EXIT_CONFIG)
}

fn parse_flavor(text: &str) -> Result<EnvFlavor> {
    EnvFlavor::from_goal_label(text)
        .or(match text {
            "household" => Some(EnvFlavor::Household),
            "science" => Some(EnvFlavor::Science),
            _ => None,
        })
        .ok_or_else(|| anyhow!("unknown flavor {text:?}; expected binary or dense"))
}

fn parse_types(labels: &[String]) -> Result<Vec<TaskType>> {
    labels
        .iter()
        .map(|l| TaskType::from_label(l).ok_or_else(|| anyhow!("unknown task type {l:?}")))
        .collect()
}

fn parse_kinds(labels: &[String], overrides: &BTreeMap<String, String>) -> Result<Vec<Backbone>> {
    labels
        .iter()
        .map(|l| {
            let kind = BackboneKind::from_label(l)
                .ok_or_else(|| anyhow!("unknown backbone kind {l:?}"))?;
            let mut backbone = Backbone::new(kind);
            if let Some(path) = overrides.get(kind.label()) {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("cannot read instruction override {path}"))?;
                backbone.instruction_override = Some(text.trim_end().to_string());
            }
            Ok(backbone)
        })
        .collect()
}

fn parse_backend_flag(text: &str, model: Option<&str>) -> Result<BackendKind> {
    if let Some(rest) = text.strip_prefix("replay:") {
        return Ok(BackendKind::Replay {
            log_path: rest.to_string(),
        });
    }
    if text == "live" {
        let base_url = std::env::var(reflact_core::gateway::BASE_URL_ENV)
            .map_err(|_| anyhow!("live backend needs {}", reflact_core::gateway::BASE_URL_ENV))?;
        return Ok(BackendKind::Live {
            base_url,
            model_name: model.unwrap_or("default").to_string(),
            temperature: 0.0,
            max_tokens: 256,
            logprob_mode: Default::default(),
            requests_per_second: None,
            timeout_secs: None,
        });
    }
    let policy = match text {
        "scripted" => ScriptedPolicy::Oracle,
        other => match other
            .strip_prefix("scripted:")
            .and_then(ScriptedPolicy::from_label)
        {
            Some(p) => p,
            None => return Err(anyhow!("unknown backend {text:?}")),
        },
    };
    Ok(BackendKind::Scripted { policy })
}

struct Resolved {
    tasks: Vec<TaskSpec>,
    kinds: Vec<Backbone>,
    factory: BackendFactory,
    run: RunConfig,
    out_dir: Option<PathBuf>,
}

fn resolve(args: &RunArgs) -> Result<Resolved> {
    let mut config = match &args.config {
        Some(path) => CliConfig::load(path)?,
        None => CliConfig::default(),
    };
    if let Some(seeds) = &args.selection.seeds {
        config.suite.seeds = seeds.clone();
    }
    if let Some(types) = &args.selection.types {
        config.suite.task_types = types.clone();
    }
    if let Some(flavor) = &args.selection.flavor {
        config.suite.flavor = flavor.clone();
    }
    if let Some(kinds) = &args.kinds {
        config.suite.kinds = kinds.clone();
    }
    if let Some(backend) = &args.backend {
        config.backend = Some(parse_backend_flag(backend, args.model.as_deref())?);
    }
    if let Some(out) = &args.out {
        config.out_dir = Some(out.clone());
    }
    if let Some(budget) = args.budget {
        config.run.step_budget = budget;
    }
    if let Some(parallel) = args.parallel {
        config.run.parallel_episodes = parallel;
    }
    if let Some(gamma) = args.gamma {
        config.run.gamma = gamma;
    }
    if args.record_distributions {
        config.run.record_distributions = true;
    }
    let config = config.finalize()?;

    let flavor = parse_flavor(&config.suite.flavor)?;
    let types = parse_types(&config.suite.task_types)?;
    if types.is_empty() {
        return Err(anyhow!("no task types selected"));
    }
    let kinds = parse_kinds(&config.suite.kinds, &config.instruction_overrides)?;
    if kinds.is_empty() {
        return Err(anyhow!("no backbone kinds selected"));
    }
    let seeds = parse_seed_range(&config.suite.seeds)?;
    let mut tasks = Vec::new();
    for seed in seeds {
        for &ty in &types {
            tasks.push(generate(seed, ty, flavor)?);
        }
    }
    let backend = config
        .backend
        .clone()
        .unwrap_or_else(BackendKind::scripted_oracle);
    Ok(Resolved {
        tasks,
        kinds,
        factory: BackendFactory::new(backend),
        run: config.run,
        out_dir: config.out_dir.as_ref().map(PathBuf::from),
    })
}

pub fn gen(selection: SelectionArgs, out: String) -> Result<u8> {
    let flavor = parse_flavor(selection.flavor.as_deref().unwrap_or("binary"))?;
    let types = parse_types(&selection.types.unwrap_or_else(|| vec!["put".to_string()]))?;
    let seeds = parse_seed_range(selection.seeds.as_deref().unwrap_or("0..10"))?;
    let dir = Path::new(&out).join("tasks");
    std::fs::create_dir_all(&dir)?;
    let mut count = 0usize;
    for seed in seeds {
        for &ty in &types {
            let task = generate(seed, ty, flavor)?;
            std::fs::write(dir.join(format!("{}.json", task.task_id)), task.to_json())?;
            count += 1;
        }
    }
    println!("wrote {count} task file(s) under {}", dir.display());
    Ok(EXIT_OK)
}

pub fn run(args: RunArgs) -> Result<u8> {
    let resolved = match resolve(&args) {
        Ok(r) => r,
        Err(e) => return config_err(e),
    };
    let net_before = network_attempts();
    let started = Instant::now();
    let traj_dir = resolved.out_dir.as_ref().map(|d| d.join("trajectories"));
    let output = run_suite(
        &resolved.tasks,
        &resolved.kinds,
        &resolved.factory,
        &resolved.run,
        traj_dir.as_deref(),
    )?;
    let elapsed = started.elapsed();
    println!(
        "ran {} episode(s) in {:.2}s (backend {}, config {})",
        output.result_set.episodes.len(),
        elapsed.as_secs_f64(),
        output.result_set.backend,
        output.result_set.config_hash,
    );
    for (kind, agg) in &output.result_set.aggregates {
        println!(
            "  {kind}: episodes {}, success rate {:.3}, average reward {:.3}",
            agg.episodes, agg.success_rate, agg.average_reward
        );
    }
    eprintln!("network_attempts={}", network_attempts() - net_before);
    if let Some(dir) = &traj_dir {
        println!("trajectories and manifest under {}", dir.display());
    }
    Ok(EXIT_OK)
}

pub fn reflexion(args: RunArgs, trials: u32) -> Result<u8> {
    let resolved = match resolve(&args) {
        Ok(r) => r,
        Err(e) => return config_err(e),
    };
    if trials < 1 {
        return config_err("trials must be at least 1");
    }
    let hash = suite_config_hash(&resolved.run, &resolved.factory.descriptor());
    let traj_dir = resolved.out_dir.as_ref().map(|d| d.join("trajectories"));
    if let Some(dir) = &traj_dir {
        std::fs::create_dir_all(dir)?;
    }

    let mut per_trial_success = vec![0usize; trials as usize];
    let mut outcomes = Vec::new();
    for task in &resolved.tasks {
        for backbone in &resolved.kinds {
            let outcome = run_reflexion(task, backbone, &resolved.factory, &resolved.run, trials)?;
            for trial in &outcome.trials {
                if trial.skipped {
                    println!(
                        "{} [{}] trial {} skipped: already solved",
                        task.task_id,
                        backbone.kind.label(),
                        trial.trial_index
                    );
                    continue;
                }
                let traj = trial
                    .trajectory
                    .as_ref()
                    .expect("unskipped trial has a trajectory");
                println!(
                    "{} [{}] trial {}: {}",
                    task.task_id,
                    backbone.kind.label(),
                    trial.trial_index,
                    if traj.success { "success" } else { "failure" }
                );
                if let Some(dir) = &traj_dir {
                    let file = format!(
                        "{}__{}__trial{}.jsonl",
                        task.task_id,
                        backbone.kind.label(),
                        trial.trial_index
                    );
                    std::fs::write(
                        dir.join(file),
                        trajectory_to_jsonl(task, &resolved.run, &hash, traj),
                    )?;
                }
            }
            if let Some(solved) = outcome.solved_at() {
                for wins in per_trial_success.iter_mut().skip(solved as usize) {
                    *wins += 1;
                }
            }
            outcomes.push(outcome);
        }
    }

    let total = resolved.tasks.len() * resolved.kinds.len();
    for (i, wins) in per_trial_success.iter().enumerate() {
        println!(
            "success rate through trial {i}: {:.3} ({wins}/{total})",
            *wins as f64 / total as f64
        );
    }
    if let Some(dir) = &resolved.out_dir {
        std::fs::create_dir_all(dir)?;
        let summary = serde_json::json!({
            "schema_version": 1,
            "config_hash": hash,
            "trials": trials,
            "per_trial_success": per_trial_success,
            "episodes": total,
            "outcomes": outcomes,
        });
        std::fs::write(
            dir.join("reflexion.json"),
            serde_json::to_string_pretty(&summary)?,
        )?;
    }
    Ok(EXIT_OK)
}

pub fn replay(input: PathBuf, out: Option<PathBuf>) -> Result<u8> {
    let original = std::fs::read_to_string(&input)
        .with_context(|| format!("cannot read {}", input.display()))?;
    let stored = reflact_core::runner::parse_trajectory_jsonl(&original)?;
    let replayed = replay_stored(&stored)?;
    if let Some(out) = out {
        std::fs::write(&out, &replayed)?;
    }
    if replayed == original {
        println!(
            "identical: replay reproduced {} byte-for-byte",
            input.display()
        );
        Ok(EXIT_OK)
    } else {
        println!(
            "divergent: replay of {} does not match the stored log",
            input.display()
        );
        Ok(EXIT_TASK)
    }
}

pub fn analyze(
    input: PathBuf,
    compare: Option<Vec<String>>,
    out: Option<PathBuf>,
    force: bool,
    anchors: bool,
) -> Result<u8> {
    let traj_dir = if input.join("manifest.json").exists() {
        input.clone()
    } else {
        input.join("trajectories")
    };
    let manifest = reflact_core::runner::read_manifest(&traj_dir)?;

    let mut trajectories = Vec::new();
    let mut flavor = None;
    for episode in &manifest.episodes {
        let file = episode
            .file
            .as_ref()
            .ok_or_else(|| anyhow!("manifest entry {} has no file", episode.task_id))?;
        let stored = read_trajectory_file(&traj_dir.join(file))?;
        if stored.header.config_hash != manifest.config_hash && !force {
            return config_err(format!(
                "mixed config hashes: {} in {} vs {} in manifest (rerun or pass --force)",
                stored.header.config_hash, file, manifest.config_hash
            ));
        }
        flavor.get_or_insert(stored.header.task.flavor);
        trajectories.push(stored.trajectory);
    }
    if trajectories.is_empty() {
        return config_err("no trajectories to analyze");
    }

    let kinds: Vec<BackboneKind> = match &compare {
        Some(labels) => labels
            .iter()
            .map(|l| BackboneKind::from_label(l).ok_or_else(|| anyhow!("unknown kind {l:?}")))
            .collect::<Result<_>>()?,
        None => {
            let mut present: Vec<BackboneKind> = Vec::new();
            for t in &trajectories {
                if !present.contains(&t.backbone) {
                    present.push(t.backbone);
                }
            }
            present.sort_by_key(|k| k.label());
            present
        }
    };

    let metrics = compute_metrics(
        &trajectories,
        &kinds,
        flavor.expect("at least one trajectory"),
        &manifest.config_hash,
    )?;
    let selected: Vec<_> = trajectories
        .iter()
        .filter(|t| kinds.contains(&t.backbone))
        .cloned()
        .collect();
    let (universe, failed) = failures_by_kind(&selected);
    let overlap = if kinds.len() >= 2 {
        Some(failure_overlap(&universe, &failed)?)
    } else {
        None
    };

    let out_dir = out.unwrap_or_else(|| input.join("reports"));
    write_report(&out_dir, &metrics, overlap.as_ref(), anchors)?;
    println!(
        "analyzed {} trajectories across {} kind(s); reports under {}",
        trajectories.len(),
        kinds.len(),
        out_dir.display()
    );
    for k in &metrics.per_kind {
        println!(
            "  {}: SR {:.3}, AR {:.3}, hallucination {:.3}, steps/episode {:.2}",
            k.kind, k.success_rate, k.average_reward, k.hallucination_rate, k.steps_per_episode
        );
    }
    Ok(EXIT_OK)
}

pub fn probe(
    traj: PathBuf,
    step_index: u32,
    thoughts: Vec<String>,
    backend: Option<String>,
    model: Option<String>,
    config: Option<PathBuf>,
) -> Result<u8> {
    let stored = read_trajectory_file(&traj)?;
    let task = &stored.header.task;
    if step_index < 1 {
        return config_err("step is 1-based");
    }

    // Rebuild the world and context up to the probed step.
    let mut state = task.initial_state.clone();
    let mut ctx = Context::new(
        task.instruction_text.clone(),
        task.env_flavor(),
        task.task_type,
        initial_observation(task),
    );
    for record in stored.trajectory.steps.iter().take(step_index as usize - 1) {
        state = match &record.parsed {
            Some(cmd) => step(state, cmd).0,
            None => step_rejected(state).0,
        };
        ctx.push_turn(HistoryEntry {
            reasoning_text: record.reasoning_text.clone(),
            action_text: record.action_text.clone(),
            raw_output: record.raw_output.clone(),
            observation_text: record.observation_text.clone(),
        });
    }
    let candidates: Vec<String> = valid_actions(&state).iter().map(|c| c.render()).collect();
    if candidates.is_empty() {
        return config_err("no valid actions at the probed step");
    }

    let variants: Vec<String> = if thoughts.is_empty() {
        vec![String::new()]
    } else {
        thoughts
    };
    let backbone = Backbone::new(stored.header.kind);

    let mut boxed: Box<dyn PolicyBackend> = match backend.as_deref() {
        None | Some("scripted:probe") | Some("scripted") => {
            let mut b = ScriptedBackend::new(task, stored.header.kind, ScriptedPolicy::Probe, 0)?;
            b.fast_forward(step_index);
            Box::new(b)
        }
        Some("live") => {
            let cli_config = match config {
                Some(path) => CliConfig::load(&path)?,
                None => CliConfig::default(),
            };
            let kind = match cli_config.backend {
                Some(k @ BackendKind::Live { .. }) => k,
                _ => parse_backend_flag("live", model.as_deref())?,
            };
            BackendFactory::new(kind).build(task, stored.header.kind, 0)?
        }
        Some(other) => return config_err(format!("unknown probe backend {other:?}")),
    };

    let distributions =
        probe_thought_influence(&backbone, &ctx, &variants, boxed.as_mut(), &candidates)?;
    println!("variant,thought,entropy_nats,top_action,top_probability");
    for (variant, dist) in variants.iter().zip(&distributions) {
        let h = entropy(dist)?;
        let top = dist
            .entries
            .iter()
            .max_by(|a, b| a.probability.total_cmp(&b.probability))
            .expect("non-empty distribution");
        println!(
            "{},{:?},{h:.4},{:?},{:.4}",
            if variant.is_empty() {
                "empty"
            } else {
                "injected"
            },
            variant,
            top.action_text,
            top.probability
        );
    }
    Ok(EXIT_OK)
}

pub fn serve(tcp: Option<String>) -> Result<u8> {
    match tcp {
        None => {
            let stdin = std::io::stdin();
            let stdout = std::io::stdout();
            let mut session = EnvSession::new();
            for line in stdin.lock().lines() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let response = session.handle_line(&line);
                let mut out = stdout.lock();
                writeln!(out, "{response}")?;
                out.flush()?;
            }
            Ok(EXIT_OK)
        }
        Some(addr) => {
            let listener = std::net::TcpListener::bind(&addr)
                .with_context(|| format!("cannot bind {addr}"))?;
            // Resolved address, so ":0" picks a free port usefully.
            eprintln!("serving environment on {}", listener.local_addr()?);
            for stream in listener.incoming() {
                let stream = stream?;
                std::thread::spawn(move || {
                    let mut session = EnvSession::new();
                    let reader = std::io::BufReader::new(stream.try_clone().expect("clone"));
                    let mut writer = stream;
                    for line in reader.lines() {
                        let Ok(line) = line else { break };
                        if line.trim().is_empty() {
                            continue;
                        }
                        let response = session.handle_line(&line);
                        if writeln!(writer, "{response}").is_err() {
                            break;
                        }
                    }
                });
            }
            Ok(EXIT_OK)
        }
    }
}

pub fn play(seed: u64, task_type: String, flavor: String) -> Result<u8> {
    let Some(ty) = TaskType::from_label(&task_type) else {
        return config_err(format!("unknown task type {task_type:?}"));
    };
    let flavor = parse_flavor(&flavor)?;
    let task = generate(seed, ty, flavor)?;
    let mut state = task.initial_state.clone();
    let mut progress = ProgressReport::zero();

    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    // A closed pipe just ends the session.
    macro_rules! say {
        ($($arg:tt)*) => {
            if writeln!(out, $($arg)*).is_err() {
                return Ok(EXIT_OK);
            }
        };
    }
    say!("{}", initial_observation(&task));
    say!("(:valid lists actions, :oracle prints the solver's plan, :quit exits)");
    let stdin = std::io::stdin();
    let mut announced = false;
    loop {
        if write!(out, "> ").is_err() || out.flush().is_err() {
            break;
        }
        let mut line = String::new();
        if stdin.lock().read_line(&mut line)? == 0 {
            break;
        }
        let line = line.trim();
        match line {
            "" => continue,
            ":quit" | ":q" => break,
            ":valid" => {
                for cmd in valid_actions(&state) {
                    say!("  {}", cmd.render());
                }
            }
            ":oracle" => match oracle_solve(&task) {
                Ok(plan) => {
                    for text in plan.action_texts() {
                        say!("  {text}");
                    }
                }
                Err(e) => say!("  oracle failed: {e}"),
            },
            action => {
                let (next, obs) = match parse_action(action) {
                    Ok(cmd) => step(state, &cmd),
                    Err(_) => step_rejected(state),
                };
                state = next;
                progress = evaluate_goal(&state, &task.goal, &progress);
                say!("{}", obs.text);
                say!("[progress {:.3}]", progress.progress);
                if progress.success && !announced {
                    say!("Task complete!");
                    announced = true;
                }
            }
        }
    }
    Ok(EXIT_OK)
}

pub fn verify(selection: SelectionArgs) -> Result<u8> {
    let flavor = parse_flavor(selection.flavor.as_deref().unwrap_or("binary"))?;
    let types = match &selection.types {
        Some(labels) => parse_types(labels)?,
        None => TaskType::ALL.to_vec(),
    };
    let seeds = parse_seed_range(selection.seeds.as_deref().unwrap_or("0..1000"))?;
    let started = Instant::now();
    let report = verify_solvable(seeds, &types, flavor);
    let elapsed = started.elapsed();
    println!(
        "checked {} task(s) in {:.2}s: {} failure(s)",
        report.checked,
        elapsed.as_secs_f64(),
        report.failures.len()
    );
    for failure in &report.failures {
        println!(
            "  seed {} {} ({:?}): {}",
            failure.seed,
            failure.task_type.label(),
            failure.flavor,
            failure.reason
        );
    }
    Ok(if report.all_solvable() {
        EXIT_OK
    } else {
        EXIT_TASK
    })
}
