//! Operator surface: task generation, suite runs, Reflexion runs, replay
//! auditing, analysis, the environment service, and a terminal REPL.

mod commands;
mod config;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "reflact",
    about = "Deterministic text-world lab for LLM-agent reasoning backbones",
    long_about = None,
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, clap::Args)]
struct SelectionArgs {
    /// Seed range, half-open: "0..100".
    #[arg(long)]
    seeds: Option<String>,
    /// Comma-separated task types: put,clean,heat,cool,examine,puttwo.
    #[arg(long, value_delimiter = ',')]
    types: Option<Vec<String>>,
    /// Goal flavor: binary (household) or dense (science).
    #[arg(long)]
    flavor: Option<String>,
}

#[derive(Debug, Clone, clap::Args)]
struct RunArgs {
    #[command(flatten)]
    selection: SelectionArgs,
    /// Comma-separated backbones: nothinking,react,planandact,reflact,
    /// stateonly,goalonly,stategoal,stategoalthought.
    #[arg(long, value_delimiter = ',')]
    kinds: Option<Vec<String>>,
    /// Backend: "scripted[:policy]", "live", or "replay:<path>".
    #[arg(long)]
    backend: Option<String>,
    /// Live model name (with --backend live).
    #[arg(long)]
    model: Option<String>,
    /// JSON config file; flags override it.
    #[arg(long)]
    config: Option<std::path::PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    budget: Option<u32>,
    #[arg(long)]
    parallel: Option<u32>,
    #[arg(long)]
    gamma: Option<f64>,
    /// Score valid-action candidates before every action turn.
    #[arg(long)]
    record_distributions: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Generate task files from seeds.
    Gen {
        #[command(flatten)]
        selection: SelectionArgs,
        #[arg(long)]
        out: String,
    },
    /// Run a suite: tasks x backbones under one backend.
    Run {
        #[command(flatten)]
        args: RunArgs,
    },
    /// Run the multi-trial protocol over a suite.
    Reflexion {
        #[command(flatten)]
        args: RunArgs,
        #[arg(long, default_value_t = 3)]
        trials: u32,
    },
    /// Re-execute a stored trajectory and diff it against the log.
    Replay {
        /// Trajectory JSONL file.
        #[arg(long = "in")]
        input: std::path::PathBuf,
        /// Write the re-executed log here as well.
        #[arg(long)]
        out: Option<std::path::PathBuf>,
    },
    /// Compute metrics and failure overlap from stored results.
    Analyze {
        /// Directory with manifest.json and trajectory files.
        #[arg(long = "in")]
        input: std::path::PathBuf,
        /// Restrict the comparison to these kinds.
        #[arg(long, value_delimiter = ',')]
        compare: Option<Vec<String>>,
        #[arg(long)]
        out: Option<std::path::PathBuf>,
        /// Accept inputs with mixed config hashes.
        #[arg(long)]
        force: bool,
        /// Include the reference-anchor section in report.md.
        #[arg(long)]
        anchors: bool,
    },
    /// Score candidate actions under injected thought variants.
    Probe {
        /// Source trajectory JSONL file.
        #[arg(long)]
        traj: std::path::PathBuf,
        /// Step (1-based) whose context is probed.
        #[arg(long, default_value_t = 1)]
        step: u32,
        /// Thought variants; repeat the flag. An empty string probes the
        /// unmodified context.
        #[arg(long = "thought")]
        thoughts: Vec<String>,
        /// Backend: "scripted:probe" (default) or "live".
        #[arg(long)]
        backend: Option<String>,
        #[arg(long)]
        model: Option<String>,
        #[arg(long)]
        config: Option<std::path::PathBuf>,
    },
    /// Serve the environment over newline-delimited JSON.
    Serve {
        /// Listen on a TCP address (e.g. 127.0.0.1:7700) instead of stdio.
        #[arg(long)]
        tcp: Option<String>,
    },
    /// Interactive terminal session against one generated task.
    Play {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long = "type", default_value = "put")]
        task_type: String,
        #[arg(long, default_value = "binary")]
        flavor: String,
    },
    /// Generate, solve and replay seed ranges; report any failures.
    Verify {
        #[command(flatten)]
        selection: SelectionArgs,
    },
}

fn main() -> std::process::ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen { selection, out } => commands::gen(selection, out),
        Command::Run { args } => commands::run(args),
        Command::Reflexion { args, trials } => commands::reflexion(args, trials),
        Command::Replay { input, out } => commands::replay(input, out),
        Command::Analyze {
            input,
            compare,
            out,
            force,
            anchors,
        } => commands::analyze(input, compare, out, force, anchors),
        Command::Probe {
            traj,
            step,
            thoughts,
            backend,
            model,
            config,
        } => commands::probe(traj, step, thoughts, backend, model, config),
        Command::Serve { tcp } => commands::serve(tcp),
        Command::Play {
            seed,
            task_type,
            flavor,
        } => commands::play(seed, task_type, flavor),
        Command::Verify { selection } => commands::verify(selection),
    };
    match result {
        Ok(code) => std::process::ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::ExitCode::from(1)
        }
    }
}
