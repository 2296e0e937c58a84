//! End-to-end subcommand tests against the built binary.

use std::io::Write;
use std::process::{Command, Output, Stdio};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_reflact"))
}

fn run_ok(args: &[&str]) -> Output {
    let output = bin().args(args).output().expect("spawn");
    assert!(
        output.status.success(),
        "reflact {args:?} failed:\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
    output
}

#[test]
fn verify_covers_all_types() {
    let out = run_ok(&["verify", "--seeds", "0..25", "--flavor", "binary"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("checked 150 task(s)"), "{text}");
    assert!(text.contains("0 failure(s)"), "{text}");
}

#[test]
fn gen_writes_versioned_task_files() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&[
        "gen",
        "--seeds",
        "0..3",
        "--types",
        "put,heat",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    let tasks: Vec<_> = std::fs::read_dir(dir.path().join("tasks"))
        .unwrap()
        .collect();
    assert_eq!(tasks.len(), 6);
    let sample = std::fs::read_to_string(dir.path().join("tasks/put-binary-00000.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&sample).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["rng_algorithm"], "chacha12-mod-v1");
    assert!(v["instruction_text"]
        .as_str()
        .unwrap()
        .starts_with("Your task is to: "));
}

#[test]
fn run_analyze_replay_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let out = run_ok(&[
        "run",
        "--seeds",
        "0..10",
        "--types",
        "put",
        "--kinds",
        "react,reflact",
        "--backend",
        "scripted",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("ran 20 episode(s)"), "{text}");
    // Scripted runs make no network connections.
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("network_attempts=0"), "{err}");

    let analyze = run_ok(&[
        "analyze",
        "--in",
        out_dir.to_str().unwrap(),
        "--compare",
        "react,reflact",
        "--anchors",
    ]);
    let text = String::from_utf8_lossy(&analyze.stdout);
    assert!(text.contains("analyzed 20 trajectories"), "{text}");
    let metrics = std::fs::read_to_string(out_dir.join("reports/metrics.csv")).unwrap();
    assert!(
        metrics.starts_with("kind,episodes,success_rate"),
        "{metrics}"
    );
    assert!(std::fs::read_to_string(out_dir.join("reports/overlap.csv"))
        .unwrap()
        .starts_with("category,count,task_ids"));
    let report = std::fs::read_to_string(out_dir.join("reports/report.md")).unwrap();
    assert!(report.contains("paper ref: 1.23 / 0.30"), "{report}");
    assert!(report.contains("paper ref: 21.0 / 18.6 / 16.5"), "{report}");

    // Any stored trajectory replays byte-identically with exit code 0.
    let traj = out_dir.join("trajectories/put-binary-00003__reflact.jsonl");
    let replay = run_ok(&["replay", "--in", traj.to_str().unwrap()]);
    assert!(String::from_utf8_lossy(&replay.stdout).contains("identical"));
}

#[test]
fn analyze_refuses_mixed_hashes_without_force() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    run_ok(&[
        "run",
        "--seeds",
        "0..2",
        "--types",
        "put",
        "--kinds",
        "react",
        "--backend",
        "scripted",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    // Tamper with one header's hash.
    let file = out_dir.join("trajectories/put-binary-00000__react.jsonl");
    let text = std::fs::read_to_string(&file).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let mut header: serde_json::Value = serde_json::from_str(&lines[0]).unwrap();
    header["config_hash"] = serde_json::Value::String("deadbeefdeadbeef".into());
    lines[0] = header.to_string();
    std::fs::write(&file, lines.join("\n") + "\n").unwrap();

    let status = bin()
        .args(["analyze", "--in", out_dir.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(2), "mixed hashes must exit 2");
    let forced = bin()
        .args(["analyze", "--in", out_dir.to_str().unwrap(), "--force"])
        .output()
        .unwrap();
    assert!(forced.status.success());
}

#[test]
fn serve_speaks_the_wire_protocol_over_stdio() {
    let mut child = bin()
        .arg("serve")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    let mut stdin = child.stdin.take().unwrap();
    writeln!(stdin, r#"{{"op":"reset","seed":7,"task_type":"put"}}"#).unwrap();
    writeln!(stdin, r#"{{"op":"step","action":"go to cabinet 1"}}"#).unwrap();
    writeln!(stdin, r#"{{"op":"step","action":"dance wildly"}}"#).unwrap();
    drop(stdin);
    let output = child.wait_with_output().unwrap();
    let lines: Vec<serde_json::Value> = String::from_utf8_lossy(&output.stdout)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0]["observation"]
        .as_str()
        .unwrap()
        .starts_with("You are in the middle of a room."));
    assert_eq!(lines[0]["done"], false);
    assert_eq!(lines[1]["progress"], 0.0);
    assert_eq!(lines[2]["observation"], "Nothing happens.");
}

#[test]
fn play_drives_one_episode_interactively() {
    let mut child = bin()
        .args(["play", "--seed", "1", "--type", "put"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    let mut stdin = child.stdin.take().unwrap();
    write!(stdin, ":valid\n:oracle\ngo to garbagecan 1\n:quit\n").unwrap();
    drop(stdin);
    let output = child.wait_with_output().unwrap();
    assert!(output.status.success());
    let text = String::from_utf8_lossy(&output.stdout);
    assert!(text.contains("Your task is to: "));
    assert!(text.contains("go to cabinet 1"), "{text}");
    assert!(text.contains("[progress "), "{text}");
}

#[test]
fn config_errors_exit_two() {
    let bad_kind = bin()
        .args([
            "run",
            "--seeds",
            "0..1",
            "--types",
            "put",
            "--kinds",
            "mystery",
            "--backend",
            "scripted",
        ])
        .output()
        .unwrap();
    assert_eq!(bad_kind.status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    std::fs::write(&config, r#"{"unknown_field": 1}"#).unwrap();
    let bad_config = bin()
        .args(["run", "--config", config.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(bad_config.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad_config.stderr).contains("unknown_field"));

    // Usage errors (unknown subcommand) exit 2 as well.
    let usage = bin().arg("frobnicate").output().unwrap();
    assert_eq!(usage.status.code(), Some(2));
}

#[test]
fn reflexion_reports_skips_and_trial_success() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_ok(&[
        "reflexion",
        "--seeds",
        "0..2",
        "--types",
        "put",
        "--kinds",
        "reflact",
        "--backend",
        "scripted:fail-then-oracle",
        "--budget",
        "6",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("trial 0: failure"), "{text}");
    assert!(text.contains("trial 1: success"), "{text}");
    assert!(text.contains("trial 2 skipped: already solved"), "{text}");
    assert!(
        text.contains("success rate through trial 1: 1.000"),
        "{text}"
    );
    assert!(dir.path().join("reflexion.json").exists());
}

#[test]
fn serve_accepts_tcp_clients() {
    use std::io::{BufRead, BufReader};
    use std::net::TcpStream;

    let mut child = bin()
        .args(["serve", "--tcp", "127.0.0.1:0"])
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    // The first stderr line announces the resolved address.
    let stderr = child.stderr.take().unwrap();
    let mut line = String::new();
    BufReader::new(stderr).read_line(&mut line).unwrap();
    let addr = line.trim().rsplit(' ').next().unwrap().to_string();

    let mut stream = TcpStream::connect(&addr).unwrap();
    writeln!(stream, r#"{{"op":"reset","seed":3,"task_type":"cool"}}"#).unwrap();
    writeln!(stream, r#"{{"op":"step","action":"look"}}"#).unwrap();
    let mut reader = BufReader::new(stream.try_clone().unwrap());
    let mut response = String::new();
    reader.read_line(&mut response).unwrap();
    let v: serde_json::Value = serde_json::from_str(&response).unwrap();
    assert!(v["observation"].as_str().unwrap().contains("Your task is to: "));
    response.clear();
    reader.read_line(&mut response).unwrap();
    let v: serde_json::Value = serde_json::from_str(&response).unwrap();
    // "look" is a science-flavor extension; binary worlds reject it in-band.
    assert_eq!(v["observation"], "Nothing happens.");

    child.kill().unwrap();
    let _ = child.wait();
}
