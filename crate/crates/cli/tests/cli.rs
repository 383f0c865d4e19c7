//! End-to-end tests of the `pbso` binary: the parse/score/returns pipeline,
//! training and comparison runs, the gradient check, and the determinism
//! acceptance criterion (C9): two `train` runs with identical seed and
//! config produce byte-identical metrics logs.

use std::path::Path;
use std::process::{Command, Output};

fn pbso() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pbso"))
}

fn run_ok(cmd: &mut Command) -> Output {
    let out = cmd.output().expect("spawn pbso");
    assert!(
        out.status.success(),
        "command failed\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

const SMALL_CONFIG: &str = "\
steps = 25
tasks_per_batch = 6
group_size = 4
n_train_tasks = 12
n_holdout_tasks = 4
eval_episodes = 16
seed = 7
";

fn write_config(dir: &Path, extra: &str) -> std::path::PathBuf {
    let path = dir.join("run.toml");
    std::fs::write(&path, format!("{SMALL_CONFIG}{extra}")).unwrap();
    path
}

#[test]
fn c9_train_is_byte_deterministic() {
    let started = std::time::Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "");
    for run in ["a", "b"] {
        run_ok(pbso()
            .arg("train")
            .arg("--config")
            .arg(&config)
            .arg("--out-dir")
            .arg(dir.path().join(run)));
    }
    let a = std::fs::read(dir.path().join("a/metrics.jsonl")).unwrap();
    let b = std::fs::read(dir.path().join("b/metrics.jsonl")).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, b, "metrics logs differ between identical runs");
    let pa = std::fs::read(dir.path().join("a/policy.json")).unwrap();
    let pb = std::fs::read(dir.path().join("b/policy.json")).unwrap();
    assert_eq!(pa, pb, "saved policies differ between identical runs");
    println!(
        "ACCEPTANCE C9 (byte-identical metrics across reruns): PASS in {:.2}s",
        started.elapsed().as_secs_f64()
    );
}

#[test]
fn parse_score_returns_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let transcript = "\
<think>
<round>
```
a b
```
second symbol is off
Incorrect
</round>
<round>
```
a c
```
fb ok ok
Correct
</round>
</think>
```
a c
```
";
    let tpath = dir.path().join("episode-1.txt");
    std::fs::write(&tpath, transcript).unwrap();

    let traj_path = dir.path().join("traj.jsonl");
    run_ok(pbso().arg("parse").arg(&tpath).arg("-o").arg(&traj_path));
    let line = std::fs::read_to_string(&traj_path).unwrap();
    let record: serde_json::Value = serde_json::from_str(line.lines().next().unwrap()).unwrap();
    assert_eq!(record["question_id"], "episode-1");
    assert_eq!(record["iterations"].as_array().unwrap().len(), 2);
    assert_eq!(record["iterations"][0]["verdict"], "Incorrect");
    assert_eq!(record["final_statement"], "a c");

    // oracle scoring: target matches the final statement
    let targets = dir.path().join("targets.json");
    std::fs::write(
        &targets,
        serde_json::json!({ "alphabet": "abcd", "targets": { "episode-1": "a c" } }).to_string(),
    )
    .unwrap();
    let rewards_path = dir.path().join("rewards.jsonl");
    run_ok(pbso()
        .arg("score")
        .arg("--backend")
        .arg("oracle")
        .arg("--targets")
        .arg(&targets)
        .arg("-i")
        .arg(&traj_path)
        .arg("-o")
        .arg(&rewards_path));
    let reward: serde_json::Value =
        serde_json::from_str(std::fs::read_to_string(&rewards_path).unwrap().lines().next().unwrap())
            .unwrap();
    assert_eq!(reward["aux"], serde_json::json!([1, 1]));
    assert_eq!(reward["task"], 1);

    // returns with gamma 0.5 over [0, 1]: [1, 0.75?]... positions are
    // aux [1,1], task 1: G3=1, G2=min(1+0.5,1)=1, G1=1
    let returns_path = dir.path().join("returns.jsonl");
    run_ok(pbso()
        .arg("returns")
        .arg("--gamma")
        .arg("0.5")
        .arg("-i")
        .arg(&rewards_path)
        .arg("-o")
        .arg(&returns_path));
    let out: serde_json::Value =
        serde_json::from_str(std::fs::read_to_string(&returns_path).unwrap().lines().next().unwrap())
            .unwrap();
    assert_eq!(out["returns"], serde_json::json!([1.0, 1.0, 1.0]));
    assert_eq!(out["degenerate"], true);
    assert_eq!(out["advantages"], serde_json::json!([0.0, 0.0, 0.0]));
}

#[test]
fn score_with_mock_fixtures_and_grouped_returns() {
    let dir = tempfile::tempdir().unwrap();
    // two trajectories for one question, distinct outcomes
    let records = [
        serde_json::json!({
            "question_id": "q1",
            "iterations": [
                {"index": 1, "statement": "x", "critique": "", "verdict": "Incorrect"}
            ],
            "final_statement": "x"
        }),
        serde_json::json!({
            "question_id": "q1",
            "iterations": [
                {"index": 1, "statement": "y", "critique": "", "verdict": "Correct"}
            ],
            "final_statement": "y"
        }),
    ];
    let traj_path = dir.path().join("traj.jsonl");
    std::fs::write(
        &traj_path,
        records.iter().map(|r| r.to_string()).collect::<Vec<_>>().join("\n") + "\n",
    )
    .unwrap();

    let fixtures = dir.path().join("fixtures.json");
    std::fs::write(
        &fixtures,
        serde_json::json!({
            "default_pass": true,
            "consistency": [ {"question_id": "q1", "statement": "x", "pass": false} ],
            "critique": [ {"question_id": "q1", "statement": "y", "pass": false} ],
        })
        .to_string(),
    )
    .unwrap();
    let rewards_path = dir.path().join("rewards.jsonl");
    run_ok(pbso()
        .arg("score")
        .arg("--backend")
        .arg("mock")
        .arg("--fixtures")
        .arg(&fixtures)
        .arg("-i")
        .arg(&traj_path)
        .arg("-o")
        .arg(&rewards_path));
    let lines: Vec<serde_json::Value> = std::fs::read_to_string(&rewards_path)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines[0]["aux"], serde_json::json!([1]));
    assert_eq!(lines[0]["task"], 0, "consistency fixture fails statement x");
    assert_eq!(lines[1]["aux"], serde_json::json!([0]), "critique fixture fails statement y");
    assert_eq!(lines[1]["task"], 1);

    // grouped advantages: both records share q1's normalization pool
    let returns_path = dir.path().join("returns.jsonl");
    run_ok(pbso().arg("returns").arg("-i").arg(&rewards_path).arg("-o").arg(&returns_path));
    let outs: Vec<serde_json::Value> = std::fs::read_to_string(&returns_path)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(outs.len(), 2);
    assert_eq!(outs[0]["degenerate"], false);
    let flat: Vec<f64> = outs
        .iter()
        .flat_map(|o| o["advantages"].as_array().unwrap().clone())
        .map(|v| v.as_f64().unwrap())
        .collect();
    let mean: f64 = flat.iter().sum::<f64>() / flat.len() as f64;
    assert!(mean.abs() < 1e-9, "pooled advantages mean {mean}");
}

#[test]
fn train_zero_steps_and_env_var_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "");
    let out_dir = dir.path().join("zero");
    let out = run_ok(pbso()
        .arg("train")
        .arg("--steps")
        .arg("0")
        .arg("--out-dir")
        .arg(&out_dir)
        .env("PBSO_CONFIG", &config));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("trained 0 steps"), "{stdout}");
    let metrics = std::fs::read_to_string(out_dir.join("metrics.jsonl")).unwrap();
    assert!(metrics.is_empty());
}

#[test]
fn compare_writes_report_with_three_arms() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "");
    let report_path = dir.path().join("report.json");
    let out = run_ok(pbso()
        .arg("compare")
        .arg("--config")
        .arg(&config)
        .arg("--steps")
        .arg("4")
        .arg("--seeds")
        .arg("1,2")
        .arg("--report")
        .arg(&report_path));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("full_pbso"), "{stdout}");
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    let arms: Vec<&str> =
        report["arms"].as_array().unwrap().iter().map(|a| a["arm"].as_str().unwrap()).collect();
    assert_eq!(arms, vec!["full_pbso", "terminal_only", "no_clipping"]);
    assert_eq!(report["seeds"], serde_json::json!([1, 2]));
    assert_eq!(report["holdout"].as_array().unwrap().len(), 2);
}

#[test]
fn parse_reads_stdin_when_no_files_given() {
    use std::io::Write;
    let mut child = pbso()
        .arg("parse")
        .stdin(std::process::Stdio::piped())
        .stdout(std::process::Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(b"<think></think>\n```\nb d\n```\n")
        .unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success());
    let record: serde_json::Value =
        serde_json::from_slice(out.stdout.split(|&b| b == b'\n').next().unwrap()).unwrap();
    assert_eq!(record["question_id"], "");
    assert_eq!(record["final_statement"], "b d");
    assert_eq!(record["iterations"], serde_json::json!([]));
}

#[test]
fn gradcheck_passes() {
    let out = run_ok(pbso().arg("gradcheck").arg("--seeds").arg("5"));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("gradient check passed"), "{stdout}");
}

#[test]
fn failures_emit_machine_readable_error_lines() {
    // malformed transcript on stdin
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "no think region at all").unwrap();
    let out = pbso().arg("parse").arg(&bad).output().unwrap();
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    let line: serde_json::Value =
        serde_json::from_str(stderr.lines().next().unwrap()).expect("stderr is a JSON line");
    assert!(line["error"].as_str().unwrap().contains("</think>"), "{stderr}");

    // oracle backend without targets
    let out = pbso().arg("score").arg("--backend").arg("oracle").arg("-i").arg(&bad).output().unwrap();
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    let line: serde_json::Value = serde_json::from_str(stderr.lines().next().unwrap()).unwrap();
    assert!(line["error"].as_str().unwrap().contains("--targets"));

    // unknown config key
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "stepz = 3\n").unwrap();
    let out = pbso().arg("train").arg("--config").arg(&cfg).output().unwrap();
    assert!(!out.status.success());
}
