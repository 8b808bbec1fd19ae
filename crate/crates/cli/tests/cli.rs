//! CLI behavior: input forms, exit codes, env-var seeding, join errors.

use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_asyncplan"))
}

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
        .to_str()
        .unwrap()
        .to_string()
}

#[test]
fn solve_accepts_task_block_text() {
    let dir = tempfile::tempdir().unwrap();
    let block = "To boil two eggs, here are the steps and the times needed for each step.\n\
                 Step 1. Boil the first egg (7 min)\n\
                 Step 2. Boil the second egg (7 min)\n";
    let path = dir.path().join("block.txt");
    std::fs::write(&path, block).unwrap();
    let output = bin().arg("solve").arg(&path).output().unwrap();
    assert!(output.status.success());
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert_eq!(stdout.lines().next().unwrap(), "\"7 min\"");
}

#[test]
fn cyclic_plan_exits_2_with_a_diagnostic() {
    let output = bin()
        .arg("solve")
        .arg(data("cyclic.json"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8(output.stderr).unwrap();
    assert!(stderr.contains("cycle"), "stderr: {stderr}");
}

#[test]
fn missing_file_exits_1() {
    let output = bin()
        .arg("solve")
        .arg("/nonexistent/plan.json")
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn exact_solver_bound_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let steps: Vec<String> = (1..=13)
        .map(|i| format!(r#"{{"index":{i},"text":"s{i}","duration":"1 min"}}"#))
        .collect();
    let json = format!(
        r#"{{"task":"big","steps":[{}],"constraints":[]}}"#,
        steps.join(",")
    );
    let path = dir.path().join("big.json");
    std::fs::write(&path, json).unwrap();
    let output = bin()
        .arg("solve")
        .arg(&path)
        .args(["--agents", "2"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(3));
    // The heuristic path still works on the same plan.
    let output = bin()
        .arg("solve")
        .arg(&path)
        .args(["--agents", "2", "--method", "list"])
        .output()
        .unwrap();
    assert!(output.status.success());
}

#[test]
fn gen_requires_a_seed_but_accepts_the_env_var() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ds");
    let output = bin()
        .args(["gen", "--out", out.to_str().unwrap(), "--count", "2"])
        .env_remove("ASYNCPLAN_SEED")
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    let output = bin()
        .args(["gen", "--out", out.to_str().unwrap(), "--count", "2"])
        .env("ASYNCPLAN_SEED", "9")
        .output()
        .unwrap();
    assert!(
        output.status.success(),
        "{}",
        String::from_utf8_lossy(&output.stderr)
    );
    assert!(out.join("dataset.jsonl").exists());
}

#[test]
fn render_single_plan_prints_the_golden_prompt() {
    let output = bin()
        .args([
            "render",
            "--plan",
            &data("video_game.json"),
            "--regime",
            "plag_explicit",
            "--graph",
            "adjacency_list",
        ])
        .output()
        .unwrap();
    assert!(output.status.success());
    let stdout = String::from_utf8(output.stdout).unwrap();
    let golden = std::fs::read_to_string(
        PathBuf::from(env!("CARGO_MANIFEST_DIR"))
            .join("../core/tests/golden/video_game_plag_explicit_adjacency_list.txt"),
    )
    .unwrap();
    // stdout gains one trailing newline from println.
    assert_eq!(stdout, format!("{golden}\n"));
}

#[test]
fn render_without_graph_for_plag_exits_2() {
    let output = bin()
        .args([
            "render",
            "--plan",
            &data("video_game.json"),
            "--regime",
            "plag_bag",
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn grade_join_errors_name_the_missing_ids() {
    let dir = tempfile::tempdir().unwrap();
    let out = |name: &str| dir.path().join(name).to_str().unwrap().to_string();
    let run = |args: &[&str]| {
        let output = bin().args(args).output().unwrap();
        assert!(
            output.status.success(),
            "{args:?}: {}",
            String::from_utf8_lossy(&output.stderr)
        );
    };
    run(&[
        "gen",
        "--out",
        dir.path().to_str().unwrap(),
        "--count",
        "3",
        "--complexity",
        "8..12",
        "--seed",
        "1",
    ]);
    run(&[
        "render",
        "--dataset",
        &out("dataset.jsonl"),
        "--out",
        &out("prompts.jsonl"),
        "--regime",
        "zero_shot",
    ]);
    // One completion present, two missing, one orphan.
    let completions = concat!(
        r#"{"id":"sp-00000:zero_shot:t02:dir:na","completion":"\"1 min\""}"#,
        "\n",
        r#"{"id":"ghost","completion":"\"2 min\""}"#,
        "\n"
    );
    std::fs::write(dir.path().join("completions.jsonl"), completions).unwrap();
    let output = bin()
        .args([
            "grade",
            "--dataset",
            &out("dataset.jsonl"),
            "--prompts",
            &out("prompts.jsonl"),
            "--completions",
            &out("completions.jsonl"),
            "--out",
            &out("records.jsonl"),
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8(output.stderr).unwrap();
    assert!(
        stderr.contains("sp-00001:zero_shot:t02:dir:na"),
        "stderr: {stderr}"
    );
    assert!(stderr.contains("ghost"), "stderr: {stderr}");
}

#[test]
fn gen_is_byte_identical_across_runs_and_jobs() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for (out, jobs) in [(&a, "1"), (&b, "4")] {
        let output = bin()
            .args([
                "gen",
                "--out",
                out.to_str().unwrap(),
                "--count",
                "40",
                "--complexity",
                "10..40",
                "--seed",
                "7",
                "--jobs",
                jobs,
            ])
            .output()
            .unwrap();
        assert!(output.status.success());
    }
    let read = |dir: &PathBuf, name: &str| std::fs::read(dir.join(name)).unwrap();
    assert_eq!(read(&a, "dataset.jsonl"), read(&b, "dataset.jsonl"));
    assert_eq!(read(&a, "manifest.json"), read(&b, "manifest.json"));
}
