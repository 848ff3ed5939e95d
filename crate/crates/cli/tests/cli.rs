use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn puca(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_puca"))
        .args(args)
        .current_dir(dir())
        .env_remove("PUCA_THREADS")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn golden(name: &str) -> String {
    std::fs::read_to_string(dir().join("tests/golden").join(name)).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let d = Path::new(env!("CARGO_TARGET_TMPDIR")).join("cli-tests");
    std::fs::create_dir_all(&d).unwrap();
    d.join(name)
}

#[test]
fn validate_rule_reports_fixed_points() {
    let o = puca(&["validate-rule", "examples/identity.rule"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("valid, 16 fixed points\n"), "{out}");
    assert!(out.contains("hash: "));
}

#[test]
fn validate_rule_rejects_non_bijective() {
    let path = scratch("collapse.rule");
    std::fs::write(
        &path,
        "alphabet: 0 1\nquiescent: 0\ndim: 2\neven: 0 0 0 1 -> 0 0 0 0\nodd: same\n",
    )
    .unwrap();
    let o = puca(&["validate-rule", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("invalid: even phase is not a bijection"));
}

#[test]
fn bad_arguments_exit_two() {
    assert_eq!(puca(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(puca(&["validate-rule", "no/such/file.rule"]).status.code(), Some(2));
    let o = puca(&["search", "--rule", "examples/identity.rule", "--target", "(0,0", "--beta", "NOT"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn identity_rule_cannot_negate() {
    let o = puca(&["search", "--rule", "examples/identity.rule", "--target", "(0,0)", "--beta", "NOT"]);
    assert_eq!(o.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["outcome"]["status"], "not-found");
    assert_eq!(report["outcome"]["exhausted"], true);
}

#[test]
fn search_respects_candidate_cap() {
    let o = puca(&[
        "search",
        "--rule",
        "examples/identity.rule",
        "--target",
        "(0,0)",
        "--beta",
        "NOT",
        "--max-candidates",
        "10",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["candidates_tested"], 10);
    assert_eq!(report["outcome"]["exhausted"], false);
}

#[test]
fn search_is_thread_count_independent() {
    let args = ["search", "--rule", "examples/collide.rule", "--target", "(0,0)", "--beta", "CONST1"];
    let one = Command::new(env!("CARGO_BIN_EXE_puca"))
        .args(args)
        .current_dir(dir())
        .env("PUCA_THREADS", "1")
        .output()
        .unwrap();
    let many = puca(&args);
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, many.stdout);
}

#[test]
fn collide_survey_matches_golden() {
    let o = puca(&["survey", "--rule", "examples/collide.rule", "--target", "(0,0)"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), golden("collide_survey.json"));
}

#[test]
fn nogo_demo_matches_golden() {
    let o = puca(&[
        "nogo-demo",
        "--rule",
        "examples/nogo.rule",
        "--partition",
        "examples/nogo.partition",
        "--epsilon",
        "1/2",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), golden("nogo_witness.json"));
}

#[test]
fn nogo_demo_with_explicit_constraints() {
    let o = puca(&[
        "nogo-demo",
        "--rule",
        "examples/nogo.rule",
        "--partition",
        "examples/nogo.partition",
        "--constraints",
        "examples/nogo.constraints",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["verified"], true);
    assert_eq!(report["program_action_at_conflict"], "ID");
    assert_eq!(report["shifted_action_at_conflict"], "NOT");
}

#[test]
fn simulate_then_render() {
    let traj = scratch("collide.traj");
    let o = puca(&[
        "simulate",
        "--rule",
        "examples/collide.rule",
        "--config",
        "examples/collide.config",
        "--steps",
        "2",
        "-o",
        traj.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = puca(&["render", traj.to_str().unwrap(), "--step", "1"]);
    assert_eq!(text.status.code(), Some(0));
    // the head-on pair at (2,2), (3,3) scatters to the other diagonal
    let grid = stdout(&text);
    let rows: Vec<&str> = grid.lines().collect();
    assert_eq!(rows[0], "step 1 (even)");
    assert_eq!(rows[3], ". . . 1 . . . .");
    assert_eq!(rows[4], ". . 1 . . . . .");
    let pgm = puca(&["render", traj.to_str().unwrap(), "--format", "pgm"]);
    assert!(stdout(&pgm).starts_with("P2\n8 24\n1\n"));
    assert_eq!(puca(&["render", traj.to_str().unwrap(), "--step", "9"]).status.code(), Some(2));
}

#[test]
fn induced_map_of_nogo_program() {
    let o = puca(&[
        "induced-map",
        "--rule",
        "examples/nogo.rule",
        "--config",
        "examples/nogo_program.config",
        "--target",
        "(0,0) (2,0)",
        "--time",
        "1",
        "--beta",
        "NOT,ID",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["cell_actions"][0][1], "NOT");
    assert_eq!(report["cell_actions"][1][1], "ID");
}

#[test]
fn macro_check_reports_lemma() {
    let o = puca(&[
        "macro-check",
        "--config",
        "examples/collide.config",
        "--partition",
        "examples/nogo.partition",
        "--constraints",
        "examples/nogo.constraints",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["max_deviation"], "1/8");
    assert_eq!(report["max_deficit"], "1/6");
    assert_eq!(report["lemma_holds"], true);
}

#[test]
fn quantum_demo_small_run() {
    let o = puca(&["quantum-demo", "--cells", "6", "--trials", "20", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["passed"], true);
    assert_eq!(report["shift_bounds"]["failures"], 0);
    assert_eq!(puca(&["quantum-demo", "--cells", "7"]).status.code(), Some(2));
}

#[test]
fn complement_rule_reaches_only_bijections() {
    let o = puca(&["survey", "--rule", "examples/complement.rule", "--target", "(0,0)"]);
    assert_eq!(o.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["coverage"], serde_json::json!(["ID", "NOT"]));
    assert_eq!(report["entries"][1]["outcome"]["time"], 1);
    assert_eq!(report["entries"][2]["outcome"]["exhausted"], true);
}
