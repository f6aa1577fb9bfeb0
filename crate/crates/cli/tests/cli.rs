//! End-to-end checks of the `hats` binary.

use std::process::{Command, Output};

use serde_json::Value;

fn hats(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hats")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn exact_pairs_is_surely_one_half() {
    let out = hats(&["exact", "--strategy", "pairs", "--n", "4"]);
    assert!(out.status.success());
    let doc = json(&out);
    let atoms = doc["distribution"].as_array().unwrap();
    assert_eq!(atoms.len(), 1);
    assert_eq!(atoms[0]["value"], "1/2");
    assert_eq!(atoms[0]["probability"], "1");
    assert_eq!(doc["schema_version"], 1);
}

#[test]
fn exact_even_odd_atoms_and_csv() {
    let doc = json(&hats(&["exact", "--strategy", "even-odd", "--n", "4"]));
    let atoms: Vec<(String, String)> = doc["distribution"]
        .as_array()
        .unwrap()
        .iter()
        .map(|a| (a["value"].as_str().unwrap().into(), a["probability"].as_str().unwrap().into()))
        .collect();
    assert_eq!(atoms, vec![("0".into(), "1/2".into()), ("1".into(), "1/2".into())]);
    assert!(doc["independence"].as_array().unwrap().iter().all(|r| r["passed"] == true));

    let out = hats(&["exact", "--strategy", "even-odd", "--n", "4", "--out", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("value,numerator,denominator\n"), "{text}");
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(hats(&["exact", "--strategy", "even-odd", "--n", "0"]).status.code(), Some(2));
    let out = hats(&["search", "--n", "5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("n too large"));
    assert_eq!(hats(&["plan", "--u", "1/4"]).status.code(), Some(2));
    assert_eq!(hats(&["exact", "--strategy", "nope", "--n", "2"]).status.code(), Some(2));
}

#[test]
fn search_two_players() {
    let doc = json(&hats(&["search", "--n", "2", "--objective", "all-correct"]));
    assert_eq!(doc["optimum"], "1/2");
    let doc = json(&hats(&["search", "--n", "3", "--objective", "guaranteed"]));
    assert_eq!(doc["optimum"], "1/3");
}

#[test]
fn simulate_pairs_is_half_at_n() {
    let out = hats(&["simulate", "--strategy", "pairs", "--N", "100000", "--runs", "10", "--seed", "7"]);
    assert!(out.status.success());
    let lines: Vec<Value> =
        String::from_utf8(out.stdout).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 10);
    assert!(lines.iter().all(|r| r["z_bar_n"] == "1/2" && r["seed"] == 7));
}

#[test]
fn simulate_defaults_and_checkpoints() {
    let dir = std::env::temp_dir().join(format!("hats-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let csv = dir.join("checkpoints.csv");
    let out = hats(&["simulate", "--blocks", "geometric", "--runs", "3", "--checkpoints", csv.to_str().unwrap()]);
    assert!(out.status.success());
    let first: Value = serde_json::from_str(String::from_utf8(out.stdout.clone()).unwrap().lines().next().unwrap()).unwrap();
    assert_eq!(first["seed"], 0);
    let rows = std::fs::read_to_string(&csv).unwrap();
    assert!(rows.starts_with("run,k,numerator,denominator\n"));
    assert!(rows.lines().any(|l| l.starts_with("2,100000,")));
    assert_eq!(out.stdout, hats(&["simulate", "--blocks", "geometric", "--runs", "3"]).stdout);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn plan_validates() {
    let out = hats(&["plan", "--u", "3/4", "--teams", "10", "--validate"]);
    assert!(out.status.success());
    let plan = json(&out);
    assert_eq!(plan["teams"].as_array().unwrap().len(), 10);
    assert!(hats(&["plan", "--u", "1", "--teams", "8", "--validate"]).status.success());
}

#[test]
fn inline_and_file_specs() {
    let spec = r#"{"kind":"team","params":{"upper":"2/3","teams":5}}"#;
    let out = hats(&["simulate", "--strategy", spec, "--N", "3000", "--runs", "2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let path = std::env::temp_dir().join(format!("hats-spec-{}.json", std::process::id()));
    std::fs::write(&path, r#"{"kind":"even-odd","params":{"group":4}}"#).unwrap();
    let arg = format!("@{}", path.display());
    let doc = json(&hats(&["exact", "--strategy", &arg, "--n", "4"]));
    assert_eq!(doc["strategy"]["params"]["group"], 4);
    std::fs::remove_file(&path).ok();
}

#[test]
fn verify_finite_passes_and_colors_reports_continuum() {
    let out = hats(&["verify", "--suite", "finite"]);
    assert!(out.status.success());
    let doc = json(&out);
    assert_eq!(doc["passed"], true);
    assert_eq!(doc["criteria"].as_array().unwrap().len(), 4);

    let doc = json(&hats(&["verify", "--suite", "colors", "--jobs", "2"]));
    let continuum = &doc["criteria"][0]["details"]["continuum"];
    assert!(continuum.as_array().unwrap().iter().all(|c| c["correct"] == 0));
}
