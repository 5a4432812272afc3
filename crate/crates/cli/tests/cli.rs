use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_polar-dirac"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn write_scenario(dir: &Path, body: &str) -> String {
    let path = dir.join("scenario.json");
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_owned()
}

const ON_SHELL: &str = r#"{
  "solution": {"kind": "superposition", "waves": [
    {"momentum": [0.3, -0.2, 0.5], "branch": "up"},
    {"momentum": [-0.4, 0.1, 0.2], "branch": "down", "coefficient": [0.6, 0.3]}]},
  "background": {"mass": 1.0, "charge": 0.5, "potential": [0.1, 0.2, 0.0, -0.1]},
  "points": {"count": 12}
}"#;

#[test]
fn verify_writes_reports_and_passes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_scenario(dir.path(), ON_SHELL);
    let out = run(&["verify", &cfg, "--seed", "7", "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    let csv = fs::read_to_string(dir.path().join("report.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,x,y,z,equation,norm,pass"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row.len(), 7);
    // floats carry 17 significant digits
    let mantissa = row[0].split('e').next().unwrap().trim_start_matches('-').replace('.', "");
    assert_eq!(mantissa.len(), 17, "{}", row[0]);

    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["sets_meeting_expectation"], 19);
}

#[test]
fn same_seed_gives_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_scenario(dir.path(), ON_SHELL);
    let mut reports = Vec::new();
    for (name, seed) in [("a", "11"), ("b", "11"), ("c", "12")] {
        let out_dir = dir.path().join(name);
        fs::create_dir(&out_dir).unwrap();
        let out = run(&["verify", &cfg, "--seed", seed, "--format", "csv", "--out-dir", out_dir.to_str().unwrap()]);
        assert_eq!(code(&out), 0);
        assert!(!out_dir.join("summary.json").exists());
        reports.push(fs::read(out_dir.join("report.csv")).unwrap());
    }
    assert_eq!(reports[0], reports[1]);
    assert_ne!(reports[0], reports[2]);
}

#[test]
fn off_shell_scenario_is_detected() {
    let dir = tempfile::tempdir().unwrap();
    let body = ON_SHELL.replace(r#""points""#, r#""perturbation": {"mass_scale": 1.1}, "points""#);
    let cfg = write_scenario(dir.path(), &body);
    let out = run(&["verify", &cfg, "--format", "json", "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["expectation"], "off_shell");
    assert_eq!(summary["sets_meeting_expectation"], 19);
}

#[test]
fn bad_configs_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.json");
    assert_eq!(code(&run(&["verify", missing.to_str().unwrap()])), 2);

    let cfg = write_scenario(dir.path(), r#"{"solution": {"kind": "plane_wave"}, "bogus": 1}"#);
    assert_eq!(code(&run(&["verify", &cfg])), 2);

    let cfg = write_scenario(dir.path(), &ON_SHELL.replace(r#""mass": 1.0"#, r#""mass": -1.0"#));
    assert_eq!(code(&run(&["verify", &cfg])), 2);
}

#[test]
fn closed_branch_is_a_numerical_failure() {
    let dir = tempfile::tempdir().unwrap();
    let codes: Vec<i32> = ["up", "down"]
        .iter()
        .map(|b| {
            let cfg = write_scenario(
                dir.path(),
                &format!(
                    r#"{{"solution": {{"kind": "plane_wave", "momentum": [0, 0, 0], "branch": "{b}"}},
                        "background": {{"mass": 1.0, "torsion": [0, 0, 0, 1], "coupling": 1.0}},
                        "points": {{"count": 3}}}}"#
                ),
            );
            code(&run(&["verify", &cfg, "--out-dir", dir.path().to_str().unwrap()]))
        })
        .collect();
    let mut sorted = codes.clone();
    sorted.sort();
    assert_eq!(sorted, [0, 3], "{codes:?}");
}

#[test]
fn catalog_lists_nineteen_sets() {
    let out = run(&["catalog", "--format", "json"]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["set_count"], 19);
    assert_eq!(v["enumeration_count"], 19);
    assert_eq!(v["enumeration_match"], true);
    assert!(v["sets"].as_array().unwrap().iter().all(|s| s["redundancy"].is_u64()));

    let csv = run(&["catalog", "--format", "csv"]);
    assert_eq!(String::from_utf8(csv.stdout).unwrap().lines().count(), 20);
}

#[test]
fn identities_pass_and_corruption_fails() {
    let ok = run(&["identities", "--battery", "50", "--seed", "3"]);
    assert_eq!(code(&ok), 0);
    let bad = run(&["identities", "--battery", "50", "--corrupt-epsilon", "--format", "json"]);
    assert_eq!(code(&bad), 1);
    let v: serde_json::Value = serde_json::from_slice(&bad.stdout).unwrap();
    let failed: Vec<&str> = v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["pass"] == false)
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert_eq!(failed, ["duality", "triple_product"]);
}
