use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_curriculum"))
}

fn write_config(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn validate(config: &Path) -> Output {
    bin().arg("validate").arg("--config").arg(config).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn shipped_config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

#[test]
fn validate_chain6_ok() {
    let out = validate(&shipped_config("chain6_mr.json"));
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim(), "OK, 6 tasks, 5 edges");
}

#[test]
fn shipped_configs_validate() {
    for entry in std::fs::read_dir(shipped_config("")).unwrap() {
        let path = entry.unwrap().path();
        let out = validate(&path);
        assert_eq!(out.status.code(), Some(0), "{}: {}", path.display(), stdout(&out));
    }
}

#[test]
fn validate_names_cycle() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "cycle.json",
        r#"{"curriculum": {"tasks": [{"name": "x"}, {"name": "y"}, {"name": "z"}],
            "edges": [["x", "y"], ["y", "z"], ["z", "y"]]}}"#,
    );
    let out = validate(&cfg);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(text.contains("cycle"), "{text}");
    assert!(text.contains("y -> z -> y") || text.contains("z -> y -> z"), "{text}");
}

#[test]
fn validate_collects_all_problems() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "bad.json",
        r#"{"curriculum": {"builtin": "chain3"},
            "scheduler": {"delta": 1.5, "epsilon": -0.1},
            "run": {"seeds": []}}"#,
    );
    let out = validate(&cfg);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(text.contains("`delta` = 1.5"), "{text}");
    assert!(text.contains("`epsilon`"), "{text}");
    assert!(text.contains("`seeds`"), "{text}");
    assert_eq!(text.lines().count(), 3, "{text}");
}

#[test]
fn validate_reports_parse_position() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "typo.json",
        "{\"curriculum\": {\"builtin\": \"chain3\"},\n  \"runn\": {}}",
    );
    let out = validate(&cfg);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("line 2"), "{}", stdout(&out));

    let cfg = write_config(&dir, "builtin.json", r#"{"curriculum": {"builtin": "chain7"}}"#);
    let out = validate(&cfg);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("chain7"));
}

#[test]
fn run_rejects_bad_estimates_before_running() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "minmax.json",
        r#"{"curriculum": {"tasks": [{"name": "a"}, {"name": "b", "min": 0.6, "max": 0.5}], "edges": [["a", "b"]]}}"#,
    );
    let out_dir = dir.path().join("out");
    let out = bin()
        .arg("run")
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("minimum estimate 0.6"), "{}", stderr(&out));
    assert!(!out_dir.exists());
}

#[test]
fn run_writes_logs_and_summary() {
    let dir = TempDir::new().unwrap();
    let out_dir = dir.path().join("out");
    let out = bin()
        .arg("run")
        .arg("--config")
        .arg(shipped_config("chain3_mr.json"))
        .arg("--out")
        .arg(&out_dir)
        .args(["--seeds", "4,2,9", "--steps", "120"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let mut names: Vec<String> = std::fs::read_dir(&out_dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names, ["run_2.csv", "run_4.csv", "run_9.csv", "summary.json"]);
    let log = std::fs::read_to_string(out_dir.join("run_4.csv")).unwrap();
    assert_eq!(log.lines().count(), 121);

    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["seeds"], serde_json::json!([2, 4, 9]));
    assert_eq!(summary["tasks"].as_array().unwrap().len(), 3);

    let json = bin().arg("report").arg("--in").arg(&out_dir).output().unwrap();
    assert_eq!(json.status.code(), Some(0));
    let reported: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(reported, summary);

    let csv = bin()
        .arg("report")
        .arg("--in")
        .arg(&out_dir)
        .args(["--format", "csv"])
        .output()
        .unwrap();
    let text = stdout(&csv);
    assert_eq!(text.lines().next(), Some("task,step,q1,median,q3"));
    assert_eq!(text.lines().count(), 1 + 3 * 120);
}

#[test]
fn report_errors_are_runtime_failures() {
    let dir = TempDir::new().unwrap();
    let out = bin().arg("report").arg("--in").arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("no run logs"));

    std::fs::write(
        dir.path().join("run_1.csv"),
        "step,task,return,p_A,mr_A,mean_A\n1,A,0,1,0,0\n",
    )
    .unwrap();
    std::fs::write(
        dir.path().join("run_2.csv"),
        "step,task,return,p_B,mr_B,mean_B\n1,B,0,1,0,0\n",
    )
    .unwrap();
    let out = bin().arg("report").arg("--in").arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("schema mismatch"));
}

#[test]
fn missing_config_is_runtime_failure() {
    let out = validate(Path::new("/definitely/not/here.json"));
    assert_eq!(out.status.code(), Some(2));
}
