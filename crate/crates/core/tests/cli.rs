use std::path::Path;
use std::process::{Command, Output};

fn prepost(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_prepost"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

fn stderr_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stderr).expect("stderr is a JSON error document")
}

#[test]
fn help_documents_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = prepost(&["--help"], dir.path());
    let text = String::from_utf8(out.stdout).unwrap();
    for needle in ["weak-value", "machine", "suter", "--config", "--seed", "--out", "--format", "PREPOST_THREADS"] {
        assert!(text.contains(needle), "help lacks {needle}");
    }
    for code in ["0  success", "2  parse", "3  validation", "4  numeric", "5  I/O"] {
        assert!(text.contains(code), "help lacks exit code line {code}");
    }
}

#[test]
fn bundled_weak_value_prints_amplified_value() {
    let dir = tempfile::tempdir().unwrap();
    let out = prepost(&["weak-value"], dir.path());
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(stdout.lines().next(), Some("A_w = 57.2900 + 0.0000i"));
    assert!(dir.path().join("out/weak_value.json").exists());
    assert!(dir.path().join("out/weak_value.json.manifest.json").exists());
}

#[test]
fn missing_delta_exits_with_validation_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "s.json",
        r#"{"kind": "suter_sweep", "parameters": {"pre_angle": 45, "post_angle": -44}}"#,
    );
    let out = prepost(&["suter", "sweep", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(3));
    let e = stderr_json(&out);
    assert_eq!(e["error"], "validation");
    assert_eq!(e["key"], "delta");
}

#[test]
fn unknown_key_and_kind_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "s.json",
        r#"{"kind": "weak_value", "parameters": {"observable": "sigma_z", "pre_angle": 45, "post_angle": -44, "gamma_ray": 2}}"#,
    );
    let out = prepost(&["weak-value", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(stderr_json(&out)["key"], "gamma_ray");

    let cfg = write(
        dir.path(),
        "t.json",
        r#"{"kind": "weak_value", "parameters": {"observable": "sigma_z", "pre_angle": 45, "post_angle": -44}}"#,
    );
    let out = prepost(&["pointer", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(stderr_json(&out)["key"], "kind");
}

#[test]
fn malformed_json_exits_with_parse_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.json", "{\n  \"kind\": \"weak_value\",\n}");
    let out = prepost(&["weak-value", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let e = stderr_json(&out);
    assert_eq!(e["error"], "parse");
    assert_eq!(e["line"], 3);
}

#[test]
fn orthogonal_postselection_exits_with_numeric_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "s.json",
        r#"{"kind": "weak_value", "parameters": {"observable": "sigma_z", "pre_state": [[1,0],[0,0]], "post_state": [[0,0],[1,0]]}}"#,
    );
    let out = prepost(&["weak-value", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(stderr_json(&out)["error"], "numeric");
}

#[test]
fn io_failures_exit_with_io_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = prepost(&["weak-value", "--config", "does/not/exist.json"], dir.path());
    assert_eq!(out.status.code(), Some(5));

    let blocker = write(dir.path(), "blocker", "");
    let target = format!("{blocker}/result.json");
    let out = prepost(&["weak-value", "--out", &target], dir.path());
    assert_eq!(out.status.code(), Some(5));
    assert_eq!(stderr_json(&out)["error"], "io");
}

#[test]
fn overrides_apply() {
    let dir = tempfile::tempdir().unwrap();
    let out = prepost(
        &["ensemble", "--seed", "99", "--out", "e.csv", "--format", "csv"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let body = std::fs::read_to_string(dir.path().join("e.csv")).unwrap();
    let mut lines = body.lines();
    assert_eq!(lines.next(), Some("m_total,m_acc,mean,stderr,seed"));
    assert!(lines.next().unwrap().ends_with(",99"));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("e.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 99);
    assert_eq!(manifest["scenario"]["kind"], "ensemble");
}

#[test]
fn thread_cap_does_not_change_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let run = |threads: &str, name: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_prepost"))
            .args(["machine", "audit", "--out", name])
            .env("PREPOST_THREADS", threads)
            .current_dir(dir.path())
            .output()
            .unwrap();
        assert!(out.status.success());
        std::fs::read(dir.path().join(name)).unwrap()
    };
    assert_eq!(run("1", "a.csv"), run("4", "b.csv"));
}
