use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const TINY: &str = r#"
name = "tiny"
dimension = 1
axis = "h"
ladder = [2, 3, 4]
fixed = 5
reference = { h = 6, tau = 5 }
norms = ["e1", "e2"]
data = { kind = "power-source", x_power = -0.49, t_power = -0.49 }

[[expectations]]
norm = "e1"
order = 2.0
tolerance = 0.5
"#;

fn subdiff(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_subdiff"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn lists_every_preset() {
    let dir = tempfile::tempdir().unwrap();
    let out = subdiff(dir.path(), &["list-presets"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 20);
    assert!(text.contains("exp1-f-smooth-tau "));
    assert!(text.contains("exp2-dirac-u0-h-full"));
}

#[test]
fn toml_run_writes_artifacts_and_emits_tables() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("tiny.toml"), TINY).unwrap();
    let out = subdiff(
        dir.path(),
        &[
            "run",
            "tiny.toml",
            "--cache-dir",
            "cache",
            "--out-dir",
            "out",
        ],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(stdout(&out).contains("ok: E1 order"));

    let out_dir = dir.path().join("out");
    let csv = fs::read_to_string(out_dir.join("tables/tiny.csv")).unwrap();
    assert!(csv.starts_with("h,E1,E1 order,E2,E2 order\n"));
    assert_eq!(csv.lines().count(), 4);
    assert!(out_dir.join("tables/tiny.md").exists());
    assert_eq!(fs::read_dir(dir.path().join("cache")).unwrap().count(), 1);

    let emitted = subdiff(
        dir.path(),
        &["emit", "out/records/tiny.json", "--format", "csv"],
    );
    assert!(emitted.status.success());
    assert_eq!(stdout(&emitted), csv);
    let md = subdiff(
        dir.path(),
        &["emit", "out/records/tiny.json", "--format", "markdown"],
    );
    assert_eq!(
        stdout(&md),
        fs::read_to_string(out_dir.join("tables/tiny.md")).unwrap()
    );

    let again = subdiff(
        dir.path(),
        &[
            "run",
            "tiny.toml",
            "--cache-dir",
            "cache",
            "--out-dir",
            "again",
        ],
    );
    assert!(again.status.success());
    assert_eq!(
        fs::read(dir.path().join("again/tables/tiny.csv")).unwrap(),
        csv.as_bytes()
    );
}

#[test]
fn level_and_alpha_overrides() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("tiny.toml"), TINY).unwrap();
    let out = subdiff(
        dir.path(),
        &[
            "run",
            "tiny.toml",
            "--levels",
            "2,3",
            "--alpha",
            "0.6",
            "--jobs",
            "1",
        ],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = fs::read_to_string(dir.path().join("tables/tiny.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    let record = fs::read_to_string(dir.path().join("records/tiny.json")).unwrap();
    assert!(record.contains("0.6"));
}

#[test]
fn failed_expectation_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let strict = TINY.replace("order = 2.0", "order = 5.0");
    fs::write(dir.path().join("strict.toml"), strict).unwrap();
    let out = subdiff(dir.path(), &["run", "strict.toml"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout(&out).contains("FAIL: E1 order"));
}

#[test]
fn bad_input_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        subdiff(dir.path(), &["run", "no-such-preset"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        subdiff(dir.path(), &["emit", "missing.json"]).status.code(),
        Some(1)
    );
    fs::write(
        dir.path().join("bad.toml"),
        "name = \"bad\"\ndimension = 3\n",
    )
    .unwrap();
    let out = subdiff(dir.path(), &["run", "bad.toml"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}

#[test]
fn property_suite_by_name() {
    let dir = tempfile::tempdir().unwrap();
    let out = subdiff(dir.path(), &["properties", "mittag-leffler", "--seed", "7"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("mittag-leffler (seed 7"));
    assert_eq!(
        subdiff(dir.path(), &["properties", "nope"]).status.code(),
        Some(1)
    );
}
