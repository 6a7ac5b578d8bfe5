use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_isrs-nli"))
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("run.json");
    std::fs::write(&path, text).unwrap();
    path
}

fn run(config: &Path, out: &Path, extra: &[&str]) -> Output {
    bin().arg("--config").arg(config).arg("--out").arg(out).args(extra).output().unwrap()
}

/// Data rows of a CSV output as `column -> value` lookups.
fn rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(str::to_string).collect();
    let data = lines.map(|l| l.split(',').map(str::to_string).collect()).collect();
    (header, data)
}

fn column(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name} in {header:?}"))
}

#[test]
fn gaussian_grid_has_no_correction_and_sixty_four_qam_a_negative_one() {
    let dir = tempfile::tempdir().unwrap();
    for (format, negative) in [("gaussian", false), ("64qam", true)] {
        let cfg = write_config(dir.path(), &format!(r#"{{"preset": "smf", "grid": {{"channels": 41, "format": "{format}"}}}}"#));
        let out = dir.path().join(format);
        let result = run(&cfg, &out, &["--spans", "6", "--tier", "cf"]);
        assert!(result.status.success(), "{}", String::from_utf8_lossy(&result.stderr));
        let text = std::fs::read_to_string(out.join("estimate.csv")).unwrap();
        assert!(text.contains("# override spans: 6"));
        let (header, data) = rows(&text);
        assert_eq!(data.len(), 41);
        let k = column(&header, "eta_corr");
        for row in &data {
            let corr: f64 = row[k].parse().unwrap();
            if negative {
                assert!(corr < 0.0, "{row:?}");
            } else {
                assert_eq!(corr, 0.0);
            }
        }
    }
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"grid": {"channels": 21, "format": "16qam"}, "link": {"spans": 4}}"#);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(run(&cfg, &a, &[]).status.success());
    assert!(run(&cfg, &b, &[]).status.success());
    assert_eq!(std::fs::read(a.join("estimate.csv")).unwrap(), std::fs::read(b.join("estimate.csv")).unwrap());
}

#[test]
fn malformed_config_fails_without_writing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "{\n  \"grid\": {\"chanels\": 3}\n}\n");
    let out = dir.path().join("out");
    let result = run(&cfg, &out, &[]);
    assert!(!result.status.success());
    let err = String::from_utf8_lossy(&result.stderr);
    assert!(err.contains("line 2"), "{err}");
    assert!(!out.exists() || std::fs::read_dir(&out).unwrap().next().is_none());
}

#[test]
fn unknown_command_and_tier_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "{}");
    assert!(!run(&cfg, dir.path(), &["--command", "plot"]).status.success());
    assert!(!run(&cfg, dir.path(), &["--tier", "fast"]).status.success());
    assert!(!run(&cfg, dir.path(), &["--tier", "cf,int"]).status.success());
    assert!(!run(&cfg, dir.path(), &["--epsilon", "-0.5"]).status.success());
}

#[test]
fn identity_check_reports_relative_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"identity": {"pairs": [[1, 3]], "n": [10, 100]}}"#);
    let result = run(&cfg, dir.path(), &["--command", "identity-check"]);
    assert!(result.status.success(), "{}", String::from_utf8_lossy(&result.stderr));
    let text = std::fs::read_to_string(dir.path().join("identity-check.csv")).unwrap();
    let (_, data) = rows(&text);
    assert_eq!(data.len(), 2);
    assert!(text.contains("relative error"));
}

#[test]
fn validate_with_closed_form_only() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"grid": {"channels": 11, "format": "qpsk"}, "validate": {"spans": [1, 3], "channels": [0, 5]}}"#,
    );
    let result = run(&cfg, dir.path(), &["--command", "validate", "--tier", "cf"]);
    assert!(result.status.success(), "{}", String::from_utf8_lossy(&result.stderr));
    let text = std::fs::read_to_string(dir.path().join("validate.csv")).unwrap();
    let (header, data) = rows(&text);
    assert_eq!(data.len(), 4);
    let k = column(&header, "eta_corr_cf");
    assert!(data.iter().all(|r| r[k].parse::<f64>().unwrap() < 0.0));
}

#[test]
fn sweep_covers_formats_and_spans() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"grid": {"channels": 11}, "sweep": {"spans": [1, 10], "formats": ["qpsk", "gaussian"], "channels": [5]}}"#,
    );
    let result = run(&cfg, dir.path(), &["--command", "sweep"]);
    assert!(result.status.success(), "{}", String::from_utf8_lossy(&result.stderr));
    let (_, data) = rows(&std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap());
    assert_eq!(data.len(), 4);
}
