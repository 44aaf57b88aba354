use std::path::Path;
use std::process::{Command, Output};

fn subrip(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_subrip"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

const SMALL_EXACT: &str = r#"{"grid": {"n": [8], "k": [2], "q": [4]}, "trials": 3}"#;

#[test]
fn same_seed_gives_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "exact.json", SMALL_EXACT);
    let a = subrip(&["rip-exact", "--config", &cfg, "--seed", "11"]);
    let b = subrip(&["rip-exact", "--config", &cfg, "--seed", "11", "--threads", "1"]);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let c = subrip(&["rip-exact", "--config", &cfg, "--seed", "12"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn csv_output_carries_schema_header() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "exact.json", SMALL_EXACT);
    let out = dir.path().join("out.csv");
    let o = subrip(&["rip-exact", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# schema: subrip/rip-exact/v1"));
    assert!(lines.next().unwrap().starts_with("# config_hash: "));
    assert!(lines.next().unwrap().starts_with("# rng: "));
    assert!(lines.next().unwrap().starts_with("n,k,q,"));
    assert_eq!(lines.count(), 3);
}

#[test]
fn json_format_flag() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "exact.json", SMALL_EXACT);
    let o = subrip(&["rip-exact", "--config", &cfg, "--format", "json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["schema"], "subrip/rip-exact/v1");
    assert_eq!(v["rows"].as_array().unwrap().len(), 3);
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad_n = write_config(dir.path(), "n.json", r#"{"grid": {"n": [12]}, "unitary": "hadamard"}"#);
    let unknown = write_config(dir.path(), "u.json", r#"{"bogus": 1}"#);
    let other = write_config(dir.path(), "o.json", r#"{"experiment": "tail-probe"}"#);
    for cfg in [&bad_n, &unknown, &other] {
        let o = subrip(&["rip-exact", "--config", cfg]);
        assert_eq!(o.status.code(), Some(2), "{cfg}");
        assert!(!o.stderr.is_empty());
    }
    let missing = subrip(&["rip-exact", "--config", "/nonexistent/config.json"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn budget_overflow_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "big.json",
        r#"{"grid": {"n": [64], "k": [16], "q": [8]}, "trials": 1}"#,
    );
    let o = subrip(&["rip-exact", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
}
