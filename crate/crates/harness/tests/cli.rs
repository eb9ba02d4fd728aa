use std::path::Path;
use std::process::{Command, Output};

fn budgetmax(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_budgetmax"))
        .args(args)
        .current_dir(dir)
        .env("RUST_LOG", "error")
        .output()
        .unwrap()
}

const SMALL: &str = r#"{"products": 3, "candidates": 16, "network": {"kind": "random", "power": 6}, "samples": 64}"#;

#[test]
fn optimize_writes_results_and_allocations() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.json"), SMALL).unwrap();
    let out = budgetmax(&["optimize", "--config", "c.json", "--out", "o", "--algo", "budgetmax", "--algo", "lazy"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("o/results.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.starts_with("algorithm,"));
    let alloc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("o/allocation-budgetmax.json")).unwrap()).unwrap();
    let alloc = alloc.as_array().unwrap();
    assert!(!alloc.is_empty());
    assert!(alloc[0].get("product").is_some() && alloc[0].get("node").is_some());
}

#[test]
fn invalid_config_exits_with_code_2() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("neg.json"), r#"{"delta": -0.1}"#).unwrap();
    std::fs::write(dir.path().join("typo.json"), r#"{"prodcts": 4}"#).unwrap();
    for file in ["neg.json", "typo.json"] {
        let out = budgetmax(&["optimize", "--config", file, "--out", "o"], dir.path());
        assert_eq!(out.status.code(), Some(2), "{file}");
    }
}

#[test]
fn malformed_cascades_exit_nonzero_with_line_number() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.txt"), "0; 1:0.0,2:1.0\n0; 3:2.0,4:1.0\n").unwrap();
    std::fs::write(dir.path().join("a.json"), r#"[{"product": 0, "node": 1}]"#).unwrap();
    let out = budgetmax(&["evaluate", "--cascades", "c.txt", "--allocation", "a.json"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn evaluate_prints_heldout_value() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.txt"), "0; 1:0.0,2:1.0,3:2.0\n").unwrap();
    std::fs::write(dir.path().join("a.json"), r#"[{"product": 0, "node": 1}]"#).unwrap();
    let out = budgetmax(&["evaluate", "--cascades", "c.txt", "--allocation", "a.json"], dir.path());
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "2");
}

#[test]
fn generated_assets_feed_optimize() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.json"), SMALL).unwrap();
    let out = budgetmax(&["generate", "--config", "c.json", "--out", "assets"], dir.path());
    assert!(out.status.success());
    assert!(dir.path().join("assets/manifest.json").exists());
    assert!(dir.path().join("assets/product-002.net").exists());

    let with_assets = SMALL.trim_end_matches('}').to_string() + r#", "assets": "assets"}"#;
    std::fs::write(dir.path().join("d.json"), with_assets).unwrap();
    let a = budgetmax(&["optimize", "--config", "c.json", "--out", "a", "--algo", "lazy"], dir.path());
    let b = budgetmax(&["optimize", "--config", "d.json", "--out", "b", "--algo", "lazy"], dir.path());
    assert!(a.status.success() && b.status.success(), "{}", String::from_utf8_lossy(&b.stderr));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn brute_check_reports_no_violations() {
    let dir = tempfile::tempdir().unwrap();
    let out = budgetmax(&["brute-check", "--mode", "budgeted", "--count", "5", "--delta", "0.1", "--out", "b"], dir.path());
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("bound violations 0"));
    assert_eq!(std::fs::read_to_string(dir.path().join("b/brute.csv")).unwrap().lines().count(), 6);
}
