use std::process::{Command, Output};

use serde::Deserialize;

fn trispec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trispec"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[derive(Debug, Deserialize, PartialEq)]
struct Entry {
    label: String,
    length: f64,
    multiplicity: usize,
    exactness: String,
    source: String,
}

#[derive(Debug, Deserialize, PartialEq)]
struct CheckRow {
    name: String,
    status: String,
    details: String,
}

#[derive(Debug, Deserialize)]
struct Report {
    signature: serde_json::Value,
    head: Vec<Entry>,
    checks: Vec<CheckRow>,
    meta: serde_json::Value,
}

#[test]
fn head_json_has_schema_and_is_deterministic() {
    let a = trispec(&["head", "4", "5", "6", "--brute", "--format", "json"]);
    let b = trispec(&["head", "4", "5", "6", "--brute", "--format", "json"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let r: Report = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(r.signature["r"], 4);
    assert_eq!(r.signature["q"], 6);
    assert!(r.meta["version"].is_string());
    assert!(r.head.iter().any(|e| e.source == "predicted"));
    assert!(r.head.iter().any(|e| e.source == "brute-force"));
    assert!(
        r.checks.iter().all(|c| c.status != "fail"),
        "{:?}",
        r.checks
    );
    let l1 = r.head.iter().find(|e| e.label == "l1").unwrap();
    assert_eq!(l1.multiplicity, 2);
    assert_eq!(l1.exactness, "exact");
    // 12 significant digits
    assert_eq!(l1.length.to_string().trim_start_matches("2.").len(), 11);
}

#[test]
fn ideal_vertex_prints_inf() {
    let o = trispec(&["head", "3", "3", "inf", "--format", "json"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r: Report = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r.signature["q"], "inf");
}

#[test]
fn forms_table_csv_row() {
    let o = trispec(&["forms", "table", "3", "3", "6", "--format", "csv"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.lines().any(|l| l.starts_with("L10,1.8660254")), "{s}");
}

#[test]
fn rho_star_text_and_svg() {
    let dir = std::env::temp_dir().join(format!("trispec-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let svg = dir.join("ball.svg");
    let o = trispec(&[
        "graph",
        "rho-star",
        "3",
        "3",
        "6",
        "--n",
        "5",
        "--svg",
        svg.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("n=5  cosh = 6.0980762"));
    assert!(std::fs::read_to_string(&svg).unwrap().starts_with("<svg"));
}

#[test]
fn exit_codes() {
    assert_eq!(trispec(&["head", "2", "3", "6"]).status.code(), Some(2));
    assert_eq!(trispec(&["head", "3", "3", "x"]).status.code(), Some(2));
    assert_eq!(trispec(&["bogus"]).status.code(), Some(2));
    assert_eq!(
        trispec(&["head", "3", "3", "6", "--brute", "--max-word", "17"])
            .status
            .code(),
        Some(3)
    );
    assert_eq!(
        trispec(&["graph", "rho-star", "3", "3", "6", "--n", "5", "--ball", "7"])
            .status
            .code(),
        Some(3)
    );
}

#[test]
fn validate_small_grid_is_clean() {
    let o = trispec(&["validate", "--rmax", "4", "--qmax", "6"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let s = stdout(&o);
    assert!(s.contains("(3,3,6) ok"));
    assert!(s.contains("0 head mismatches"));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = std::env::temp_dir().join(format!("trispec-cfg-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("run.conf");
    std::fs::write(&cfg, "format = json\nmax_word = 9\n").unwrap();
    let c = cfg.to_str().unwrap();
    let o = trispec(&["--config", c, "head", "3", "3", "6"]);
    let r: Report = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r.meta["config"]["max_word"], 9);
    let o = trispec(&[
        "--config",
        c,
        "head",
        "3",
        "3",
        "6",
        "--max-word",
        "11",
        "--format",
        "text",
    ]);
    assert!(stdout(&o).starts_with("Lsp head of (3,3,6)"));
    std::fs::write(&cfg, "colour = red\n").unwrap();
    assert_eq!(
        trispec(&["--config", c, "head", "3", "3", "6"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn out_flag_writes_file() {
    let dir = std::env::temp_dir().join(format!("trispec-out-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join("head.csv");
    let o = trispec(&[
        "head",
        "3",
        "4",
        "5",
        "--format",
        "csv",
        "--out",
        p.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let s = std::fs::read_to_string(&p).unwrap();
    assert!(s.starts_with("source,label,length,multiplicity,exactness"));
}
