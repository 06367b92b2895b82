use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_sstriage");

fn sstriage(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const THREAD: &str = "Zed Quill\n@zed_quill\nthe first post\n9:02 AM · Jun 3, 2024\nOona Brix\n@oona_brix\nReplying to @zed_quill\nno it is not\n9:40 AM · Jun 3, 2024\nZed Quill\n@zed_quill\nyes it is\n10:15 AM · Jun 3, 2024 · 1.2M Views\n";
const STATUS: &str = "Ada Vex @ada_vex · Feb 9, 2023\na plain status update\n";

fn sidecars(files: &[(&str, &[u8])]) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    for (name, bytes) in files {
        fs::write(dir.path().join(name), bytes).unwrap();
    }
    dir
}

fn records(path: &Path) -> Vec<serde_json::Value> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

#[test]
fn extract_three_sidecars() {
    let input = sidecars(&[("a.txt", STATUS.as_bytes()), ("b.txt", THREAD.as_bytes()), ("c.txt", STATUS.as_bytes())]);
    let out = tempfile::tempdir().unwrap();
    let o = sstriage(&["extract", "--sidecars", s(input.path()), "--out", s(out.path())]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let recs = records(&out.path().join("parses.jsonl"));
    let ids: Vec<_> = recs.iter().map(|r| r["screenshot_id"].as_str().unwrap()).collect();
    assert_eq!(ids, ["a", "b", "c"]);
    assert_eq!(recs[1]["structure"], "PnAn");
    assert_eq!(recs[0]["structure"], "P1A1");
    assert_eq!(fs::read_to_string(out.path().join("failures.jsonl")).unwrap(), "");
}

#[test]
fn unreadable_input_is_reported_not_fatal() {
    let input = sidecars(&[("a.txt", STATUS.as_bytes()), ("b.txt", b"\xff\xfe\x00"), ("c.txt", THREAD.as_bytes())]);
    let out = tempfile::tempdir().unwrap();
    let o = sstriage(&["extract", "--sidecars", s(input.path()), "--out", s(out.path())]);
    assert_eq!(code(&o), 0);
    assert_eq!(records(&out.path().join("parses.jsonl")).len(), 2);
    let failures = records(&out.path().join("failures.jsonl"));
    assert_eq!(failures.len(), 1);
    assert_eq!(failures[0]["screenshot_id"], "b");
    assert!(String::from_utf8_lossy(&o.stdout).contains("2 parsed, 1 failed"));
}

#[test]
fn thread_queries_in_unit_order() {
    let input = sidecars(&[("t.txt", THREAD.as_bytes())]);
    let out = tempfile::tempdir().unwrap();
    let o = sstriage(&["queries", "--sidecars", s(input.path()), "--out", s(out.path())]);
    assert_eq!(code(&o), 0);
    let text = fs::read_to_string(out.path().join("queries.tsv")).unwrap();
    let units: Vec<&str> = text.lines().map(|l| l.split('\t').nth(1).unwrap()).collect();
    assert_eq!(units, ["0", "0", "0", "1", "1", "1", "2", "2", "2"]);
    assert!(text.lines().next().unwrap().ends_with("\tzed_quill\t2024-06-03\tthe first post"));
}

#[test]
fn generate_then_evaluate() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    let o = sstriage(&["gen-fixtures", "--out", s(&corpus), "--seed", "11", "--count", "40"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report_dir = dir.path().join("report");
    let o = sstriage(&[
        "evaluate",
        "--sidecars",
        s(&corpus.join("sidecars")),
        "--annotations",
        s(&corpus.join("annotations.jsonl")),
        "--out",
        s(&report_dir),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let table = String::from_utf8_lossy(&o.stdout);
    assert!(table.starts_with("Category"), "{table}");
    assert!(table.contains("Grouping accuracy: 1.0000 (40/40)"), "{table}");
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(report_dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["macro"]["macro_f1"], 1.0);
    assert!(fs::read_to_string(report_dir.join("confusion.csv")).unwrap().starts_with("true\\predicted,"));
}

#[test]
fn config_and_schema_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = sstriage(&["gen-fixtures", "--out", s(dir.path())]);
    assert_eq!(code(&o), 2);
    let input = sidecars(&[("a.txt", STATUS.as_bytes())]);
    let o = sstriage(&["evaluate", "--sidecars", s(input.path()), "--out", s(dir.path())]);
    assert_eq!(code(&o), 2);
    let ann = dir.path().join("ann.jsonl");
    fs::write(&ann, "{\"schema_version\": 9}\n").unwrap();
    let o = sstriage(&["evaluate", "--sidecars", s(input.path()), "--annotations", s(&ann), "--out", s(dir.path())]);
    assert_eq!(code(&o), 2);
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "threads = 2\n").unwrap();
    let o = sstriage(&["extract", "--config", s(&cfg)]);
    assert_eq!(code(&o), 2);
}

#[test]
fn missing_files_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let o = sstriage(&["tally", s(&dir.path().join("none.jsonl"))]);
    assert_eq!(code(&o), 3);
    let input = sidecars(&[("a.txt", STATUS.as_bytes())]);
    let o = sstriage(&[
        "evaluate",
        "--sidecars",
        s(input.path()),
        "--annotations",
        s(&dir.path().join("none.jsonl")),
        "--out",
        s(dir.path()),
    ]);
    assert_eq!(code(&o), 3);
}

#[test]
fn config_file_paths_are_relative_to_it() {
    let dir = sidecars(&[("a.txt", STATUS.as_bytes())]);
    fs::write(dir.path().join("run.toml"), "sidecars = [\"a.txt\"]\nout = \"result\"\njobs = 2\n").unwrap();
    let o = sstriage(&["extract", "--config", s(&dir.path().join("run.toml"))]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(records(&dir.path().join("result/parses.jsonl")).len(), 1);
}

#[test]
fn tally_table() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("manifest.jsonl");
    let line = |id: &str, platform: &str, mode: &str, url: &str| {
        format!("{{\"schema_version\":1,\"screenshot_id\":\"{id}\",\"platform\":\"{platform}\",\"mode\":\"{mode}\",\"url\":\"{url}\",\"image_path\":\"{id}.png\",\"captured_at\":\"2023-11-02T14:05:00-04:00\",\"status\":\"Ok\"}}\n")
    };
    let text = line("a", "Twitter", "WebLight", "https://twitter.com/x_ab/status/1")
        + &line("b", "Twitter", "MobileDark", "https://twitter.com/x_ab/status/2")
        + &line("c", "Instagram", "WebLight", "https://www.instagram.com/p/Cxy12ab/");
    fs::write(&manifest, text).unwrap();
    let o = sstriage(&["tally", s(&manifest)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let table = String::from_utf8_lossy(&o.stdout);
    let rows: Vec<&str> = table.lines().map(|l| l.split_whitespace().next().unwrap_or("")).collect();
    assert_eq!(rows[1..], ["MD", "ML", "WD", "WL", "Platform"], "{table}");
}
