use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpStream;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};
use std::sync::OnceLock;

use mariomix_core::{bundled_levels, load_dataset, ReplayFile};
use serde_json::Value;

fn mariomix(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mariomix")).args(args).output().unwrap()
}

fn error_code(out: &Output) -> String {
    let line = String::from_utf8_lossy(&out.stderr);
    let v: Value = serde_json::from_str(line.trim()).expect("stderr is one JSON line");
    v["error"]["code"].as_str().unwrap().to_string()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// A small dataset shared by the tests in this file.
fn dataset() -> &'static PathBuf {
    static DS: OnceLock<(tempfile::TempDir, PathBuf)> = OnceLock::new();
    &DS.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("dataset.json");
        let out = mariomix(&["build-dataset", "--out", p(&path), "--explore-budget", "4000", "--runs", "2"]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        (dir, path)
    })
    .1
}

#[test]
fn build_reports_and_repeats_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    let args = |out: &Path| {
        let out = p(out).to_string();
        move || mariomix(&["build-dataset", "--out", &out, "--explore-budget", "3000", "--runs", "1", "--seed", "9"])
    };
    let first = args(&a)();
    assert!(first.status.success());
    assert!(args(&b)().status.success());
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

    let lines: Vec<Value> = String::from_utf8(first.stdout)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    let count = |event: &str| lines.iter().filter(|l| l["event"] == event).count();
    assert_eq!((count("explore"), count("model"), count("solve"), count("done")), (3, 1, 11, 1));
    assert!(lines.iter().filter(|l| l["event"] == "solve").all(|l| l["iterations"].as_u64().unwrap() > 0));
    assert_eq!(load_dataset(&a).unwrap().len(), 11);
}

#[test]
fn build_validates_arguments() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.json");
    let r = mariomix(&["build-dataset", "--out", p(&out), "--explore-budget", "0"]);
    assert!(!r.status.success());
    assert_eq!(error_code(&r), "InvalidArgument");
    assert!(!out.exists());
    let r = mariomix(&["build-dataset", "--out", p(&out), "--gamma", "1.5"]);
    assert_eq!(error_code(&r), "InvalidArgument");

    std::fs::write(dir.path().join("broken.txt"), "..\n.x\n").unwrap();
    let r = mariomix(&["build-dataset", "--out", p(&out), "--levels", p(dir.path())]);
    assert_eq!(error_code(&r), "LevelParse");
    assert!(String::from_utf8_lossy(&r.stderr).contains("broken.txt"));
    let r = mariomix(&["build-dataset"]);
    assert_eq!((r.status.code(), error_code(&r).as_str()), (Some(2), "Usage"));
}

#[test]
fn simulate_policy_and_uniform_assignment_agree() {
    let dir = tempfile::tempdir().unwrap();
    let (single, mixed) = (dir.path().join("single.json"), dir.path().join("mixed.json"));
    let assignment = dir.path().join("assign.json");
    std::fs::write(
        &assignment,
        r#"{"level_id":"quarry","resolution":"medium","slots":["Stroller","Stroller","Stroller","Stroller","Stroller"]}"#,
    )
    .unwrap();
    let ds = p(dataset());
    let r = mariomix(&["simulate", "--dataset", ds, "--level", "quarry", "--policy", "Stroller", "--seed", "4", "--out", p(&single)]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let r = mariomix(&["simulate", "--dataset", ds, "--assignment", p(&assignment), "--seed", "4", "--out", p(&mixed)]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));

    let level = &bundled_levels()[1];
    let load = |path: &Path| {
        ReplayFile::from_json(&std::fs::read_to_string(path).unwrap())
            .unwrap()
            .into_replay(level)
            .unwrap()
    };
    let (a, b) = (load(&single), load(&mixed));
    assert_eq!(a.frames, b.frames);
    assert_eq!(a.actions, b.actions);
    assert_eq!(a.seed, 4);
    assert_eq!(b.segment_marks.unwrap()[0], (0, 0));

    let r = mariomix(&["simulate", "--dataset", ds, "--level", "quarry", "--policy", "Nobody", "--out", p(&single)]);
    assert_eq!(error_code(&r), "UnknownPolicyName");
    let r = mariomix(&["simulate", "--dataset", ds, "--level", "nowhere", "--policy", "Stroller", "--out", p(&single)]);
    assert_eq!(error_code(&r), "NotFound");
    let r = mariomix(&["simulate", "--dataset", p(&assignment), "--level", "quarry", "--policy", "Stroller", "--out", p(&single)]);
    assert_eq!(error_code(&r), "CorruptFile");
}

#[test]
fn clips_from_replays() {
    let dir = tempfile::tempdir().unwrap();
    let replay = dir.path().join("r.json");
    let clip = dir.path().join("c.json");
    let ds = p(dataset());
    // a short run only covers the start of the level
    let r = mariomix(&["simulate", "--dataset", ds, "--level", "meadow", "--policy", "Speedrunner", "--max-ticks", "30", "--out", p(&replay)]);
    assert!(r.status.success());
    let r = mariomix(&["clip", "--replay", p(&replay), "--resolution", "medium", "--segment", "0", "--out", p(&clip)]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&clip).unwrap()).unwrap();
    assert_eq!(v["start_tick"], 0);
    assert_eq!(v["segment_index"], 0);
    let r = mariomix(&["clip", "--replay", p(&replay), "--resolution", "medium", "--segment", "4", "--out", p(&clip)]);
    assert_eq!(error_code(&r), "SegmentNeverVisited");

    // a tampered replay fails its checksum
    let text = std::fs::read_to_string(&replay).unwrap();
    let mut file: Value = serde_json::from_str(&text).unwrap();
    file["checksum"] = Value::from("0000000000000000");
    std::fs::write(&replay, file.to_string()).unwrap();
    let r = mariomix(&["clip", "--replay", p(&replay), "--resolution", "low", "--segment", "0", "--out", p(&clip)]);
    assert_eq!(error_code(&r), "ChecksumMismatch");
}

fn http_get(addr: &str, path: &str) -> (u16, Value) {
    let mut s = TcpStream::connect(addr).unwrap();
    write!(s, "GET {path} HTTP/1.1\r\nHost: {addr}\r\nConnection: close\r\n\r\n").unwrap();
    let mut text = String::new();
    s.read_to_string(&mut text).unwrap();
    let status = text[9..12].parse().unwrap();
    let body = text.split("\r\n\r\n").nth(1).unwrap_or_default();
    (status, serde_json::from_str(body).unwrap_or(Value::Null))
}

#[test]
fn serve_answers_and_stops_on_interrupt() {
    let mut child = Command::new(env!("CARGO_BIN_EXE_mariomix"))
        .args(["serve", "--dataset", p(dataset())])
        .env("MARIOMIX_PORT", "0")
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    let mut stdout = BufReader::new(child.stdout.take().unwrap());
    let mut line = String::new();
    stdout.read_line(&mut line).unwrap();
    let v: Value = serde_json::from_str(&line).unwrap();
    let port = v["addr"].as_str().unwrap().rsplit(':').next().unwrap().to_string();
    let addr = format!("127.0.0.1:{port}");

    let (status, policies) = http_get(&addr, "/api/v1/policies");
    assert_eq!(status, 200);
    assert_eq!(policies.as_array().unwrap().len(), 11);
    let (status, levels) = http_get(&addr, "/api/v1/levels");
    assert_eq!((status, levels.as_array().unwrap().len()), (200, 3));

    let killed = Command::new("kill").args(["-INT", &child.id().to_string()]).status().unwrap();
    assert!(killed.success());
    let status = child.wait().unwrap();
    assert_eq!(status.code(), Some(0));
}

#[test]
fn serve_needs_a_dataset() {
    let r = mariomix(&["serve", "--dataset", "/nonexistent/dataset.json", "--port", "0"]);
    assert!(!r.status.success());
    assert_eq!(error_code(&r), "Io");
}
