use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use gnet::algebra::{atomic, iteration, parallel};
use gnet::guards::parse_condition;
use gnet::model::{Arc, WebService};
use gnet::registry::{read_service, write_service};
use tempfile::TempDir;

fn core_fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures").join(name)
}

fn gnet(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gnet")).current_dir(dir).env_remove("GNET_REGISTRY").args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// A directory holding the atomic services A and B.
fn leaves() -> TempDir {
    let dir = TempDir::new().unwrap();
    write_service(&dir.path().join("A.json"), &atomic("A", "a")).unwrap();
    write_service(&dir.path().join("B.json"), &atomic("B", "b")).unwrap();
    dir
}

fn put(dir: &Path, file: &str, ws: &WebService) {
    write_service(&dir.join(file), ws).unwrap();
}

fn gated_false() -> WebService {
    let mut a = atomic("G", "g");
    a.net.is.conditions.insert("t1".into(), parse_condition("false").unwrap());
    a
}

#[test]
fn validate_exit_codes() {
    let dir = leaves();
    let o = gnet(dir.path(), &["validate", "A.json"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));

    let mut bad = atomic("X", "x");
    bad.net.is.arcs.push(Arc::new("p1", "p2"));
    put(dir.path(), "X.json", &bad);
    let o = gnet(dir.path(), &["validate", "X.json"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("arc (p1, p2)"), "{}", stdout(&o));

    let o = gnet(dir.path(), &["validate", "missing.json"]);
    assert_eq!(code(&o), 2);
    assert_eq!(stderr(&o).matches("No such file").count(), 1, "{}", stderr(&o));
}

#[test]
fn compose_sequence_writes_the_skeleton() {
    let dir = leaves();
    std::fs::write(dir.path().join("s.expr"), "A >> B\n").unwrap();
    let o = gnet(dir.path(), &["compose", "s.expr", "--out", "s.json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let s = read_service(&dir.path().join("s.json")).unwrap();
    let is = &s.net.is;
    assert_eq!((is.places.len(), is.transitions.len(), is.arcs.len()), (3, 2, 4));
}

#[test]
fn compose_writes_intermediates_next_to_the_result() {
    let dir = leaves();
    std::fs::write(dir.path().join("s.expr"), "iter(A >> B)").unwrap();
    assert_eq!(code(&gnet(dir.path(), &["compose", "s.expr", "--out", "s.json"])), 0);
    assert!(dir.path().join("Seq_A_B_.json").is_file());
    // the result is usable from its own directory
    let o = gnet(dir.path(), &["analyze", "s.json"]);
    assert_eq!(code(&o), 0, "{}{}", stdout(&o), stderr(&o));
}

#[test]
fn compose_failures() {
    let dir = leaves();
    std::fs::write(dir.path().join("u.expr"), "A >> Nope").unwrap();
    let o = gnet(dir.path(), &["compose", "u.expr", "--out", "u.json"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("Nope"));

    std::fs::write(dir.path().join("e.expr"), "replace(A >> B, A, empty)").unwrap();
    let o = gnet(dir.path(), &["compose", "e.expr", "--out", "e.json"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).to_lowercase().contains("empty"), "{}", stderr(&o));
    assert!(!dir.path().join("e.json").exists());
}

#[test]
fn simulate_outcomes() {
    let dir = leaves();
    std::fs::write(dir.path().join("s.expr"), "A >> B").unwrap();
    gnet(dir.path(), &["compose", "s.expr", "--out", "s.json"]);
    let o = gnet(dir.path(), &["simulate", "s.json", "--trace-json", "t.json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).ends_with("outcome: Goal\n"));
    let trace: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("t.json")).unwrap()).unwrap();
    let nested: Vec<&str> =
        trace.as_array().unwrap().iter().filter(|e| e["depth"] == 1).map(|e| e["service"].as_str().unwrap()).collect();
    assert_eq!(nested, ["A", "B"]);

    put(dir.path(), "G.json", &gated_false());
    assert_eq!(code(&gnet(dir.path(), &["simulate", "G.json"])), 1);

    put(dir.path(), "I.json", &iteration(&atomic("A", "a")));
    assert_eq!(code(&gnet(dir.path(), &["simulate", "I.json", "--max-steps", "20"])), 3);
}

#[test]
fn seeded_simulation_is_reproducible() {
    let dir = leaves();
    put(dir.path(), "P.json", &parallel(&atomic("A", "a"), &atomic("B", "b")));
    let args = ["simulate", "P.json", "--policy", "random", "--seed", "11"];
    let (a, b) = (gnet(dir.path(), &args), gnet(dir.path(), &args));
    assert_eq!(code(&a), 0);
    assert_eq!(stdout(&a), stdout(&b));
}

#[test]
fn simulate_with_arguments() {
    let dir = TempDir::new().unwrap();
    std::fs::copy(core_fixture("order_source.json"), dir.path().join("cb.json")).unwrap();
    let o = gnet(dir.path(), &["simulate", "cb.json", "--args", "[1, false]"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("T7"));
    assert_eq!(code(&gnet(dir.path(), &["simulate", "cb.json"])), 1);
    assert_eq!(code(&gnet(dir.path(), &["simulate", "cb.json", "--args", "{"])), 2);
}

#[test]
fn analyze_exit_codes() {
    let dir = leaves();
    put(dir.path(), "I.json", &iteration(&atomic("A", "a")));
    let o = gnet(dir.path(), &["analyze", "I.json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("deadlocks: 0\n"));

    put(dir.path(), "G.json", &gated_false());
    let o = gnet(dir.path(), &["analyze", "G.json"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("deadlocks: 1\n"));

    let o = gnet(dir.path(), &["analyze", "I.json", "--max-states", "3"]);
    assert_eq!(code(&o), 4);
    assert!(stdout(&o).contains("truncated: true"));

    assert_eq!(code(&gnet(dir.path(), &["analyze", "I.json", "--max-states", "0"])), 2);
}

#[test]
fn analysis_is_deterministic_and_can_go_to_a_file() {
    let dir = leaves();
    put(dir.path(), "P.json", &parallel(&atomic("A", "a"), &atomic("B", "b")));
    let a = gnet(dir.path(), &["analyze", "P.json", "--out", "r1.txt"]);
    let b = gnet(dir.path(), &["analyze", "P.json", "--out", "r2.txt"]);
    assert_eq!((code(&a), code(&b)), (0, 0));
    let read = |f: &str| std::fs::read_to_string(dir.path().join(f)).unwrap();
    assert_eq!(read("r1.txt"), read("r2.txt"));
    assert!(read("r1.txt").starts_with("states: "));
}

#[test]
fn registry_from_flag_and_environment() {
    let lib = leaves();
    let work = TempDir::new().unwrap();
    std::fs::write(work.path().join("s.expr"), "alt(A, B)").unwrap();
    let lib_path = lib.path().to_str().unwrap();
    let o = gnet(work.path(), &["--registry", lib_path, "compose", "s.expr", "--out", "s.json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));

    let o = Command::new(env!("CARGO_BIN_EXE_gnet"))
        .current_dir(work.path())
        .env("GNET_REGISTRY", lib_path)
        .args(["analyze", "s.json"])
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    // without the leaves the invocations cannot be resolved
    assert_eq!(code(&gnet(work.path(), &["analyze", "s.json"])), 1);
}

/// Whitespace dropped and `l` read as `1`, as the listing typesets both alike.
fn normalize(text: &str) -> String {
    text.chars().filter(|c| !c.is_whitespace()).map(|c| if c == 'l' { '1' } else { c }).collect()
}

#[test]
fn export_formats() {
    let dir = TempDir::new().unwrap();
    std::fs::copy(core_fixture("order_flat.json"), dir.path().join("flat.json")).unwrap();
    let o = gnet(dir.path(), &["export", "flat.json", "prod", "--out", "out.prod"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let golden = std::fs::read_to_string(core_fixture("order.prod")).unwrap();
    assert_eq!(normalize(&std::fs::read_to_string(dir.path().join("out.prod")).unwrap()), normalize(&golden));

    std::fs::copy(core_fixture("command_books.json"), dir.path().join("cb.json")).unwrap();
    let o = gnet(dir.path(), &["export", "cb.json", "dot"]);
    assert_eq!(code(&o), 0);
    // three places and two transitions
    assert_eq!(stdout(&o).matches("[shape=").count(), 5);
    assert_eq!(stdout(&o).matches(" -> ").count(), 4);

    let o = gnet(dir.path(), &["export", "cb.json", "prod"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).matches("#endtr").count(), 5);

    assert_eq!(code(&gnet(dir.path(), &["export", "cb.json", "svg"])), 2);
    assert_eq!(code(&gnet(dir.path(), &["export", "flat.json", "dot"])), 2);
}
