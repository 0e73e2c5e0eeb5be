use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use klwl_core::graph::parse_graph;
use serde_json::Value;
use tempfile::TempDir;

fn klwl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_klwl"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn gen(dir: &Path, family: &str, name: &str) -> PathBuf {
    let p = dir.join(name);
    let out = klwl(&["gen", family, "-o", p.to_str().unwrap()]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn gen_writes_parseable_files() {
    let d = TempDir::new().unwrap();
    let rook =
        parse_graph(&std::fs::read_to_string(gen(d.path(), "rook4", "r.g")).unwrap()).unwrap();
    assert_eq!((rook.node_count(), rook.edge_count()), (16, 48));
    let c6 =
        parse_graph(&std::fs::read_to_string(gen(d.path(), "cycle:6", "c.g")).unwrap()).unwrap();
    assert_eq!(c6, klwl_core::gen::cycle(6).unwrap());
    let t = parse_graph(
        &std::fs::read_to_string(gen(d.path(), "cfi:chi:clique:3:twisted", "t.g")).unwrap(),
    )
    .unwrap();
    assert_eq!(t.node_count(), 18);
}

#[test]
fn gen_rejects_bad_family() {
    let out = klwl(&["gen", "cycle:two"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn compare_exit_codes() {
    let d = TempDir::new().unwrap();
    let (r, sh) = (
        gen(d.path(), "rook4", "r.g"),
        gen(d.path(), "shrikhande", "s.g"),
    );
    let out = klwl(&[
        "compare",
        s(&r),
        s(&sh),
        "--k",
        "1",
        "--l",
        "2",
        "--variant",
        "fwl",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["decision"]["distinguished"], true);
    let out = klwl(&[
        "compare",
        s(&r),
        s(&sh),
        "--k",
        "2",
        "--l",
        "0",
        "--variant",
        "fwl",
    ]);
    assert_eq!(out.status.code(), Some(0));

    let c6 = klwl_core::gen::cycle(6).unwrap();
    let p = d.path().join("p.g");
    std::fs::write(&p, c6.permute(&[3, 0, 5, 1, 4, 2]).unwrap().to_edge_list()).unwrap();
    let c = gen(d.path(), "cycle:6", "c.g");
    for (k, l, v) in [
        ("1", "0", "wl"),
        ("2", "1", "fwl"),
        ("3", "0", "wl"),
        ("1", "2", "wl"),
    ] {
        let out = klwl(&["compare", s(&c), s(&p), "--k", k, "--l", l, "--variant", v]);
        assert_eq!(out.status.code(), Some(0), "({k},{l})-{v}");
    }
}

#[test]
fn compare_errors_exit_two_without_decision() {
    let d = TempDir::new().unwrap();
    let (r, sh) = (
        gen(d.path(), "rook4", "r.g"),
        gen(d.path(), "shrikhande", "s.g"),
    );
    let out = klwl(&[
        "compare",
        s(&r),
        s(&sh),
        "--k",
        "2",
        "--l",
        "2",
        "--budget",
        "1000",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let v = json(&out);
    assert!(v["decision"].is_null());
    assert_eq!(v["config"]["budget"], 1000);
    assert!(v["error"].as_str().unwrap().contains("budget"));

    let out = klwl(&[
        "compare",
        s(&r),
        s(&sh),
        "--l",
        "1",
        "--pooling",
        "lt",
        "--scope",
        "khop:1",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(json(&out)["error"].as_str().unwrap().contains("LT"));

    let missing = d.path().join("missing.g");
    let out = klwl(&["compare", s(&r), s(&missing)]);
    assert_eq!(out.status.code(), Some(2));
}

fn without_timing(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("wall_ms");
    v.as_object_mut().unwrap().remove("config");
    v
}

#[test]
fn reports_are_reproducible_and_thread_independent() {
    let d = TempDir::new().unwrap();
    let (r, sh) = (
        gen(d.path(), "rook4", "r.g"),
        gen(d.path(), "shrikhande", "s.g"),
    );
    let args = [
        "compare",
        s(&r),
        s(&sh),
        "--k",
        "2",
        "--l",
        "1",
        "--select",
        "random:0.4",
        "--seed",
        "9",
    ];
    let a = json(&klwl(&args));
    let b = json(&klwl(&args));
    assert_eq!(a["flags"]["sampled"], true);
    assert_eq!(a["config"]["selection"], "random:0.4:9");
    let strip = |v: &Value| {
        let mut v = v.clone();
        v.as_object_mut().unwrap().remove("wall_ms");
        v
    };
    assert_eq!(strip(&a), strip(&b));

    let mut threaded = vec!["--threads", "3"];
    threaded.extend_from_slice(&args);
    let c = json(&klwl(&threaded));
    assert_eq!(c["config"]["threads"], 3);
    assert_eq!(without_timing(a), without_timing(c));
}

#[test]
fn report_has_schema_fields() {
    let d = TempDir::new().unwrap();
    let c = gen(d.path(), "cycle:6", "c.g");
    let t = gen(d.path(), "union:cycle:3:cycle:3", "t.g");
    let v = json(&klwl(&[
        "compare",
        s(&c),
        s(&t),
        "--l",
        "1",
        "--select",
        "cluster:3",
    ]));
    for key in [
        "config",
        "g",
        "h",
        "decision",
        "iterations",
        "labeled_copies",
        "tracked_tuples",
        "wall_ms",
        "flags",
    ] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["flags"]["heuristic"], true);
    let schema: Value =
        serde_json::from_str(include_str!("../../../docs/report-schema.json")).unwrap();
    let required = schema["required"].as_array().unwrap();
    assert_eq!(required.len(), v.as_object().unwrap().len());
}

#[test]
fn matrix_reproduces_tables() {
    let d = TempDir::new().unwrap();
    let c = gen(d.path(), "cycle:6", "c.g");
    let t = gen(d.path(), "union:cycle:3:cycle:3", "t.g");
    let (r, sh) = (
        gen(d.path(), "rook4", "r.g"),
        gen(d.path(), "shrikhande", "s.g"),
    );
    let m5 = json(&klwl(&["matrix", s(&c), s(&t), "--format", "json"]));
    assert_eq!(
        m5["matrix"],
        serde_json::json!([[false, true, true], [true, true, true]])
    );
    let m6 = json(&klwl(&["matrix", s(&r), s(&sh), "--format", "json"]));
    assert_eq!(
        m6["matrix"],
        serde_json::json!([[false, false, true], [false, true, true]])
    );
    let same = json(&klwl(&[
        "matrix",
        s(&r),
        s(&r),
        "--format",
        "json",
        "--k-range",
        "1..2",
        "--l-range",
        "0..2",
    ]));
    assert_eq!(
        same["matrix"],
        serde_json::json!([[false, false, false], [false, false, false]])
    );

    let csv = klwl(&["matrix", s(&c), s(&t), "--format", "csv"]);
    assert_eq!(
        String::from_utf8(csv.stdout).unwrap(),
        "k\\l,0,1,2\n1,0,1,1\n2,1,1,1\n"
    );
    let ascii = String::from_utf8(klwl(&["matrix", s(&c), s(&t)]).stdout).unwrap();
    assert_eq!(ascii.matches('✓').count(), 5);
    assert_eq!(ascii.matches('✗').count(), 1);
}

#[test]
fn count_and_oracle() {
    let d = TempDir::new().unwrap();
    let (r, sh) = (
        gen(d.path(), "rook4", "r.g"),
        gen(d.path(), "shrikhande", "s.g"),
    );
    let v = json(&klwl(&[
        "count",
        s(&r),
        "--patterns",
        "triangle,chordal",
        "--mode",
        "noninduced",
    ]));
    assert_eq!(v["counts"]["triangle"], 32);
    assert_eq!(v["counts"]["chordal"], 48);

    let out = klwl(&["iso-oracle", s(&r), s(&sh)]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["isomorphic"], false);
    let (a, b) = (
        gen(d.path(), "cfi:chi:clique:3", "a.g"),
        gen(d.path(), "cfi:chi:clique:3:twists=2", "b.g"),
    );
    assert_eq!(klwl(&["iso-oracle", s(&a), s(&b)]).status.code(), Some(0));
}
