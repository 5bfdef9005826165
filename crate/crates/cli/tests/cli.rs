use std::fs;
use std::path::PathBuf;
use std::process::Command;

use tempfile::TempDir;

use rooted_gt::systems::{fixtures, tree_system};
use rooted_gt::text::{parse_document, parse_graph, print_graph, print_rule, print_system};

fn rgt() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rgt"))
}

fn stdout(cmd: &mut Command) -> (String, i32) {
    let out = cmd.output().unwrap();
    (String::from_utf8(out.stdout).unwrap(), out.status.code().unwrap())
}

fn write(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, body).unwrap();
    p
}

fn gen(dir: &TempDir, name: &str, args: &[&str]) -> PathBuf {
    let (text, code) = stdout(rgt().arg("gen").args(args));
    assert_eq!(code, 0);
    write(dir, name, &text)
}

#[test]
fn recognize_list_and_grid() {
    let dir = TempDir::new().unwrap();
    let list = gen(&dir, "list.graph", &["--family", "list", "--size", "1000"]);
    let (text, code) = stdout(rgt().args(["recognize", "--system", "tree", "--root", "first", "--graph"]).arg(&list));
    assert_eq!((text.lines().next(), code), (Some("ACCEPT"), 0));

    let grid = gen(&dir, "grid.graph", &["--family", "grid", "--size", "10", "--root", "first"]);
    let (text, code) = stdout(rgt().args(["recognize", "--system", "tree", "--graph"]).arg(&grid));
    assert_eq!((text.lines().next(), code), (Some("REJECT"), 1));
}

#[test]
fn mutated_tree_is_rejected() {
    let dir = TempDir::new().unwrap();
    let g = gen(&dir, "m.graph", &["--family", "tree", "--size", "15", "--root", "first", "--mutate", "cross"]);
    let (text, code) = stdout(rgt().args(["recognize", "--system", "tree", "--format", "summary", "--graph"]).arg(&g));
    assert_eq!((text.trim(), code), ("REJECT", 1));
}

#[test]
fn pairs_summary_lines() {
    let (text, code) = stdout(rgt().args(["pairs", "--system", "tree-grammar-inverse", "--format", "summary"]));
    assert_eq!(text.trim(), "pairs=0 strong=0 joinable=0 nonjoinable=0 unknown=0 conclusion=locally_confluent");
    assert_eq!(code, 0);
    let (text, code) = stdout(rgt().args(["pairs", "--system", "tree", "--garbage", "forest", "--format", "summary"]));
    assert!(text.trim().ends_with("conclusion=inconclusive"), "{text}");
    assert_eq!(code, 0);
    let (text, _) = stdout(rgt().args(["pairs", "--system", "efd-inverse", "--garbage", "cycles-have-t"]));
    assert!(text.contains("\npair 1 seq^-1 seq^-1\n") || text.starts_with("pair 1 seq^-1 seq^-1\n"));
    assert!(text.lines().last().unwrap().starts_with("pairs="));
}

#[test]
fn reduce_with_trace() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "in.graph", &print_graph(None, &fixtures::tree_reduction_input()));
    let (text, code) = stdout(rgt().args(["reduce", "--system", "tree", "--trace", "--graph"]).arg(&g));
    assert_eq!(code, 0);
    assert!(text.starts_with("# normal form 0: steps=7 fast=true\n"), "{text}");
    let names: Vec<&str> =
        text.lines().filter_map(|l| l.strip_prefix("# step ")).map(|l| l.split([' ', ':']).nth(1).unwrap()).collect();
    assert_eq!(names, ["r2", "r1", "r0", "r2", "r2", "r1", "r1"]);
    let body: String = text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
    let (_, nf) = parse_graph(&body).unwrap();
    assert_eq!(nf.node_count(), 1);
    assert_eq!(nf.root_count(), 1);
}

#[test]
fn reduce_budget_is_an_error() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "in.graph", &print_graph(None, &fixtures::tree_reduction_input()));
    let (_, code) = stdout(rgt().args(["reduce", "--system", "tree", "--max-steps", "3", "--graph"]).arg(&g));
    assert_eq!(code, 2);
}

#[test]
fn match_and_apply() {
    let dir = TempDir::new().unwrap();
    let sys = tree_system();
    let r2 = write(&dir, "r2.rule", &print_rule(&sys.rules[2]));
    let g = write(&dir, "in.graph", &print_graph(None, &fixtures::tree_reduction_input()));
    let (text, code) =
        stdout(rgt().args(["match", "--rooted", "--format", "summary", "--rule"]).arg(&r2).arg("--graph").arg(&g));
    assert_eq!((text.trim(), code), ("matches=1", 0));
    let (text, _) = stdout(rgt().args(["match", "--rule"]).arg(&r2).arg("--graph").arg(&g));
    assert_eq!(text.lines().filter(|l| l.starts_with("match ")).count(), 1);
    let (text, code) = stdout(rgt().args(["apply", "--match", "all", "--rule"]).arg(&r2).arg("--graph").arg(&g));
    assert_eq!(code, 0);
    assert_eq!(text.matches("# match").count(), 1);
    let (_, code) = stdout(rgt().args(["apply", "--match", "9", "--rule"]).arg(&r2).arg("--graph").arg(&g));
    assert_eq!(code, 2);
}

#[test]
fn validate_reports_problems() {
    let dir = TempDir::new().unwrap();
    let sys = tree_system();
    let good = write(
        &dir,
        "tree.rules",
        &print_system(Some("tree"), Some(&sys.alphabet), &sys.rules, sys.accept.as_ref(), None),
    );
    let (text, code) = stdout(rgt().arg("validate").arg(&good));
    assert_eq!(code, 0);
    assert!(text.starts_with("ok graphs=1 rules=3"));
    let bad = write(&dir, "bad.graph", "graph {\n  node 1 [label=□, root=0]\n  edge 1: 1 -> 2\n}\n");
    let (text, code) = stdout(rgt().arg("validate").arg(&bad));
    assert_eq!(code, 1);
    assert!(text.contains(":3:") || text.contains("line 3"), "{text}");
    let (_, code) = stdout(rgt().arg("validate").arg(dir.path().join("missing")));
    assert_eq!(code, 2);
}

#[test]
fn encode_graph_and_rule() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "in.graph", &print_graph(None, &fixtures::single_root()));
    let (text, code) = stdout(rgt().args(["encode", "--graph"]).arg(&g));
    assert_eq!(code, 0);
    let doc = parse_document(&text).unwrap();
    let e = &doc.graphs[0];
    assert_eq!((e.node_count(), e.edge_count()), (1, 2));
    let sys = tree_system();
    let r = write(&dir, "r0.rule", &print_rule(&sys.rules[0]));
    let (text, code) = stdout(rgt().args(["encode", "--rule"]).arg(&r));
    assert_eq!(code, 0);
    let doc = parse_document(&text).unwrap();
    assert!(doc.rules[0].is_standard());
    let (_, code) = stdout(rgt().arg("encode"));
    assert_eq!(code, 2);
}

#[test]
fn gen_round_trips() {
    for fam in ["list", "binary", "tree", "grid", "star", "cycle"] {
        let (text, code) =
            stdout(rgt().args(["gen", "--family", fam, "--size", "6", "--seed", "3", "--root", "first"]));
        assert_eq!(code, 0, "{fam}");
        let (_, g) = parse_graph(&text).unwrap();
        assert_eq!(print_graph(None, &g), text);
    }
    let (_, code) = stdout(rgt().args(["gen", "--family", "list", "--size", "0"]));
    assert_eq!(code, 2);
}

#[test]
fn bench_writes_csv() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("out.csv");
    let (_, code) =
        stdout(rgt().args(["bench", "--family", "list", "--sizes", "100:300:100", "--parallel", "--csv"]).arg(&csv));
    assert_eq!(code, 0);
    let text = fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "family,size,steps,wall_ns,visited_items");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("list,100,198,"));
    let (_, code) = stdout(rgt().args(["bench", "--family", "list", "--sizes", "3:1:1"]));
    assert_eq!(code, 2);
}

#[test]
fn usage_errors_exit_two() {
    for args in
        [&["frobnicate"][..], &["recognize", "--system", "tree"], &["pairs", "--system", "tree", "--garbage", "blue"]]
    {
        let (_, code) = stdout(rgt().args(args));
        assert_eq!(code, 2, "{args:?}");
    }
}
