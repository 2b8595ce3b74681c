use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn mpld(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mpld")).args(args).output().expect("run mpld")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn two_vertex_conflict_all_algorithms() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("two.dg");
    fs::write(&input, "dg 1\nv 0\nv 1\nce 0 1\n").unwrap();
    for algo in ["exact", "sdp-backtrack", "sdp-greedy", "linear", "fm"] {
        let out = mpld(&["decompose", "--input", p(&input), "--algo", algo, "--no-timing"]);
        assert!(out.status.success(), "{algo}: {}", String::from_utf8_lossy(&out.stderr));
        let text = String::from_utf8(out.stdout).unwrap();
        assert!(text.ends_with("summary cn=0 st=0 cost=0 time_ms=0\n"), "{algo}: {text}");
    }
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let lay = dir.path().join("g.lay");
    let out = mpld(&[
        "gen",
        "--polygons",
        "150",
        "--density",
        "0.6",
        "--stitch-rate",
        "0.2",
        "--seed",
        "5",
        "--out",
        p(&lay),
    ]);
    assert!(out.status.success());
    let mut results = Vec::new();
    for (i, workers) in ["1", "4"].iter().enumerate() {
        let col = dir.path().join(format!("c{i}.txt"));
        let stats = dir.path().join(format!("s{i}.txt"));
        let out = mpld(&[
            "decompose",
            "--input",
            p(&lay),
            "--workers",
            workers,
            "--no-timing",
            "--out",
            p(&col),
            "--stats",
            p(&stats),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        results.push((fs::read(&col).unwrap(), fs::read(&stats).unwrap()));
    }
    assert_eq!(results[0], results[1]);
}

#[test]
fn gen_as_graph_round_trips_through_decompose() {
    let dir = tempfile::tempdir().unwrap();
    let dg = dir.path().join("g.dg");
    assert!(mpld(&["gen", "--polygons", "40", "--out", p(&dg), "--as-graph"]).status.success());
    assert!(fs::read_to_string(&dg).unwrap().starts_with("dg 1\nparam k 4\n"));
    let out = mpld(&["decompose", "--input", p(&dg), "--algo", "linear"]);
    assert!(out.status.success());
}

#[test]
fn svg_and_dumps_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let lay = dir.path().join("g.lay");
    assert!(mpld(&["gen", "--polygons", "60", "--out", p(&lay)]).status.success());
    let svg = dir.path().join("o.svg");
    let orders = dir.path().join("orders.txt");
    let tree = dir.path().join("tree.txt");
    let out = mpld(&[
        "decompose",
        "--input",
        p(&lay),
        "--algo",
        "linear",
        "--out",
        p(&dir.path().join("c.txt")),
        "--svg",
        p(&svg),
        "--dump-orders",
        p(&orders),
        "--dump-ghtree",
        p(&tree),
    ]);
    assert!(out.status.success());
    assert!(fs::read_to_string(&svg).unwrap().contains("<svg"));
    assert!(fs::read_to_string(&orders).unwrap().contains("order "));
}

#[test]
fn parse_error_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("bad.dg");
    fs::write(&input, "dg 1\nv 0\nce 0 7\n").unwrap();
    let out = mpld(&["decompose", "--input", p(&input)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
    let missing = mpld(&["decompose", "--input", p(&dir.path().join("nope.dg"))]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn config_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("two.dg");
    fs::write(&input, "dg 1\nv 0\nv 1\nce 0 1\n").unwrap();
    for extra in [&["--k", "1"][..], &["--algo", "ilp"], &["--t-th", "1.5"], &["--alpha", "-1"], &["--bogus"]] {
        let mut args = vec!["decompose", "--input", p(&input)];
        args.extend_from_slice(extra);
        assert_eq!(mpld(&args).status.code(), Some(3), "{extra:?}");
    }
    let gen = mpld(&["gen", "--polygons", "10", "--density", "0", "--out", p(&dir.path().join("x.lay"))]);
    assert_eq!(gen.status.code(), Some(3));
}

#[test]
fn exhausted_budget_exits_4_with_output() {
    let dir = tempfile::tempdir().unwrap();
    let lay = dir.path().join("g.lay");
    assert!(mpld(&["gen", "--polygons", "200", "--density", "0.7", "--out", p(&lay)]).status.success());
    let col = dir.path().join("c.txt");
    let out = mpld(&[
        "decompose",
        "--input",
        p(&lay),
        "--algo",
        "exact",
        "--exact-max-vertices",
        "400",
        "--time-budget-ms",
        "1",
        "--out",
        p(&col),
    ]);
    assert_eq!(out.status.code(), Some(4));
    assert!(fs::read_to_string(&col).unwrap().contains("summary cn="));
}
