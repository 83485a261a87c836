use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use alpha_mst::oracle::brute_force_optimum;
use alpha_mst::{Alpha, GeometryTables, Instance};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_alpha-mst"));
    c.env_remove("ALPHA_MST_LOG");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn tsplib(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(format!("../../data/tsplib/{name}.tsp"))
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// Writes an 8-point native instance cut from berlin52.
fn small_instance(dir: &Path) -> PathBuf {
    let path = dir.join("b8.amst");
    let o = run(&["gen", s(&tsplib("berlin52")), "--n", "8", "--offset", "4", "-o", s(&path)]);
    assert!(o.status.success(), "{o:?}");
    path
}

#[test]
fn gen_writes_native_format_and_is_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let path = small_instance(dir.path());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("alpha-mst v1\nn 8\n"));
    assert_eq!(text.lines().count(), 10);

    let a = run(&["gen", "--random", "12", "--seed", "5"]);
    let b = run(&["gen", "--random", "12", "--seed", "5"]);
    let c = run(&["gen", "--random", "12", "--seed", "6"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn solve_matches_enumeration_for_every_formulation() {
    let dir = tempfile::tempdir().unwrap();
    let path = small_instance(dir.path());
    let inst = Instance::<f64>::from_native("b8", &std::fs::read_to_string(&path).unwrap()).unwrap();
    let tables = GeometryTables::build(&inst, Alpha::pi_frac(1, 2));
    let (best, _) = brute_force_optimum(&inst, &tables).unwrap().unwrap();
    for kind in ["fx", "fx+", "fx++", "fxy*", "fxy"] {
        let o = run(&["solve", s(&path), "--alpha", "1/2pi", "--formulation", kind, "--json", "-"]);
        assert!(o.status.success(), "{kind}: {o:?}");
        let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        assert_eq!(v["schema"], "alpha-mst/solve-report/v1");
        assert_eq!(v["status"], "OPTIMAL");
        assert_eq!(v["kind"], kind);
        let (lb, ub) = (v["lower_bound"].as_f64().unwrap(), v["upper_bound"].as_f64().unwrap());
        assert!((ub - best).abs() <= 1e-6 * best, "{kind}: {ub} vs {best}");
        assert_eq!(lb, ub);
        assert_eq!(v["tree"].as_array().unwrap().len(), 7);
    }
}

#[test]
fn reports_are_reproducible_apart_from_timing() {
    let dir = tempfile::tempdir().unwrap();
    let path = small_instance(dir.path());
    let strip = |o: Output| {
        let mut v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        v.as_object_mut().unwrap().remove("time_s");
        serde_json::to_string(&v).unwrap()
    };
    let args = ["solve", s(&path), "--alpha", "2/5pi", "--formulation", "fx++", "--json", "-"];
    assert_eq!(strip(run(&args)), strip(run(&args)));
}

#[test]
fn csv_rows_append_under_one_header() {
    let dir = tempfile::tempdir().unwrap();
    let path = small_instance(dir.path());
    let csv = dir.path().join("runs.csv");
    for kind in ["fx", "fx+"] {
        let o = run(&["solve", s(&path), "--alpha", "2/3pi", "--formulation", kind, "--csv", s(&csv)]);
        assert!(o.status.success());
        assert!(stdout(&o).contains("gap 0.00 %"));
    }
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "instance,n,alpha,kind,status,lb,ub,root_lb,nodes,sec_cuts,lac_cuts,cycle_cuts,time_s"
    );
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("b8,8,2/3pi,fx,OPTIMAL,"));
    assert!(lines[2].starts_with("b8,8,2/3pi,fx+,OPTIMAL,"));

    let other = dir.path().join("other.csv");
    std::fs::write(&other, "a,b\n1,2\n").unwrap();
    let o = run(&["solve", s(&path), "--alpha", "2/3pi", "--csv", s(&other)]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(std::fs::read_to_string(&other).unwrap(), "a,b\n1,2\n");
}

#[test]
fn tree_files_round_trip_through_check() {
    let dir = tempfile::tempdir().unwrap();
    let path = small_instance(dir.path());
    let tree = dir.path().join("tree.txt");
    let cuts = dir.path().join("cuts.txt");
    let lp = dir.path().join("model.lp");
    let o = run(&[
        "solve", s(&path), "--alpha", "1/3pi", "--tree", s(&tree), "--cuts", s(&cuts), "--export-lp", s(&lp),
    ]);
    assert!(o.status.success(), "{o:?}");
    let text = std::fs::read_to_string(&tree).unwrap();
    assert_eq!(text.lines().count(), 7);
    assert!(std::fs::read_to_string(&lp).unwrap().contains("Subject To"));
    for line in std::fs::read_to_string(&cuts).unwrap().lines() {
        let kind = line.split(';').next().unwrap();
        assert!(["SEC", "LAC", "ODD_CYCLE"].contains(&kind), "{line}");
    }

    let ok = run(&["check", s(&path), s(&tree), "--alpha", "1/3pi"]);
    assert_eq!(ok.status.code(), Some(0), "{ok:?}");
    assert!(stdout(&ok).contains("feasible alpha-spanning tree"));

    // a path visiting the points in file order is a spanning tree but
    // usually too wide somewhere at a small angle
    let path_tree = dir.path().join("path.txt");
    std::fs::write(&path_tree, (0..7).map(|i| format!("{i} {}\n", i + 1)).collect::<String>()).unwrap();
    let tight = run(&["check", s(&path), s(&path_tree), "--alpha", "1/10pi"]);
    assert_eq!(tight.status.code(), Some(1), "{tight:?}");
    assert!(stdout(&tight).contains("exceeds alpha"));

    let cyclic = dir.path().join("cyclic.txt");
    std::fs::write(&cyclic, "0 1\n1 2\n0 2\n3 4\n4 5\n5 6\n6 7\n").unwrap();
    let o = run(&["check", s(&path), s(&cyclic), "--alpha", "1/3pi"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("not a spanning tree"));

    let garbage = dir.path().join("garbage.txt");
    std::fs::write(&garbage, "0 one\n").unwrap();
    let o = run(&["check", s(&path), s(&garbage), "--alpha", "1/3pi"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = small_instance(dir.path());
    let p = s(&path);
    for args in [
        vec!["solve", p, "--alpha", "7/2pi"],
        vec!["solve", p, "--alpha", "0.5"],
        vec!["solve", p, "--alpha", "1/2pi", "--time-limit", "0"],
        vec!["solve", p, "--alpha", "1/2pi", "--time-limit", "-3"],
        vec!["solve", p, "--alpha", "1/2pi", "--formulation", "fz"],
        vec!["solve", "/nonexistent/file.amst", "--alpha", "1/2pi"],
        vec!["solve", p, "--alpha", "1/2pi", "--n", "100"],
        vec!["solve", p],
        vec!["frobnicate"],
    ] {
        let o = run(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {o:?}");
    }
    let o = bin()
        .args(["solve", p, "--alpha", "1/2pi"])
        .env("ALPHA_MST_LOG", "loud")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn log_levels_control_tracing() {
    let dir = tempfile::tempdir().unwrap();
    let path = small_instance(dir.path());
    let logged = |level: &str| {
        let o = bin()
            .args(["solve", s(&path), "--alpha", "1/3pi"])
            .env("ALPHA_MST_LOG", level)
            .output()
            .unwrap();
        assert!(o.status.success());
        String::from_utf8_lossy(&o.stderr).into_owned()
    };
    assert!(logged("quiet").is_empty());
    assert!(logged("info").contains("OPTIMAL"));
    assert!(logged("debug").contains("depth"));
}

#[test]
fn bounds_and_bench_tables() {
    let dir = tempfile::tempdir().unwrap();
    let path = small_instance(dir.path());
    let csv = dir.path().join("bounds.csv");
    let o = run(&["bounds", s(&path), "--alpha", "1/3pi,4/5pi", "--csv", s(&csv)]);
    assert!(o.status.success(), "{o:?}");
    let text = std::fs::read_to_string(&csv).unwrap();
    let rows: Vec<Vec<&str>> = text.lines().map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0][8], "gap_pct");
    for row in &rows[1..] {
        let gap = row[8];
        assert_eq!(gap.split('.').nth(1).map(str::len), Some(2), "{gap}");
        let w: Vec<f64> = row[3..8].iter().map(|v| v.parse().unwrap()).collect();
        assert!(w[0] <= w[1] + 1e-6 && w[1] <= w[3] + 1e-6 && w[1] <= w[2] + 1e-6);
    }

    let summary = dir.path().join("summary.csv");
    let runs = dir.path().join("runs.csv");
    let o = run(&[
        "bench", s(&path), "--alpha", "1/2pi,2/3pi", "--formulation", "fx,fx++", "--csv", s(&runs), "--summary",
        s(&summary),
    ]);
    assert!(o.status.success(), "{o:?}");
    assert_eq!(std::fs::read_to_string(&runs).unwrap().lines().count(), 5);
    let summary = std::fs::read_to_string(&summary).unwrap();
    let lines: Vec<&str> = summary.lines().collect();
    assert_eq!(
        lines[0],
        "kind,alpha,runs,optimal,avg_gap_pct,avg_root_gap_pct,avg_nodes,avg_time_s,max_time_s"
    );
    assert_eq!(lines.len(), 5);
    assert!(lines[1..].iter().all(|l| l.split(',').nth(3) == Some("1")));
}
