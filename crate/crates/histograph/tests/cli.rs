//! End-to-end checks of the command-line interface: subcommand output,
//! file formats, exit codes, and byte-identical reports for identical
//! configurations.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_histograph"))
}

fn write_temp(name: &str, content: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("histograph-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, content).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn fdeg_k4_triangle_is_point_mass_at_one() {
    let graph = write_temp("k4.txt", "n 4\n0 1\n0 2\n0 3\n1 2\n1 3\n2 3\n");
    let out = run(&[
        "fdeg",
        "--graph",
        graph.to_str().unwrap(),
        "--pattern",
        "triangle",
    ]);
    let v = stdout_json(&out);
    assert_eq!(v["distribution"]["type"], "empirical");
    let atoms = v["distribution"]["atoms"].as_array().unwrap();
    assert_eq!(atoms.len(), 4);
    assert!(atoms.iter().all(|a| a.as_f64().unwrap() == 1.0));
}

#[test]
fn density_accepts_json_graphs() {
    let graph = write_temp(
        "c5.json",
        r#"{"n":5,"edges":[[0,1],[1,2],[2,3],[3,4],[4,0]]}"#,
    );
    let out = run(&[
        "density",
        "--graph",
        graph.to_str().unwrap(),
        "--subgraph",
        "triangle",
    ]);
    let v = stdout_json(&out);
    assert_eq!(v["density"].as_f64().unwrap(), 0.0);
}

#[test]
fn maxent_constant_solution() {
    let out = run(&[
        "maxent", "--family", "edge", "--phi", "0.3", "--gamma", "0", "--k", "6",
    ]);
    let v = stdout_json(&out);
    let entropy = v["solution"]["entropy"].as_f64().unwrap();
    let h03 = -(0.3f64.ln() * 0.3 + 0.7f64.ln() * 0.7);
    assert!((entropy - 15.0 * h03).abs() < 1e-5);
    for s in v["solution"]["s_star"]["s"].as_array().unwrap() {
        assert!((s.as_f64().unwrap() - 0.3).abs() < 1e-3);
    }
}

#[test]
fn oracle_sandwich_holds_at_n6() {
    let out = run(&[
        "oracle",
        "sandwich",
        "--p",
        "uniform",
        "--pattern",
        "triangle",
        "--delta",
        "0.4",
        "--d",
        "2",
        "--n",
        "6",
    ]);
    let v = stdout_json(&out);
    assert_eq!(v["verdict"], "holds");
    assert_eq!(v["report"]["outer_violations"].as_u64().unwrap(), 0);
}

#[test]
fn oracle_enumerate_unlabeled_counts() {
    let out = run(&["oracle", "enumerate", "--n", "5", "--unlabeled"]);
    let v = stdout_json(&out);
    assert_eq!(v["count"].as_u64().unwrap(), 34);
}

#[test]
fn radii_grid_emits_csv() {
    let out = run(&[
        "radii",
        "--p",
        "uniform",
        "--pattern",
        "edge",
        "--d",
        "2",
        "--delta-grid",
        "0.1:0.5:4",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "delta,m,gamma,beta,beta_feasible,t_star"
    );
    assert_eq!(text.lines().count(), 1 + 5 * 2);
}

#[test]
fn reports_are_byte_identical_for_same_config() {
    let args = [
        "maxent",
        "--family",
        "edge,triangle",
        "--phi",
        "0.4,0.1",
        "--gamma",
        "0.05,0.05",
        "--k",
        "5",
        "--seed",
        "7",
    ];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn exit_codes_follow_error_classes() {
    // validation error: malformed numeric list
    let out = run(&[
        "maxent", "--family", "edge", "--phi", "x", "--gamma", "0", "--k", "4",
    ]);
    assert_eq!(out.status.code(), Some(2));
    // infeasibility: contradictory windows
    let out = run(&[
        "maxent",
        "--family",
        "edge,triangle",
        "--phi",
        "0,1",
        "--gamma",
        "0,0",
        "--k",
        "4",
    ]);
    assert_eq!(out.status.code(), Some(3));
    // cap exceeded: oracle scan too large
    let out = run(&[
        "oracle",
        "count-hist",
        "--p",
        "uniform",
        "--pattern",
        "edge",
        "--delta",
        "0.5",
        "--n",
        "12",
    ]);
    assert_eq!(out.status.code(), Some(4));
    // machine-readable diagnostics on stderr
    let diag: serde_json::Value =
        serde_json::from_slice(&out.stderr).expect("stderr diagnostic is JSON");
    assert_eq!(diag["exit_code"].as_i64().unwrap(), 4);
}

#[test]
fn reports_independent_of_thread_count() {
    // deterministic totals independent of shard/worker count
    for args in [
        vec![
            "oracle", "count-hist", "--p", "uniform", "--pattern", "triangle", "--delta",
            "0.4", "--n", "6",
        ],
        vec![
            "maxent", "--family", "edge,triangle", "--phi", "0.3,0.05", "--gamma",
            "0.02,0.02", "--k", "5", "--seed", "3",
        ],
    ] {
        let one = bin().args(&args).args(["--threads", "1"]).output().unwrap();
        let two = bin().args(&args).args(["--threads", "2"]).output().unwrap();
        assert!(one.status.success() && two.status.success());
        assert_eq!(one.stdout, two.stdout, "args: {args:?}");
    }
}

#[test]
fn maxent_reads_solver_config_file() {
    let cfg = write_temp("solver.json", r#"{"n_starts": 4, "seed": 9}"#);
    let out = run(&[
        "maxent",
        "--family",
        "edge",
        "--phi",
        "0.5",
        "--gamma",
        "1",
        "--k",
        "4",
        "--config",
        cfg.to_str().unwrap(),
    ]);
    let v = stdout_json(&out);
    assert!(v["solution"]["entropy"].as_f64().unwrap() > 0.0);
    // flags override the file
    let out = run(&[
        "maxent",
        "--family",
        "edge",
        "--phi",
        "0.5",
        "--gamma",
        "1",
        "--k",
        "4",
        "--config",
        cfg.to_str().unwrap(),
        "--starts",
        "2",
    ]);
    stdout_json(&out);
}

#[test]
fn szemeredi_decomposes_planted_graph() {
    // complete bipartite: every pair is uniform, densities are 0/1
    let mut text = String::from("n 12\n");
    for i in 0..6 {
        for j in 6..12 {
            text.push_str(&format!("{i} {j}\n"));
        }
    }
    let graph = write_temp("bipartite.txt", &text);
    let out = run(&[
        "szemeredi",
        "--graph",
        graph.to_str().unwrap(),
        "--eps",
        "0.45",
        "--k-init",
        "2",
    ]);
    let v = stdout_json(&out);
    assert_eq!(v["decomposition"]["status"], "Uniform");
}
