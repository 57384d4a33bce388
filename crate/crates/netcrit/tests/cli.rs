use std::path::Path;
use std::process::{Command, Output};

use netcrit::bench::read_table;

fn netcrit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_netcrit"))
        .args(args)
        .env("NETCRIT_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn unknown_case_is_a_config_error() {
    let out = netcrit(&["run", "--case", "pentagon", "--dx", "0.2"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown case"));
}

#[test]
fn bad_flags_and_help() {
    assert_eq!(netcrit(&["run", "--bogus"]).status.code(), Some(1));
    assert_eq!(netcrit(&["--help"]).status.code(), Some(0));
    let out = netcrit(&["run", "--case", "triangle-dep", "--dx", "0.1,0.2"]);
    assert_eq!(out.status.code(), Some(1), "dx must decrease");
    let out = netcrit(&[
        "run",
        "--case",
        "triangle-dep",
        "--dx",
        "0.2",
        "--algorithm",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn identical_specs_give_identical_tables() {
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for (i, threads) in ["1", "2"].into_iter().enumerate() {
        let table = dir.path().join(format!("table{i}.csv"));
        let trace = dir.path().join(format!("trace{i}.csv"));
        let out = Command::new(env!("CARGO_BIN_EXE_netcrit"))
            .args([
                "run",
                "--case",
                "circle-indep",
                "--algorithm",
                "2",
                "--dx",
                "0.2,0.1",
                "--deterministic",
                "--output",
                path_str(&table),
                "--trace",
                path_str(&trace),
            ])
            .env("NETCRIT_THREADS", threads)
            .output()
            .unwrap();
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        files.push((std::fs::read(table).unwrap(), std::fs::read(trace).unwrap()));
    }
    assert_eq!(files[0], files[1]);
}

#[test]
fn error_column_is_recomputable() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("t.csv");
    let out = netcrit(&[
        "run",
        "--case",
        "triangle-indep",
        "--algorithm",
        "1",
        "--dx",
        "0.2,0.1",
        "--epsilon-fraction",
        "0.01",
        "--output",
        path_str(&table),
    ]);
    assert!(out.status.success());
    let header = std::fs::read_to_string(&table).unwrap();
    assert!(header.starts_with(
        "case,algorithm,dx,dt,epsilon,k,c_estimate,c_reference,abs_error,stop_reason,wall_ms"
    ));
    let rows = read_table(std::fs::File::open(&table).unwrap()).unwrap();
    assert_eq!(rows.len(), 2);
    for r in rows {
        let reference = r.c_reference.unwrap();
        assert_eq!(r.abs_error.unwrap(), (r.c_estimate - reference).abs());
        assert_eq!(r.stop_reason, "tolerance_met");
    }
}

#[test]
fn fixed_k_from_a_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("t.csv");
    let snaps = dir.path().join("snap.csv");
    let spec = dir.path().join("spec.toml");
    std::fs::write(
        &spec,
        format!(
            "case = \"triangle-dep\"\nalgorithm = 1\ndx_list = [0.2]\nmode = \"fixed-k\"\n\
             fixed_k = 30\noutput = {:?}\nsnapshots = {:?}\nsnapshot_times = [10, 30]\n",
            path_str(&table),
            path_str(&snaps)
        ),
    )
    .unwrap();
    let out = netcrit(&["run", "--config", path_str(&spec)]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let rows = read_table(std::fs::File::open(&table).unwrap()).unwrap();
    assert_eq!(
        (rows[0].k, rows[0].stop_reason.as_str()),
        (30, "iteration_cap")
    );
    let snap = std::fs::read_to_string(&snaps).unwrap();
    assert!(snap.lines().count() > 1);
}

#[test]
fn user_network_with_uniform_model() {
    let dir = tempfile::tempdir().unwrap();
    let net = dir.path().join("net.toml");
    std::fs::write(
        &net,
        "vertices = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]]\n\
         [[arcs]]\ntail = 0\nhead = 1\n[[arcs]]\ntail = 1\nhead = 2\n",
    )
    .unwrap();
    let out = netcrit(&[
        "run",
        "--network",
        path_str(&net),
        "--model",
        "quadratic-offset:-0.5",
        "--beta0",
        "3",
        "--dx",
        "0.25",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let rows = read_table(out.stdout.as_slice()).unwrap();
    assert!((rows[0].c_estimate + 0.5).abs() < 1e-8);
}

#[test]
fn compare_reports_iteration_reduction() {
    let out = netcrit(&[
        "compare",
        "--case",
        "triangle-indep",
        "--dx",
        "0.2,0.1",
        "--epsilon-fraction",
        "0.01",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("dx,k_a,k_b,reduction_pct"));
    assert_eq!(lines.next(), Some("0.2,251,9,96.41"));
    assert!(text.contains("mean,,,"));
}

#[test]
fn compare_of_identical_specs_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("a.toml");
    std::fs::write(
        &spec,
        "case = \"triangle-dep\"\nalgorithm = 2\ndx_list = [0.2, 0.1]\n",
    )
    .unwrap();
    let s = path_str(&spec);
    let out = netcrit(&["compare", "--config-a", s, "--config-b", s]);
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout)
        .unwrap()
        .contains("mean,,,0.00"));
}

#[test]
fn compare_rejects_mismatched_specs() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.toml");
    let b = dir.path().join("b.toml");
    std::fs::write(
        &a,
        "case = \"triangle-dep\"\nalgorithm = 1\ndx_list = [0.2]\n",
    )
    .unwrap();
    std::fs::write(
        &b,
        "case = \"triangle-indep\"\nalgorithm = 2\ndx_list = [0.2]\n",
    )
    .unwrap();
    let out = netcrit(&[
        "compare",
        "--config-a",
        path_str(&a),
        "--config-b",
        path_str(&b),
    ]);
    assert_eq!(out.status.code(), Some(1));
}
