//! End-to-end checks of the `loadshed` binary: flag handling, artifact
//! layout, trace schema, and exit codes.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_loadshed"))
}

#[test]
fn validate_prints_counts_and_exits_zero() {
    let out = bin()
        .args(["--case", "ieee14", "--validate"])
        .output()
        .expect("binary runs");
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("14 buses, 20 lines"), "stdout: {text}");
    assert!(text.contains("5 generator buses"), "stdout: {text}");

    let out = bin()
        .args(["--case", "ieee118", "--validate"])
        .output()
        .expect("binary runs");
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("118 buses, 186 lines"), "stdout: {text}");
}

#[test]
fn validate_reports_parse_errors_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.m");
    std::fs::write(&path, "mpc.baseMVA = 100;\nmpc.bus = [\n1 1 oops").unwrap();
    let out = bin()
        .args(["--case", path.to_str().unwrap(), "--validate"])
        .output()
        .expect("binary runs");
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("error"), "stderr: {err}");
}

#[test]
fn k_range_run_writes_traces_and_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args([
            "--case",
            "toy2bus",
            "--k",
            "0..1",
            "--max-iters",
            "40",
            "--out",
            dir.path().to_str().unwrap(),
        ])
        .output()
        .expect("binary runs");
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    for name in [
        "toy2bus_k0.txt",
        "toy2bus_k1.txt",
        "toy2bus_k0.json",
        "toy2bus_k1.json",
        "toy2bus_table.txt",
    ] {
        assert!(dir.path().join(name).is_file(), "{name} missing");
    }
    let trace = std::fs::read_to_string(dir.path().join("toy2bus_k1.txt")).unwrap();
    assert!(trace.starts_with("IterNo ObjVal theta_res z_res gam_res prim_res\n"));
    assert_eq!(trace.lines().count(), 41);
}

#[test]
fn unknown_case_exits_nonzero() {
    let out = bin()
        .args(["--case", "nonexistent"])
        .output()
        .expect("binary runs");
    assert!(!out.status.success());
}

#[test]
fn bad_k_exceeding_line_count_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args([
            "--case",
            "toy2bus",
            "--k",
            "7",
            "--out",
            dir.path().to_str().unwrap(),
        ])
        .output()
        .expect("binary runs");
    assert!(!out.status.success());
}

#[test]
fn matpower_file_input_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("pair.m");
    std::fs::write(
        &path,
        "mpc.baseMVA = 100;\n\
         mpc.bus = [\n1 1 40 0 0 0 1 1 0 0 1 1.06 0.94;\n2 3 0 0 0 0 1 1 0 0 1 1.06 0.94;\n];\n\
         mpc.gen = [\n2 40 0 10 -10 1 100 1 100 0;\n];\n\
         mpc.branch = [\n1 2 0 0.5 0 0 0 0 0 0 1 -360 360;\n];\n",
    )
    .unwrap();
    let out = bin()
        .args([
            "--case",
            path.to_str().unwrap(),
            "--k",
            "1",
            "--max-iters",
            "30",
            "--rho",
            "1e4",
            "--out",
            dir.path().to_str().unwrap(),
        ])
        .output()
        .expect("binary runs");
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(Path::new(&dir.path().join("pair_k1.txt")).is_file());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("K=1"), "stdout: {text}");
}
