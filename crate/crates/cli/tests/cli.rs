//! End-to-end tests of the command-line surface: closed-form output,
//! mosaic export, determinism of simulation files, exit codes, and the
//! jitter escape hatch for degenerate inputs.

use std::path::Path;
use std::process::{Command, Output};

fn orderk(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_orderk"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout_value(out: &Output) -> f64 {
    let text = String::from_utf8_lossy(&out.stdout);
    let line = text.lines().last().unwrap_or_default();
    let value = line.rsplit('=').next().unwrap().trim();
    value
        .parse()
        .unwrap_or_else(|e| panic!("cannot parse {value:?}: {e}\n{text}"))
}

fn write_triangle(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("tri.csv");
    let h = 3f64.sqrt() / 2.0;
    std::fs::write(
        &path,
        format!("# unit equilateral triangle\nx,y\n0,0\n1,0\n0.5,{h}\n"),
    )
    .unwrap();
    path
}

#[test]
fn expect_known_values() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        (
            vec!["expect", "--n", "2", "--k", "1", "--ell", "0", "--rho", "1"],
            2.0,
        ),
        (
            vec!["expect", "--n", "2", "--k", "1", "--ell", "1", "--rho", "1"],
            2.0,
        ),
        (
            vec!["expect", "--n", "2", "--k", "2", "--ell", "0", "--rho", "1"],
            6.0,
        ),
        (
            vec!["expect", "--n", "3", "--k", "5", "--ell", "3", "--rho", "7"],
            1.0,
        ),
        (
            vec!["expect", "--n", "2", "--k", "1", "--j", "0", "--rho", "1.5"],
            1.5,
        ),
    ];
    for (args, want) in cases {
        let out = orderk(&args, dir.path());
        assert!(
            out.status.success(),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        let got = stdout_value(&out);
        assert!(
            (got - want).abs() < 1e-9,
            "{args:?}: got {got}, want {want}"
        );
    }
}

#[test]
fn expect_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    // cell counts at k >= 2 need a C-table
    let out = orderk(
        &["expect", "--n", "2", "--k", "2", "--j", "1", "--rho", "1"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(3));
    // skeleton dimension out of range
    let out = orderk(
        &["expect", "--n", "2", "--k", "1", "--ell", "5", "--rho", "1"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    // --ell and --j conflict
    let out = orderk(
        &[
            "expect", "--n", "2", "--k", "1", "--ell", "0", "--j", "0", "--rho", "1",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn mosaic_triangle_export() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_triangle(dir.path());
    let out = orderk(
        &[
            "mosaic",
            "--input",
            input.to_str().unwrap(),
            "--k",
            "2",
            "--out",
            "tri.json",
        ],
        dir.path(),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("tri.json")).unwrap())
            .unwrap();
    assert_eq!(doc["k"], 2);
    assert_eq!(doc["intervals"].as_array().unwrap().len(), 4);
    assert_eq!(doc["cells"].as_array().unwrap().len(), 7);
    assert!(doc["version"].is_string());
    assert_eq!(doc["config"]["k"], 2);
    // the worked example's upper interval: type [2,2,2] at radius √3/3
    let found = doc["intervals"].as_array().unwrap().iter().any(|iv| {
        iv["type"] == serde_json::json!([2, 2, 2])
            && (iv["radius"].as_f64().unwrap() - 3f64.sqrt() / 3.0).abs() < 1e-12
    });
    assert!(found);
}

#[test]
fn degenerate_input_fails_loudly_and_jitter_recovers() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("grid.csv");
    // 2x2 lattice: diagonal pairs are cocircular with the other corners
    std::fs::write(&path, "0,0\n1,0\n0,1\n1,1\n").unwrap();
    let out = orderk(
        &[
            "mosaic",
            "--input",
            path.to_str().unwrap(),
            "--k",
            "1",
            "--out",
            "a.json",
        ],
        dir.path(),
    );
    assert_eq!(
        out.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let msg = String::from_utf8_lossy(&out.stderr).to_lowercase();
    assert!(
        msg.contains("general position") || msg.contains("ambiguous"),
        "stderr: {msg}"
    );

    let out = orderk(
        &[
            "mosaic",
            "--input",
            path.to_str().unwrap(),
            "--k",
            "1",
            "--jitter",
            "1e-6",
            "--seed",
            "5",
            "--out",
            "b.json",
        ],
        dir.path(),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn simulate_is_deterministic_and_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "simulate", "--n", "2", "--k", "1", "--rho", "1", "--box-l", "8", "--reps", "2", "--seed",
        "31", "--out",
    ];
    let run = |name: &str| {
        let mut full: Vec<&str> = args.to_vec();
        full.push(name);
        let out = orderk(&full, dir.path());
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        std::fs::read_to_string(dir.path().join(name)).unwrap()
    };
    let a = run("a.json");
    let b = run("b.json");
    assert_eq!(a, b, "identical seeds must give identical report files");
    let csv = std::fs::read_to_string(dir.path().join("a.csv")).unwrap();
    assert!(csv.starts_with("# version:"));
    assert!(csv.contains("name,mean,stderr,theory,z"));
    assert!(csv.contains("voronoi_vertex_intensity"));
}

#[test]
fn compare_small_run_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = orderk(
        &[
            "compare", "--n", "2", "--k", "1", "--rho", "1", "--box-l", "10", "--reps", "4",
            "--seed", "42", "--out", "cmp.json", "--strict",
        ],
        dir.path(),
    );
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "stdout: {stdout}");
    assert!(stdout.contains("voronoi_vertex_intensity") && stdout.contains("PASS"));
    assert!(stdout.contains("structural_invariants") && !stdout.contains("FAIL"));
}

#[test]
fn constants_writes_full_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = orderk(
        &[
            "constants",
            "--n",
            "2",
            "--rho",
            "1",
            "--box-l",
            "10",
            "--reps",
            "3",
            "--seed",
            "8",
            "--out",
            "ct.json",
        ],
        dir.path(),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("ct.json")).unwrap())
            .unwrap();
    assert_eq!(doc["n"], 2);
    assert_eq!(doc["entries"].as_array().unwrap().len(), 3);
    assert!(doc["version"].is_string());
    // the table feeds straight back into expect --j
    let out = orderk(
        &[
            "expect", "--n", "2", "--k", "2", "--j", "2", "--rho", "1", "--ctable", "ct.json",
        ],
        dir.path(),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(stdout_value(&out) > 0.0);
}
