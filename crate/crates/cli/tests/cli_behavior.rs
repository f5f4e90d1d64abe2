//! End-to-end behavior of the `kedmd` binary: exit codes, file outputs,
//! configuration merging, and subcommand determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use kedmd::data_io::load_snapshots;
use kedmd::SnapshotFormat;

fn kedmd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kedmd"))
        .args(args)
        .output()
        .expect("spawning the kedmd binary")
}

fn kedmd_in(dir: &Path, args: &[&str]) -> Output {
    let mut full: Vec<String> = args.iter().map(|s| s.to_string()).collect();
    full.push("--out-dir".into());
    full.push(dir.to_str().expect("utf-8 temp path").into());
    Command::new(env!("CARGO_BIN_EXE_kedmd"))
        .args(&full)
        .output()
        .expect("spawning the kedmd binary")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("process exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf-8 stderr")
}

/// Generate a small oscillator dataset and return the snapshot path.
fn gen_oscillator(dir: &Path, m: usize, seed: u64) -> PathBuf {
    let out = kedmd_in(
        dir,
        &[
            "gen",
            "--system",
            "oscillator",
            "--height",
            "6",
            "--width",
            "7",
            "--m",
            &m.to_string(),
            "--noise",
            "0.01",
            "--seed",
            &seed.to_string(),
        ],
    );
    assert_eq!(exit_code(&out), 0, "gen failed: {}", stderr(&out));
    dir.join("snapshots.bin")
}

/// Generate a linear-system dataset and return the snapshot path.
fn gen_linear(dir: &Path, a: &str, x0: &str, m: usize) -> PathBuf {
    let out = kedmd_in(
        dir,
        &["gen", "--system", "linear", "--a", a, "--x0", x0, "--m", &m.to_string()],
    );
    assert_eq!(exit_code(&out), 0, "gen failed: {}", stderr(&out));
    dir.join("snapshots.bin")
}

fn read_meta(dir: &Path) -> String {
    std::fs::read_to_string(dir.join("run_meta.txt")).expect("run_meta.txt exists")
}

#[test]
fn gen_zero_columns_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = kedmd_in(dir.path(), &["gen", "--m", "0"]);
    assert_eq!(exit_code(&out), 2);
    assert!(stderr(&out).starts_with("error:"), "got: {}", stderr(&out));
}

#[test]
fn gen_is_deterministic_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let a = gen_oscillator(&dir.path().join("a"), 8, 3);
    let b = gen_oscillator(&dir.path().join("b"), 8, 3);
    let c = gen_oscillator(&dir.path().join("c"), 8, 4);
    let bytes_a = std::fs::read(a).unwrap();
    assert_eq!(bytes_a, std::fs::read(b).unwrap(), "same seed must reproduce the file");
    assert_ne!(bytes_a, std::fs::read(c).unwrap(), "different seeds must differ");
}

#[test]
fn gen_linear_writes_the_geometric_sequence() {
    let dir = tempfile::tempdir().unwrap();
    let path = gen_linear(dir.path(), "0.9", "1", 10);
    let data = load_snapshots(&path, SnapshotFormat::Binary).unwrap();
    assert_eq!(data.shape(), (1, 10));
    let mut expected = 1.0f64;
    for k in 0..10 {
        assert_eq!(
            data[(0, k)].to_bits(),
            expected.to_bits(),
            "column {k} must equal repeated multiplication"
        );
        expected *= 0.9;
    }
}

#[test]
fn dmd_records_synthetic_column_count() {
    let dir = tempfile::tempdir().unwrap();
    let input = gen_linear(&dir.path().join("data"), "0.9,0,0,0.5", "1,1", 6);
    let out_dir = dir.path().join("run");
    let out = kedmd_in(
        &out_dir,
        &[
            "dmd",
            "--input",
            input.to_str().unwrap(),
            "--kernel",
            "laplace",
            "--true-count",
            "3",
            "--m-target",
            "151",
        ],
    );
    assert_eq!(exit_code(&out), 0, "dmd failed: {}", stderr(&out));
    let meta = read_meta(&out_dir);
    assert!(meta.contains("synthetic_cols=148"), "meta was:\n{meta}");
    assert!(meta.contains("m_true=3"), "meta was:\n{meta}");
    assert!(meta.contains("m_target=151"), "meta was:\n{meta}");
}

#[test]
fn dmd_polynomial_kernel_recovers_the_linear_eigenvalue() {
    let dir = tempfile::tempdir().unwrap();
    let input = gen_linear(&dir.path().join("data"), "0.9", "1", 10);
    let out_dir = dir.path().join("run");
    let out = kedmd_in(
        &out_dir,
        &[
            "dmd",
            "--input",
            input.to_str().unwrap(),
            "--kernel",
            "poly",
            "--alpha",
            "1",
            "--d",
            "1",
        ],
    );
    assert_eq!(exit_code(&out), 0, "dmd failed: {}", stderr(&out));
    let csv = std::fs::read_to_string(out_dir.join("eigenvalues.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("index,re,im,magnitude"));
    let found = lines.any(|line| {
        let fields: Vec<&str> = line.split(',').collect();
        let re: f64 = fields[1].parse().unwrap();
        let im: f64 = fields[2].parse().unwrap();
        (re - 0.9).abs() <= 1e-8 && im.abs() <= 1e-8
    });
    assert!(found, "no eigenvalue near 0.9 in:\n{csv}");
}

#[test]
fn dmd_missing_input_is_a_run_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = kedmd_in(
        dir.path(),
        &["dmd", "--input", "/nonexistent/snapshots.bin"],
    );
    assert_eq!(exit_code(&out), 1);
    assert!(stderr(&out).starts_with("error:"));
}

#[test]
fn dmd_without_input_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = kedmd_in(dir.path(), &["dmd"]);
    assert_eq!(exit_code(&out), 2);
    assert!(stderr(&out).contains("--input"));
}

#[test]
fn dmd_contradictory_count_flags_are_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = kedmd_in(
        dir.path(),
        &["dmd", "--true-count", "10", "--m-target", "5"],
    );
    assert_eq!(exit_code(&out), 2);
    assert!(stderr(&out).contains("m-target"));
}

#[test]
fn dmd_true_count_beyond_the_data_is_a_run_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = gen_linear(&dir.path().join("data"), "0.9", "1", 5);
    let out = kedmd_in(
        &dir.path().join("run"),
        &["dmd", "--input", input.to_str().unwrap(), "--true-count", "100"],
    );
    assert_eq!(exit_code(&out), 1);
    assert!(stderr(&out).starts_with("error:"));
}

#[test]
fn dmd_rejects_flags_foreign_to_the_kernel() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        ["dmd", "--kernel", "laplace", "--alpha", "2"],
        ["dmd", "--kernel", "poly", "--sigma", "1.5"],
        ["dmd", "--kernel", "laplace-rk", "--gamma", "1.5"],
    ] {
        let out = kedmd_in(dir.path(), &args);
        assert_eq!(exit_code(&out), 2, "{args:?} should be a usage error");
    }
}

#[test]
fn config_supplies_defaults_and_flags_override_them() {
    let dir = tempfile::tempdir().unwrap();
    let input = gen_oscillator(&dir.path().join("data"), 10, 1);
    // `alpha` is foreign to both kernels used below: as a config default it
    // must be ignored rather than rejected.
    let cfg = dir.path().join("run.conf");
    std::fs::write(
        &cfg,
        format!(
            "# defaults for this experiment\nkernel = grbf\nseed = 9\nalpha = 3\ninput = {}\n",
            input.display()
        ),
    )
    .unwrap();

    let from_cfg = dir.path().join("from_cfg");
    let out = kedmd_in(&from_cfg, &["dmd", "--config", cfg.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 0, "dmd failed: {}", stderr(&out));
    let meta = read_meta(&from_cfg);
    assert!(meta.contains("kernel=grbf"), "meta was:\n{meta}");
    assert!(meta.contains("seed=9"), "meta was:\n{meta}");

    let overridden = dir.path().join("overridden");
    let out = kedmd_in(
        &overridden,
        &[
            "dmd",
            "--config",
            cfg.to_str().unwrap(),
            "--kernel",
            "laplace",
            "--seed",
            "4",
        ],
    );
    assert_eq!(exit_code(&out), 0, "dmd failed: {}", stderr(&out));
    let meta = read_meta(&overridden);
    assert!(meta.contains("kernel=laplace"), "meta was:\n{meta}");
    assert!(meta.contains("seed=4"), "meta was:\n{meta}");
}

#[test]
fn config_rejects_unknown_duplicate_and_malformed_keys() {
    let dir = tempfile::tempdir().unwrap();
    for body in ["bogus = 1\n", "seed = 1\nseed = 2\n", "just some words\n"] {
        let cfg = dir.path().join("bad.conf");
        std::fs::write(&cfg, body).unwrap();
        let out = kedmd_in(dir.path(), &["dmd", "--config", cfg.to_str().unwrap()]);
        assert_eq!(exit_code(&out), 2, "config {body:?} should be a usage error");
        assert!(stderr(&out).starts_with("error:"));
    }
}

#[test]
fn compare_writes_the_expected_table() {
    let dir = tempfile::tempdir().unwrap();
    let input = gen_oscillator(&dir.path().join("data"), 12, 2);
    let out_dir = dir.path().join("cmp");
    let args = [
        "compare",
        "--input",
        input.to_str().unwrap(),
        "--m0",
        "3,5",
        "--top-k",
        "2",
    ];
    let out = kedmd_in(&out_dir, &args);
    assert_eq!(exit_code(&out), 0, "compare failed: {}", stderr(&out));
    let csv = std::fs::read_to_string(out_dir.join("compare.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "m0,kernel,mode_index,magnitude,similarity");
    // two kernels x (two truncated runs + the full run) x top-2 modes
    assert_eq!(lines.len(), 1 + 2 * 3 * 2, "table was:\n{csv}");
    for line in &lines[1..] {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 5);
        let similarity: f64 = fields[4].parse().unwrap();
        assert!((0.0..=1.0 + 1e-9).contains(&similarity), "bad row: {line}");
        if fields[0] == "12" && fields[1] == "laplace" {
            assert!(
                (similarity - 1.0).abs() <= 1e-9,
                "the full-data run must reproduce its own baseline: {line}"
            );
        }
    }

    let rerun_dir = dir.path().join("cmp2");
    let out = kedmd_in(&rerun_dir, &args);
    assert_eq!(exit_code(&out), 0);
    assert_eq!(
        std::fs::read(out_dir.join("compare.csv")).unwrap(),
        std::fs::read(rerun_dir.join("compare.csv")).unwrap(),
        "identical flags must regenerate the table bitwise"
    );
}

#[test]
fn compare_full_only_list_has_no_padded_runs() {
    let dir = tempfile::tempdir().unwrap();
    let input = gen_oscillator(&dir.path().join("data"), 10, 6);
    let out_dir = dir.path().join("cmp");
    let out = kedmd_in(
        &out_dir,
        &["compare", "--input", input.to_str().unwrap(), "--m0", "10", "--top-k", "2"],
    );
    assert_eq!(exit_code(&out), 0, "compare failed: {}", stderr(&out));
    let csv = std::fs::read_to_string(out_dir.join("compare.csv")).unwrap();
    for line in csv.lines().skip(1) {
        assert!(line.starts_with("10,"), "unexpected padded row: {line}");
    }
}

#[test]
fn validate_filter_selects_by_substring() {
    let out = kedmd(&["validate", "--only", "rkhs.bounds"]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("PASS rkhs.bounds"), "stdout was:\n{text}");
    assert!(text.contains("1 checks: 1 passed, 0 failed"), "stdout was:\n{text}");
}

#[test]
fn validate_unmatched_filter_is_a_usage_error() {
    let out = kedmd(&["validate", "--only", "nosuchcheck"]);
    assert_eq!(exit_code(&out), 2);
    assert!(stderr(&out).contains("nosuchcheck"));
}

#[test]
fn unknown_flags_are_usage_errors() {
    let out = kedmd(&["dmd", "--frobnicate"]);
    assert_eq!(exit_code(&out), 2);
    let out = kedmd(&["nosuchcommand"]);
    assert_eq!(exit_code(&out), 2);
}

/// A consumer that closes stdout early (`kedmd … | head`) must not
/// produce a panic: the process either dies on the pipe signal or, if
/// its output fit the pipe buffer, exits cleanly.
#[cfg(unix)]
#[test]
fn closed_stdout_pipe_does_not_panic() {
    use std::os::unix::process::ExitStatusExt;
    use std::process::Stdio;

    let dir = tempfile::tempdir().unwrap();
    let input = gen_oscillator(&dir.path().join("data"), 20, 2);
    let out_dir = dir.path().join("run");
    let mut child = Command::new(env!("CARGO_BIN_EXE_kedmd"))
        .args([
            "dmd",
            "--input",
            input.to_str().unwrap(),
            "--kernel",
            "laplace",
            "--out-dir",
            out_dir.to_str().unwrap(),
        ])
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("spawning the kedmd binary");
    // Close the read end before the decomposition reaches its first
    // print, so later writes hit a dead pipe.
    drop(child.stdout.take());
    let out = child.wait_with_output().expect("waiting for kedmd");
    let err = String::from_utf8_lossy(&out.stderr).into_owned();
    assert!(!err.contains("panicked"), "stderr was:\n{err}");
    let died_on_pipe = out.status.signal() == Some(libc::SIGPIPE);
    assert!(
        out.status.success() || died_on_pipe,
        "unexpected status: {:?}, stderr:\n{err}",
        out.status
    );
}
