//! End-to-end tests of the `dncg` binary: exit codes, file outputs, and
//! the byte-identical trace requirement.

use std::fs;
use std::process::{Command, Output};

fn dncg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dncg"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

// Acceptance criterion: two runs with identical flags produce byte-identical
// trace files.
#[test]
fn acceptance_trace_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let t1 = dir.path().join("a.jsonl");
    let t2 = dir.path().join("b.jsonl");
    for t in [&t1, &t2] {
        let out = dncg(&[
            "solve",
            "--problem",
            "rosenbrock",
            "--n",
            "2",
            "--eps-g",
            "1e-5",
            "--eps-h",
            "1e-2",
            "--seed",
            "1",
            "--trace",
            t.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    }
    let a = fs::read(&t1).unwrap();
    let b = fs::read(&t2).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, b, "trace files differ between identical runs");
    println!("ACCEPTANCE 10 trace determinism: PASS ({} bytes)", a.len());
}

#[test]
fn solve_exit_codes() {
    // Missing --problem: usage error.
    let out = dncg(&["solve"]);
    assert_eq!(code(&out), 64);
    // Unknown problem: usage error.
    let out = dncg(&["solve", "--problem", "nope"]);
    assert_eq!(code(&out), 64);
    // Unknown oracle: usage error.
    let out = dncg(&["solve", "--problem", "rosenbrock", "--oracle", "magic"]);
    assert_eq!(code(&out), 64);
    // Iteration starvation: MaxIters (exit 2).
    let out = dncg(&[
        "solve",
        "--problem",
        "rosenbrock",
        "--n",
        "2",
        "--max-iters",
        "1",
    ]);
    assert_eq!(code(&out), 2);
    // Successful run: exit 0.
    let out = dncg(&[
        "solve",
        "--problem",
        "rosenbrock",
        "--n",
        "2",
        "--eps-g",
        "1e-5",
        "--eps-h",
        "1e-2",
        "--seed",
        "1",
    ]);
    assert_eq!(code(&out), 0);
}

// On a positive definite quadratic the inner CG always returns a damped
// Newton step: the trace holds only DampedNewton records plus the terminal
// certificate.
#[test]
fn spd_quadratic_trace_kinds() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.jsonl");
    let summary = dir.path().join("summary.csv");
    let out = dncg(&[
        "solve",
        "--problem",
        "quadratic-spd",
        "--n",
        "6",
        "--eps-g",
        "1e-6",
        "--eps-h",
        "1e-2",
        "--seed",
        "3",
        "--trace",
        trace.to_str().unwrap(),
        "--summary",
        summary.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));

    let text = fs::read_to_string(&trace).unwrap();
    assert!(!text.trim().is_empty());
    for line in text.lines() {
        let record: serde_json::Value = serde_json::from_str(line).unwrap();
        let kind = record["step_kind"].as_str().unwrap();
        assert!(
            kind == "DampedNewton" || kind == "Terminal",
            "unexpected step kind {kind}"
        );
        // Keys exactly as the step-record field names.
        for key in [
            "k",
            "step_kind",
            "d_norm",
            "alpha",
            "j_k",
            "f_before",
            "f_after",
            "grad_norm",
            "inner_iters",
            "hvp_used",
            "decrease_bound_ok",
        ] {
            assert!(record.get(key).is_some(), "missing key {key}");
        }
    }

    let csv = fs::read_to_string(&summary).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "problem,n,seed,status,outer_steps,f_final,grad_norm_final,f_evals,grad_evals,hvp_evals,certificate_delta"
    );
    let row = lines.next().unwrap();
    assert!(row.contains("SecondOrderPoint"), "row: {row}");
}

#[test]
fn calibrate_oracle_command() {
    // Degenerate trial count: usage error.
    let out = dncg(&[
        "calibrate-oracle",
        "--trials",
        "0",
        "--spectrum",
        "-2,1,3",
    ]);
    assert_eq!(code(&out), 64);
    // Empty spectrum: usage error.
    let out = dncg(&["calibrate-oracle", "--trials", "10", "--spectrum", "x"]);
    assert_eq!(code(&out), 64);

    // Indefinite spectrum: failure rate must sit within the binomial gate.
    for oracle in ["lanczos", "lanczos-adaptive", "cg-probe"] {
        let out = dncg(&[
            "calibrate-oracle",
            "--trials",
            "300",
            "--delta",
            "0.05",
            "--eps",
            "1",
            "--spectrum",
            "-2,1,3",
            "--seed",
            "9",
            "--oracle",
            oracle,
        ]);
        assert_eq!(
            code(&out),
            0,
            "oracle {oracle} failed: {}",
            String::from_utf8_lossy(&out.stdout)
        );
        let text = String::from_utf8_lossy(&out.stdout).to_string();
        assert!(text.contains("failure rate"));
        assert!(text.contains("iteration histogram"));
    }

    // Nearly flat spectrum above -eps/4: certificates are all true.
    let out = dncg(&[
        "calibrate-oracle",
        "--trials",
        "200",
        "--delta",
        "0.05",
        "--eps",
        "1",
        "--spectrum",
        "-0.2,0.5,1",
        "--seed",
        "2",
    ]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8_lossy(&out.stdout).to_string();
    assert!(text.contains("false certificates      0"), "{text}");
}

#[test]
fn bounds_command() {
    let out = dncg(&[
        "bounds",
        "--l-h",
        "0",
        "--u-h",
        "10",
        "--f0",
        "5",
        "--f-low",
        "-1",
        "--n",
        "50",
        "--eps-g",
        "1e-4",
        "--eps-h",
        "1e-1",
    ]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8_lossy(&out.stdout).to_string();
    for field in ["c_sol", "c_nc", "j_sol", "j_nc", "k_bar_1", "k_bar_2", "j_cap", "n_meo"] {
        assert!(text.contains(field), "missing {field} in output");
    }
    // Deterministic output.
    let again = dncg(&[
        "bounds", "--l-h", "0", "--u-h", "10", "--f0", "5", "--f-low", "-1", "--n", "50",
        "--eps-g", "1e-4", "--eps-h", "1e-1",
    ]);
    assert_eq!(out.stdout, again.stdout);
}

#[test]
fn config_file_supplies_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(
        &cfg,
        "# defaults for the smoke run\nproblem=rosenbrock\nn=2\neps-g=1e-5\neps-h=1e-2\nseed=4\n",
    )
    .unwrap();
    let out = dncg(&["solve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    // Flags override the file: starve iterations.
    let out = dncg(&[
        "solve",
        "--config",
        cfg.to_str().unwrap(),
        "--max-iters",
        "1",
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn matrix_market_problem() {
    let dir = tempfile::tempdir().unwrap();
    let mtx = dir.path().join("h.mtx");
    let b = dir.path().join("b.txt");
    fs::write(
        &mtx,
        "%%MatrixMarket matrix coordinate real symmetric\n3 3 4\n1 1 4.0\n2 2 3.0\n3 3 2.0\n2 1 0.5\n",
    )
    .unwrap();
    fs::write(&b, "1.0\n-1.0\n0.5\n").unwrap();
    let problem = format!("mm:{}:{}", mtx.display(), b.display());
    let out = dncg(&[
        "solve",
        "--problem",
        &problem,
        "--eps-g",
        "1e-8",
        "--eps-h",
        "1e-1",
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));

    // Malformed header: usage error.
    let bad = dir.path().join("bad.mtx");
    fs::write(&bad, "%%MatrixMarket matrix coordinate real general\n1 1 1\n1 1 1.0\n").unwrap();
    let problem = format!("mm:{}", bad.display());
    let out = dncg(&["solve", "--problem", &problem]);
    assert_eq!(code(&out), 64);
}
