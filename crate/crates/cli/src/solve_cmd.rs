//! `solve` and `bounds` subcommands.

use std::path::PathBuf;

use clap::Args;

use dncg_core::bounds::compute_bounds;
use dncg_core::newton_cg::{solve_audited, SolverStatus, StepKind};
use dncg_core::problems::by_name;
use dncg_core::vector::Vector;
use dncg_core::{OracleKind, SolverConfig};

use crate::config_file::FileDefaults;
use crate::output;
use crate::{EXIT_LINE_SEARCH, EXIT_MAX_ITERS, EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE};

#[derive(Args)]
#[command(allow_negative_numbers = true)]
pub struct SolveArgs {
    /// Problem name (see README for the list; `mm:<mtx>[:<b>]` loads files).
    #[arg(long)]
    problem: Option<String>,
    /// Problem dimension (ignored by `mm:` problems).
    #[arg(long)]
    n: Option<usize>,
    /// Starting point: `default` or a comma-separated vector.
    #[arg(long, allow_hyphen_values = true)]
    x0: Option<String>,
    #[arg(long = "eps-g")]
    eps_g: Option<f64>,
    #[arg(long = "eps-h")]
    eps_h: Option<f64>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    zeta: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    /// Oracle: lanczos | lanczos-adaptive | cg-probe | dense.
    #[arg(long)]
    oracle: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long = "max-iters")]
    max_iters: Option<usize>,
    /// Write one JSON step record per line to this path.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Write a one-row CSV summary to this path.
    #[arg(long)]
    summary: Option<PathBuf>,
    /// Audit per-step decrease bounds (requires the problem's Hessian
    /// Lipschitz hint).
    #[arg(long = "check-bounds")]
    check_bounds: bool,
    /// key=value file supplying defaults for absent flags.
    #[arg(long)]
    config: Option<PathBuf>,
}

fn usage(msg: impl std::fmt::Display) -> i32 {
    eprintln!("error: {msg}");
    EXIT_USAGE
}

pub fn parse_oracle(name: &str) -> Result<OracleKind, String> {
    match name {
        "lanczos" => Ok(OracleKind::LanczosKnownM),
        "lanczos-adaptive" => Ok(OracleKind::LanczosAdaptive),
        "cg-probe" => Ok(OracleKind::CgProbe),
        "dense" => Ok(OracleKind::DenseExact),
        other => Err(format!(
            "unknown oracle '{other}' (expected lanczos, lanczos-adaptive, cg-probe, or dense)"
        )),
    }
}

pub fn run_solve(args: SolveArgs) -> i32 {
    let defaults = match &args.config {
        Some(path) => match FileDefaults::load(path) {
            Ok(d) => d,
            Err(e) => return usage(e),
        },
        None => FileDefaults::empty(),
    };
    macro_rules! fill {
        ($field:expr, $key:literal) => {
            match defaults.fill($field, $key) {
                Ok(v) => v,
                Err(e) => return usage(e),
            }
        };
    }

    let problem_name = match fill!(args.problem, "problem") {
        Some(p) => p,
        None => return usage("--problem is required"),
    };
    let n = fill!(args.n, "n").unwrap_or(2);
    let oracle_name = fill!(args.oracle, "oracle").unwrap_or_else(|| "lanczos-adaptive".into());
    let oracle_kind = match parse_oracle(&oracle_name) {
        Ok(k) => k,
        Err(e) => return usage(e),
    };
    let seed = fill!(args.seed, "seed").unwrap_or(0);
    let base = SolverConfig::default();
    let config = SolverConfig {
        eps_g: fill!(args.eps_g, "eps-g").unwrap_or(base.eps_g),
        eps_h: fill!(args.eps_h, "eps-h").unwrap_or(base.eps_h),
        theta: fill!(args.theta, "theta").unwrap_or(base.theta),
        zeta: fill!(args.zeta, "zeta").unwrap_or(base.zeta),
        eta: fill!(args.eta, "eta").unwrap_or(base.eta),
        delta: fill!(args.delta, "delta").unwrap_or(base.delta),
        m_bound: None,
        max_outer_iters: fill!(args.max_iters, "max-iters").unwrap_or(base.max_outer_iters),
        max_ls_iters: base.max_ls_iters,
        rng_seed: seed,
        oracle_kind,
    };
    let config = match config.validated() {
        Ok(c) => c,
        Err(e) => return usage(e),
    };

    let (problem, spec) = match by_name(&problem_name, n) {
        Ok(p) => p,
        Err(e) => return usage(e),
    };
    let x0 = match fill!(args.x0, "x0") {
        None => spec.x0_default.clone(),
        Some(s) if s == "default" => spec.x0_default.clone(),
        Some(csv) => {
            let parsed: Result<Vec<f64>, _> =
                csv.split(',').map(|t| t.trim().parse::<f64>()).collect();
            match parsed {
                Ok(v) if v.len() == spec.n => Vector::from_vec(v),
                Ok(v) => {
                    return usage(format!(
                        "--x0 has {} components but the problem has dimension {}",
                        v.len(),
                        spec.n
                    ))
                }
                Err(e) => return usage(format!("--x0: {e}")),
            }
        }
    };

    let l_h = if args.check_bounds {
        match spec.l_h_hint {
            Some(lh) => Some(lh),
            None => {
                return usage(format!(
                    "--check-bounds requires a Hessian Lipschitz hint, which '{}' does not carry",
                    spec.name
                ))
            }
        }
    } else {
        None
    };

    let report = match solve_audited(problem.as_ref(), &x0, &config, l_h) {
        Ok(r) => r,
        Err(e) => return usage(e),
    };

    println!("problem         {}", spec.name);
    println!("status          {:?}", report.status);
    println!("outer steps     {}", report.steps().count());
    println!("f final         {}", report.f_final);
    println!("grad norm       {}", report.grad_norm_final);
    println!(
        "evaluations     f={} grad={} hvp={}",
        report.counters.f_count, report.counters.grad_count, report.counters.hvp_count
    );
    println!(
        "unit cost       {} (grad + hvp)",
        report.counters.unit_cost()
    );
    if args.check_bounds {
        let (ok, bad, skipped) = report.steps().fold((0, 0, 0), |acc, r| {
            match (r.step_kind, r.decrease_bound_ok) {
                (StepKind::Terminal, _) => acc,
                (_, Some(true)) => (acc.0 + 1, acc.1, acc.2),
                (_, Some(false)) => (acc.0, acc.1 + 1, acc.2),
                (_, None) => (acc.0, acc.1, acc.2 + 1),
            }
        });
        println!("decrease audit  ok={ok} violated={bad} not-evaluated={skipped}");
    }

    if let Some(path) = &args.trace {
        if let Err(e) = output::write_trace(path, &report) {
            return usage(format!("cannot write trace: {e}"));
        }
    }
    if let Some(path) = &args.summary {
        if let Err(e) = output::write_summary(path, &spec.name, spec.n, seed, &report) {
            return usage(format!("cannot write summary: {e}"));
        }
    }

    match report.status {
        SolverStatus::SecondOrderPoint => EXIT_OK,
        SolverStatus::MaxIters => EXIT_MAX_ITERS,
        SolverStatus::LineSearchFail => EXIT_LINE_SEARCH,
        SolverStatus::NumericalFail => EXIT_NUMERICAL,
    }
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
pub struct BoundsArgs {
    /// Hessian Lipschitz constant.
    #[arg(long = "l-h")]
    l_h: f64,
    /// Bound on the Hessian norm over the level set.
    #[arg(long = "u-h")]
    u_h: f64,
    /// Objective value at the start.
    #[arg(long)]
    f0: f64,
    /// Lower bound on the objective.
    #[arg(long = "f-low")]
    f_low: f64,
    #[arg(long)]
    n: usize,
    #[arg(long = "eps-g", default_value_t = 1e-5)]
    eps_g: f64,
    #[arg(long = "eps-h", default_value_t = 1e-2)]
    eps_h: f64,
    #[arg(long, default_value_t = 0.5)]
    theta: f64,
    #[arg(long, default_value_t = 0.5)]
    zeta: f64,
    #[arg(long, default_value_t = 0.1)]
    eta: f64,
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
}

pub fn run_bounds(args: BoundsArgs) -> i32 {
    let config = SolverConfig {
        eps_g: args.eps_g,
        eps_h: args.eps_h,
        theta: args.theta,
        zeta: args.zeta,
        eta: args.eta,
        delta: args.delta,
        ..Default::default()
    };
    let report = match compute_bounds(args.l_h, args.u_h, args.f0, args.f_low, &config, args.n) {
        Ok(r) => r,
        Err(e) => return usage(e),
    };
    println!("quantity   value");
    println!("c_sol      {}", report.c_sol);
    println!("c_nc       {}", report.c_nc);
    println!("j_sol      {}", report.j_sol);
    println!("j_nc       {}", report.j_nc);
    println!("k_bar_1    {}", report.k_bar_1);
    println!("k_bar_2    {}", report.k_bar_2);
    println!("j_cap      {}", report.j_cap);
    println!("n_meo      {}", report.n_meo);
    println!();
    println!("c_sol,c_nc,j_sol,j_nc,k_bar_1,k_bar_2,j_cap,n_meo");
    println!(
        "{},{},{},{},{},{},{},{}",
        report.c_sol,
        report.c_nc,
        report.j_sol,
        report.j_nc,
        report.k_bar_1,
        report.k_bar_2,
        report.j_cap,
        report.n_meo
    );
    EXIT_OK
}
