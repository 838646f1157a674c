//! `calibrate-oracle` subcommand: Monte-Carlo estimate of the oracle's
//! false-certificate rate on a fixed diagonal spectrum.

use std::collections::BTreeMap;

use clap::Args;

use dncg_core::eig_oracle::{cg_negative_curvature_probe, lanczos_adaptive, lanczos_min_eig};
use dncg_core::vector::Vector;
use dncg_core::{OracleKind, RngStream};

use crate::solve_cmd::parse_oracle;
use crate::{EXIT_OK, EXIT_USAGE};

#[derive(Args)]
pub struct CalibrateArgs {
    /// Number of independent trials.
    #[arg(long)]
    trials: usize,
    /// Oracle failure probability.
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    /// Curvature tolerance.
    #[arg(long, default_value_t = 1.0)]
    eps: f64,
    /// Comma-separated eigenvalues of the diagonal test matrix.
    #[arg(long, allow_hyphen_values = true)]
    spectrum: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Oracle: lanczos | lanczos-adaptive | cg-probe | dense.
    #[arg(long, default_value = "lanczos")]
    oracle: String,
}

pub fn run_calibrate(args: CalibrateArgs) -> i32 {
    if args.trials == 0 {
        eprintln!("error: --trials must be positive");
        return EXIT_USAGE;
    }
    let spectrum: Result<Vec<f64>, _> = args
        .spectrum
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect();
    let spectrum = match spectrum {
        Ok(s) if !s.is_empty() => s,
        Ok(_) => {
            eprintln!("error: --spectrum must contain at least one eigenvalue");
            return EXIT_USAGE;
        }
        Err(e) => {
            eprintln!("error: --spectrum: {e}");
            return EXIT_USAGE;
        }
    };
    let oracle = match parse_oracle(&args.oracle) {
        Ok(k) => k,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    if !(args.delta > 0.0 && args.delta < 1.0) {
        eprintln!("error: --delta must lie in (0,1) for calibration");
        return EXIT_USAGE;
    }
    if args.eps.is_nan() || args.eps <= 0.0 {
        eprintln!("error: --eps must be positive");
        return EXIT_USAGE;
    }

    let n = spectrum.len();
    let lambda_min = spectrum.iter().cloned().fold(f64::INFINITY, f64::min);
    let norm_bound = spectrum.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    let diag = Vector::from_vec(spectrum.clone());
    let has_negative_curvature = lambda_min < -args.eps;

    let mut failures = 0usize;
    let mut witness_violations = 0usize;
    let mut histogram: BTreeMap<u64, usize> = BTreeMap::new();

    for trial in 0..args.trials {
        let mut rng = RngStream::derive(args.seed, trial as u64);
        let hvp = |v: &Vector| v.component_mul(&diag);
        let outcome = match oracle {
            OracleKind::LanczosKnownM => {
                lanczos_min_eig(hvp, n, args.eps, args.delta, norm_bound.max(1e-300), &mut rng)
            }
            OracleKind::LanczosAdaptive => {
                lanczos_adaptive(hvp, n, args.eps, args.delta, &mut rng)
            }
            OracleKind::CgProbe => {
                cg_negative_curvature_probe(hvp, n, args.eps, args.delta, norm_bound, &mut rng)
            }
            OracleKind::DenseExact => {
                dncg_core::eig_oracle::dense_exact_oracle(hvp, n, args.eps)
            }
        };
        let outcome = match outcome {
            Ok(o) => o,
            Err(e) => {
                eprintln!("error: oracle failed on trial {trial}: {e}");
                return EXIT_USAGE;
            }
        };
        *histogram.entry(outcome.hvp_used).or_insert(0) += 1;
        if outcome.is_certificate() {
            if has_negative_curvature {
                failures += 1;
            }
        } else if let Some((lambda, v)) = outcome.witness() {
            let vhv = v.component_mul(&diag).dot(v);
            let ok = (v.norm() - 1.0).abs() <= 1e-10
                && (vhv - lambda).abs() <= 1e-8 * lambda.abs().max(1.0)
                && lambda <= -args.eps / 2.0 + 1e-12;
            if !ok {
                witness_violations += 1;
            }
        }
    }

    let rate = failures as f64 / args.trials as f64;
    let sigma = (args.delta * (1.0 - args.delta) / args.trials as f64).sqrt();
    let threshold = args.delta + 3.0 * sigma;
    // Reference iteration budget for the known-bound implementations.
    let budget = {
        let raw =
            0.5 * (2.75 * n as f64 / (args.delta * args.delta)).ln() * (norm_bound / args.eps).sqrt();
        if !raw.is_finite() || 1.0 + raw >= n as f64 {
            n as u64
        } else {
            1 + raw.ceil() as u64
        }
    };

    println!("oracle                  {}", args.oracle);
    println!("spectrum                {:?}", spectrum);
    println!("trials                  {}", args.trials);
    println!("lambda_min              {lambda_min}");
    println!("false certificates      {failures}");
    println!("failure rate            {rate}");
    println!("acceptance threshold    {threshold} (delta + 3 sigma)");
    println!("witness violations      {witness_violations}");
    println!("iteration bound (known-M formula)  {budget}");
    println!("iteration histogram:");
    for (iters, count) in &histogram {
        println!("  {iters:>6} products  {count:>8} trials");
    }

    if rate <= threshold {
        EXIT_OK
    } else {
        1
    }
}
