//! Trace and summary file writers.

use std::io::Write;
use std::path::Path;

use dncg_core::newton_cg::SolverReport;

/// One self-describing JSON object per step record, keys in struct order.
/// Identical runs produce byte-identical files.
pub fn write_trace(path: &Path, report: &SolverReport) -> std::io::Result<()> {
    let mut out = std::fs::File::create(path)?;
    for record in &report.trace {
        let line = serde_json::to_string(record).expect("step records always serialize");
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub const SUMMARY_HEADER: &str =
    "problem,n,seed,status,outer_steps,f_final,grad_norm_final,f_evals,grad_evals,hvp_evals,certificate_delta";

/// Fixed-header, one-row CSV summary.
pub fn write_summary(
    path: &Path,
    problem: &str,
    n: usize,
    seed: u64,
    report: &SolverReport,
) -> std::io::Result<()> {
    let mut out = std::fs::File::create(path)?;
    writeln!(out, "{SUMMARY_HEADER}")?;
    writeln!(
        out,
        "{},{},{},{:?},{},{},{},{},{},{},{}",
        problem,
        n,
        seed,
        report.status,
        report.steps().count(),
        report.f_final,
        report.grad_norm_final,
        report.counters.f_count,
        report.counters.grad_count,
        report.counters.hvp_count,
        report.certificate_delta,
    )?;
    Ok(())
}
