//! `ulb verify`: run the cross-check battery on one radius or a table.

use std::path::PathBuf;

use clap::Args;
use ulb_core::profile::{top_portion, SolverConfig};
use ulb_core::tprime::Provenance;
use ulb_core::verification::{
    verify_profile, vogel_bounds_check, volume_check, VerificationReport,
};

use crate::csvio::fmt_f64;
use crate::errors::{CliError, CliResult};
use crate::manifest::RunScribe;

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Verify a single bridge at this radius.
    #[arg(long, conflicts_with = "table")]
    pub sigma: Option<f64>,
    /// Verify every computed row of a T table CSV.
    #[arg(long)]
    pub table: Option<PathBuf>,
    /// Optional output directory for the report CSV and manifest.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overwrite existing artifacts.
    #[arg(long)]
    pub force: bool,
}

pub fn run(args: &VerifyArgs, threads: usize) -> CliResult<i32> {
    let cfg = SolverConfig::default();
    let report = match (&args.sigma, &args.table) {
        (Some(sigma), None) => {
            if !(*sigma > 0.0) {
                return Err(CliError::Usage(format!(
                    "--sigma must be positive, got {sigma}"
                )));
            }
            verify_profile(*sigma, &cfg).map_err(CliError::from)?
        }
        (None, Some(path)) => verify_table(path, &cfg)?,
        _ => {
            return Err(CliError::Usage(
                "pass exactly one of --sigma or --table".into(),
            ))
        }
    };

    let mut csv = String::from("name,status,measured,tolerance\n");
    for c in &report.checks {
        let status = if c.passed { "PASS" } else { "FAIL" };
        println!("{},{},{},{}", c.name, status, fmt_f64(c.measured), fmt_f64(c.tolerance));
        csv.push_str(&format!(
            "{},{status},{},{}\n",
            c.name,
            fmt_f64(c.measured),
            fmt_f64(c.tolerance)
        ));
    }
    let code = i32::from(!report.all_passed());
    println!(
        "{} checks, {} failed",
        report.checks.len(),
        report.checks.iter().filter(|c| !c.passed).count()
    );

    if let Some(out) = &args.out {
        let mut scribe = RunScribe::new("verify", out, args.force, threads, cfg)?;
        scribe.set_parameters(serde_json::json!({
            "sigma": args.sigma,
            "table": args.table.as_ref().map(|p| p.display().to_string()),
        }));
        scribe.write_artifact("verify_report.csv", &csv)?;
        scribe.finish(code)?;
    }
    Ok(code)
}

/// Table-level battery: monotonicity and the height bound across rows,
/// then the geometric checks on every computed row.
fn verify_table(path: &std::path::Path, cfg: &SolverConfig) -> CliResult<VerificationReport> {
    let table = super::read_table(path)?;
    let mut report = VerificationReport::default();

    let increasing = table.samples().windows(2).all(|w| w[1].t > w[0].t);
    report.push(
        "table_T_strictly_increasing",
        increasing,
        if increasing { 1.0 } else { 0.0 },
        1.0,
    );

    let worst_t = table.samples().iter().map(|s| s.t).fold(0.0f64, f64::max);
    report.push("table_height_bound_sqrt2", worst_t < 2.0f64.sqrt(), worst_t, 2.0f64.sqrt());

    let tprime_rows: Vec<f64> = table
        .samples()
        .iter()
        .filter_map(|s| s.tprime)
        .collect();
    if !tprime_rows.is_empty() {
        let worst = tprime_rows.iter().fold(f64::INFINITY, |a, &b| a.min(b));
        report.push("table_Tprime_nonnegative", worst >= 0.0, worst, 0.0);
    }

    let mut worst_vogel_ok = true;
    let mut worst_volume_gap = 0.0f64;
    for s in table.samples() {
        if s.provenance != Provenance::Computed {
            continue;
        }
        let top = top_portion(s.sigma, s.t, cfg).map_err(CliError::from)?;
        if !vogel_bounds_check(s.sigma, s.t, top.r_at_0()) {
            worst_vogel_ok = false;
            eprintln!("Vogel sandwich fails at sigma = {}", s.sigma);
        }
        let vc = volume_check(s.sigma, s.t, 0.0, cfg).map_err(CliError::from)?;
        worst_volume_gap = worst_volume_gap.max(vc.relative_gap());
    }
    report.push(
        "rows_vogel_sandwich",
        worst_vogel_ok,
        if worst_vogel_ok { 1.0 } else { 0.0 },
        1.0,
    );
    report.push("rows_volume_identity", worst_volume_gap < 1e-8, worst_volume_gap, 1e-8);
    Ok(report)
}
