//! `ulb rdot`: the variation experiment over a T table, with the
//! hypothesis verdict.

use std::path::PathBuf;

use clap::Args;
use ulb_core::profile::SolverConfig;
use ulb_core::tprime::TTable;
use ulb_core::variation::{sweep_variation, SweepReport};

use crate::csvio::{columns_to_csv, fmt_f64};
use crate::errors::{CliError, CliResult};
use crate::manifest::{RowRecord, RunScribe};
use crate::svg::Plot;

#[derive(Args, Debug)]
pub struct RdotArgs {
    /// T table CSV (needs the Tprime column filled).
    #[arg(long)]
    pub table: PathBuf,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Overwrite existing artifacts.
    #[arg(long)]
    pub force: bool,
}

pub fn run(args: &RdotArgs, threads: usize) -> CliResult<i32> {
    let table = super::read_table(&args.table)?;
    if table.samples().iter().all(|s| s.tprime.is_none()) {
        return Err(CliError::Usage(format!(
            "{} carries no Tprime values; run sweep-t (or extend) first",
            args.table.display()
        )));
    }
    let cfg = SolverConfig::default();
    let mut scribe = RunScribe::new("rdot", &args.out, args.force, threads, cfg)?;
    scribe.set_parameters(serde_json::json!({
        "table": args.table.display().to_string(),
        "rows": table.len(),
    }));

    let report = sweep_variation(&table, &cfg).map_err(CliError::from)?;
    let flagged = emit_sweep_artifacts(&mut scribe, &report, "")?;

    let code =!(report.all_positive && report.failures.is_empty() && flagged == 0) as i32;
    print_verdict(&report, flagged);
    scribe.finish(code)?;
    Ok(code)
}

pub(crate) fn print_verdict(report: &SweepReport, flagged: usize) {
    if report.all_positive && report.failures.is_empty() && flagged == 0 {
        println!(
            "HYPOTHESIS-3 SATISFIED: min rdot = {} > 0 over {} trajectories",
            report.global_min_rdot,
            report.trajectories.len()
        );
    } else {
        println!(
            "HYPOTHESIS-3 NOT SATISFIED: min rdot = {}, {} failed rows, {} flagged rows",
            report.global_min_rdot,
            report.failures.len(),
            flagged
        );
    }
}

/// Summary CSV, one trajectory CSV per row, the foliation picture, and the
/// minimum picture. Returns the number of flagged rows.
pub(crate) fn emit_sweep_artifacts(
    scribe: &mut RunScribe,
    report: &SweepReport,
    prefix: &str,
) -> CliResult<usize> {
    let mut flagged = 0usize;
    for tr in &report.trajectories {
        let mut flags = Vec::new();
        if !tr.udot_positive {
            flags.push("udot_not_positive".to_string());
            flagged += 1;
            eprintln!(
                "row sigma = {}: udot fails to stay positive on (0, pi/2]",
                tr.sigma
            );
        }
        if !(tr.min_rdot > 0.0) {
            flags.push("rdot_not_positive".to_string());
            eprintln!("row sigma = {}: min rdot = {}", tr.sigma, tr.min_rdot);
        }
        scribe.push_row(RowRecord {
            sigma: tr.sigma,
            status: "integrated".into(),
            b_final: None,
            n_final: None,
            iterations: None,
            newton_residual: None,
            flags,
        });
    }
    for f in &report.failures {
        eprintln!("row sigma = {} failed: {}", f.sigma, f.error);
        scribe.push_row(RowRecord {
            sigma: f.sigma,
            status: format!("failed: {}", f.error),
            b_final: None,
            n_final: None,
            iterations: None,
            newton_residual: None,
            flags: vec![],
        });
    }

    let sigmas: Vec<f64> = report.trajectories.iter().map(|t| t.sigma).collect();
    let mins: Vec<f64> = report.trajectories.iter().map(|t| t.min_rdot).collect();
    let argmins: Vec<f64> = report.trajectories.iter().map(|t| t.argmin_phi).collect();
    let ends: Vec<f64> = report.trajectories.iter().map(|t| t.rdot_at_0).collect();
    scribe.write_artifact(
        &format!("{prefix}summary.csv"),
        &columns_to_csv(
            "sigma,min_rdot,argmin_phi,rdot_at_0",
            &[],
            &[&sigmas, &mins, &argmins, &ends],
        ),
    )?;

    for (i, tr) in report.trajectories.iter().enumerate() {
        scribe.write_artifact(
            &format!("{prefix}trajectories/traj_{i:03}.csv"),
            &columns_to_csv(
                "phi,r,u,rdot,udot",
                &[format!("sigma = {}", fmt_f64(tr.sigma))],
                &[&tr.phis, &tr.r, &tr.u, &tr.rdot, &tr.udot],
            ),
        )?;
    }

    // Foliation of the (phi, rdot) plane.
    let mut fol = Plot::new("variation of the radius over the family", "phi", "rdot");
    fol.include(0.0, 0.0);
    for tr in &report.trajectories {
        fol.line(&tr.phis, &tr.rdot, "steelblue", 0.8, None);
    }
    fol.hline(0.0, "gray", Some("5 4"));
    scribe.write_artifact(&format!("{prefix}foliation.svg"), &fol.render())?;

    // Endpoint value and the running minimum (dotted where they differ).
    let mut min_plot = Plot::new("smallest radial variation per radius", "sigma", "rdot");
    min_plot.include(sigmas.first().copied().unwrap_or(0.0), 0.0);
    min_plot.line(&sigmas, &ends, "steelblue", 1.5, None);
    min_plot.line(&sigmas, &mins, "firebrick", 1.5, Some("2 4"));
    min_plot.hline(0.0, "gray", Some("5 4"));
    min_plot.legend_entry("steelblue", "rdot at phi = 0");
    min_plot.legend_entry("firebrick", "min rdot (dotted)");
    scribe.write_artifact(&format!("{prefix}min_rdot.svg"), &min_plot.render())?;

    Ok(flagged)
}

/// Shared by `extend`: run the sweep and emit artifacts under a prefix.
pub(crate) fn sweep_and_emit(
    scribe: &mut RunScribe,
    table: &TTable,
    cfg: &SolverConfig,
    prefix: &str,
) -> CliResult<(SweepReport, usize)> {
    let report = sweep_variation(table, cfg).map_err(CliError::from)?;
    let flagged = emit_sweep_artifacts(scribe, &report, prefix)?;
    Ok((report, flagged))
}
