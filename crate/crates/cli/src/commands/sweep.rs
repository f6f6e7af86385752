//! `ulb sweep-t`: T(sigma) on a Chebyshev grid, spectrally differentiated.

use std::path::PathBuf;

use clap::Args;
use ulb_core::chebyshev::cheb_points;
use ulb_core::profile::{sweep_t, SolverConfig};
use ulb_core::tprime::{differentiate_t, TTable};

use crate::csvio::{columns_to_csv, ttable_to_csv};
use crate::errors::{CliError, CliResult};
use crate::manifest::{RowRecord, RunScribe};
use crate::svg::Plot;

#[derive(Args, Debug)]
pub struct SweepArgs {
    /// Smallest vertical-point radius.
    #[arg(long, default_value_t = 0.085)]
    pub sigma_min: f64,
    /// Largest vertical-point radius.
    #[arg(long, default_value_t = 2.0)]
    pub sigma_max: f64,
    /// Number of Chebyshev sample points.
    #[arg(long, default_value_t = 100)]
    pub num: usize,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Overwrite existing artifacts.
    #[arg(long)]
    pub force: bool,
}

pub fn run(args: &SweepArgs, threads: usize) -> CliResult<i32> {
    if !(args.sigma_min > 0.0) {
        return Err(CliError::Usage(format!(
            "--sigma-min must be positive, got {}",
            args.sigma_min
        )));
    }
    if args.num == 0 {
        return Err(CliError::Usage("--num must be at least 1".into()));
    }
    if args.num > 1 && !(args.sigma_min < args.sigma_max) {
        return Err(CliError::Usage(format!(
            "need --sigma-min < --sigma-max, got {} and {}",
            args.sigma_min, args.sigma_max
        )));
    }

    let cfg = SolverConfig::default();
    let mut scribe = RunScribe::new("sweep-t", &args.out, args.force, threads, cfg)?;
    scribe.set_parameters(serde_json::json!({
        "sigma_min": args.sigma_min,
        "sigma_max": args.sigma_max,
        "num": args.num,
    }));

    let sigmas = if args.num == 1 {
        vec![args.sigma_min]
    } else {
        cheb_points(args.num, (args.sigma_min, args.sigma_max)).map_err(CliError::from)?
    };
    let outcome = sweep_t(&sigmas, &cfg).map_err(CliError::from)?;

    for s in outcome.table.samples() {
        scribe.push_row(RowRecord {
            sigma: s.sigma,
            status: "converged".into(),
            b_final: s.b_final,
            n_final: s.n_final,
            iterations: None,
            newton_residual: s.newton_residual,
            flags: vec![],
        });
    }
    for f in &outcome.failures {
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

    // T' requires the complete Chebyshev grid; skip it when rows failed or
    // the sweep is a single point.
    let complete = outcome.failures.is_empty() && outcome.table.len() == sigmas.len();
    let table = if complete && args.num > 1 {
        differentiate_t(&outcome.table).map_err(CliError::from)?
    } else {
        outcome.table.clone()
    };

    scribe.write_artifact("ttable.csv", &ttable_to_csv(&table))?;

    let b_finals: Vec<f64> = table
        .samples()
        .iter()
        .map(|s| s.b_final.unwrap_or(f64::NAN))
        .collect();
    scribe.write_artifact(
        "b_sigma.csv",
        &columns_to_csv("sigma,b_final", &[], &[&table.sigmas(), &b_finals]),
    )?;

    scribe.write_artifact("T_sigma.svg", &table_svg(&table, false, "T(sigma)")?)?;
    if table.samples().iter().all(|s| s.tprime.is_some()) && args.num > 1 {
        scribe.write_artifact("Tprime_sigma.svg", &table_svg(&table, true, "T'(sigma)")?)?;
    }
    scribe.write_artifact("b_sigma.svg", &b_svg(&table))?;

    let code = if outcome.failures.is_empty() { 0 } else { 1 };
    println!(
        "swept {} radii: {} converged, {} failed",
        sigmas.len(),
        table.len(),
        outcome.failures.len()
    );
    scribe.finish(code)?;
    Ok(code)
}

/// Node markers plus the polynomial interpolant through them.
pub(crate) fn table_svg(table: &TTable, tprime: bool, title: &str) -> CliResult<String> {
    let sigmas = table.sigmas();
    let values: Vec<f64> = if tprime {
        table.samples().iter().map(|s| s.tprime.unwrap()).collect()
    } else {
        table.t_values()
    };
    let mut plot = Plot::new(title, "sigma", if tprime { "T'" } else { "T" });
    if sigmas.len() > 1 {
        let (xs, ys) = super::sample_interpolant(
            sigmas[0],
            sigmas[sigmas.len() - 1],
            &values,
            super::CURVE_SAMPLES,
        )?;
        plot.line(&xs, &ys, "steelblue", 1.5, None);
    }
    plot.markers(&sigmas, &values, "black", 2.2);
    Ok(plot.render())
}

fn b_svg(table: &TTable) -> String {
    let sigmas = table.sigmas();
    let bs: Vec<f64> = table
        .samples()
        .iter()
        .map(|s| s.b_final.unwrap_or(f64::NAN))
        .collect();
    let mut plot = Plot::new("accepted truncation radius", "sigma", "b");
    plot.line(&sigmas, &bs, "steelblue", 1.5, None);
    plot.markers(&sigmas, &bs, "black", 2.2);
    plot.render()
}
