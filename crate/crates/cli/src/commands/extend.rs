//! `ulb extend`: patch small-radius asymptotics onto a computed table and
//! repeat the variation experiment on the extension.

use std::path::PathBuf;

use clap::Args;
use ulb_core::asymptotics::{
    first_monotonicity_violation, splice_tables, turkington_t, turkington_tprime, AsymptoticConfig,
};
use ulb_core::profile::SolverConfig;
use ulb_core::tprime::{Provenance, TTable};

use crate::csvio::ttable_to_csv;
use crate::errors::{CliError, CliResult};
use crate::manifest::RunScribe;
use crate::svg::Plot;

#[derive(Args, Debug)]
pub struct ExtendArgs {
    /// Computed T table CSV (with Tprime filled).
    #[arg(long)]
    pub table: PathBuf,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Smallest radius of the extension.
    #[arg(long, default_value_t = 0.00085)]
    pub sigma_lo: f64,
    /// Upper end of the asymptote sampling interval.
    #[arg(long, default_value_t = 0.170)]
    pub sigma_hi_asym: f64,
    /// Chebyshev sample count for the asymptote and the spline.
    #[arg(long, default_value_t = 100)]
    pub n_points: usize,
    /// Leftmost asymptotic samples kept as spline knots.
    #[arg(long, default_value_t = 10)]
    pub n_keep: usize,
    /// Right end of the spline segment.
    #[arg(long, default_value_t = 0.085)]
    pub splice_hi: f64,
    /// Overwrite existing artifacts.
    #[arg(long)]
    pub force: bool,
}

pub fn run(args: &ExtendArgs, threads: usize) -> CliResult<i32> {
    let computed = super::read_table(&args.table)?;
    let acfg = AsymptoticConfig {
        sigma_lo: args.sigma_lo,
        sigma_hi_asym: args.sigma_hi_asym,
        n_points: args.n_points,
        n_keep: args.n_keep,
        splice_hi: args.splice_hi,
    };
    let cfg = SolverConfig::default();
    let mut scribe = RunScribe::new("extend", &args.out, args.force, threads, cfg)?;
    scribe.set_asymptotic_config(acfg);
    scribe.set_parameters(serde_json::json!({
        "table": args.table.display().to_string(),
        "rows": computed.len(),
    }));

    let spliced = splice_tables(&computed, &acfg).map_err(CliError::from)?;
    scribe.write_artifact("extended.csv", &ttable_to_csv(&spliced))?;

    let mut code = 0;
    if let Some(idx) = first_monotonicity_violation(&spliced) {
        eprintln!(
            "warning: extended T is not strictly increasing at sigma = {} (row {idx})",
            spliced.samples()[idx].sigma
        );
        code = 1;
    }

    scribe.write_artifact("T_extended.svg", &extended_svg(&spliced, &acfg, false)?)?;
    scribe.write_artifact(
        "Tprime_extended.svg",
        &extended_svg(&spliced, &acfg, true)?,
    )?;

    // Repeat the variation experiment on the extension (the rows below the
    // splice radius; the computed range has its own rdot run).
    let extension_rows: Vec<_> = spliced
        .samples()
        .iter()
        .filter(|s| s.provenance != Provenance::Computed)
        .cloned()
        .collect();
    if !extension_rows.is_empty() {
        let ext_table = TTable::new(extension_rows).map_err(CliError::from)?;
        let (report, flagged) =
            super::rdot::sweep_and_emit(&mut scribe, &ext_table, &cfg, "extension_")?;
        super::rdot::print_verdict(&report, flagged);
        if !(report.all_positive && report.failures.is_empty() && flagged == 0) {
            code = 1;
        }
    } else {
        println!("no extension rows (n-keep = 0): table passed through unchanged");
    }

    scribe.finish(code)?;
    Ok(code)
}

/// Computed data with the dotted asymptote and the dashed spline segment.
fn extended_svg(spliced: &TTable, acfg: &AsymptoticConfig, tprime: bool) -> CliResult<String> {
    let pick = |s: &ulb_core::tprime::TSample| -> f64 {
        if tprime {
            s.tprime.unwrap_or(f64::NAN)
        } else {
            s.t
        }
    };
    let title = if tprime {
        "T'(sigma) with asymptotic extension"
    } else {
        "T(sigma) with asymptotic extension"
    };
    let mut plot = Plot::new(title, "sigma", if tprime { "T'" } else { "T" });

    let computed: Vec<_> = spliced
        .samples()
        .iter()
        .filter(|s| s.provenance == Provenance::Computed)
        .collect();
    let spline: Vec<_> = spliced
        .samples()
        .iter()
        .filter(|s| s.provenance == Provenance::Spline)
        .collect();

    if computed.len() > 1 {
        let sig: Vec<f64> = computed.iter().map(|s| s.sigma).collect();
        let val: Vec<f64> = computed.iter().map(|s| pick(s)).collect();
        let (xs, ys) = super::sample_interpolant(
            sig[0],
            sig[sig.len() - 1],
            &val,
            super::CURVE_SAMPLES,
        )?;
        plot.line(&xs, &ys, "steelblue", 1.5, None);
        plot.markers(&sig, &val, "black", 1.8);
    }

    // The asymptote over its sampling interval, dotted.
    let n = super::CURVE_SAMPLES;
    let mut ax = Vec::with_capacity(n);
    let mut ay = Vec::with_capacity(n);
    for i in 0..n {
        let s = acfg.sigma_lo + (acfg.sigma_hi_asym - acfg.sigma_lo) * i as f64 / (n - 1) as f64;
        let v = if tprime {
            turkington_tprime(s)
        } else {
            turkington_t(s)
        };
        if let Ok(v) = v {
            ax.push(s);
            ay.push(v);
        }
    }
    plot.line(&ax, &ay, "gray", 1.2, Some("2 3"));

    if spline.len() > 1 {
        let sig: Vec<f64> = spline.iter().map(|s| s.sigma).collect();
        let val: Vec<f64> = spline.iter().map(|s| pick(s)).collect();
        plot.line(&sig, &val, "firebrick", 1.4, Some("7 4"));
    }

    plot.legend_entry("steelblue", "computed");
    plot.legend_entry("gray", "asymptote (dotted)");
    plot.legend_entry("firebrick", "spline (dashed)");
    Ok(plot.render())
}
