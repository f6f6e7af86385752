//! `ulb profile`: solve one bridge and emit the generating curve.

use std::path::PathBuf;

use clap::Args;
use ulb_core::bvp::{BvpState, NewtonReport};
use ulb_core::chebyshev::bary_eval;
use ulb_core::profile::{solve_fixed_b, solve_t, top_portion, SolverConfig, TopPortion};

use crate::csvio::{columns_to_csv, fmt_f64};
use crate::errors::{CliError, CliResult};
use crate::manifest::{RowRecord, RunScribe};
use crate::svg::Plot;

#[derive(Args, Debug)]
pub struct ProfileArgs {
    /// Radius of the vertical point.
    #[arg(long)]
    pub sigma: f64,
    /// Solve at this fixed truncation radius instead of growing it until
    /// T stabilizes.
    #[arg(long)]
    pub b: Option<f64>,
    /// Outer-boundary inclination (only with --b).
    #[arg(long, requires = "b")]
    pub psi_b: Option<f64>,
    /// Capillary constant.
    #[arg(long, default_value_t = 1.0)]
    pub kappa: f64,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Overwrite existing artifacts.
    #[arg(long)]
    pub force: bool,
}

pub fn run(args: &ProfileArgs, threads: usize) -> CliResult<i32> {
    if !(args.sigma > 0.0) {
        return Err(CliError::Usage(format!(
            "--sigma must be positive, got {}",
            args.sigma
        )));
    }
    if !(args.kappa > 0.0) {
        return Err(CliError::Usage(format!(
            "--kappa must be positive, got {}",
            args.kappa
        )));
    }
    let cfg = SolverConfig {
        kappa: args.kappa,
        ..SolverConfig::default()
    };
    let mut scribe = RunScribe::new("profile", &args.out, args.force, threads, cfg)?;
    scribe.set_parameters(serde_json::json!({
        "sigma": args.sigma,
        "b": args.b,
        "psi_b": args.psi_b,
        "kappa": args.kappa,
    }));

    let solved: CliResult<(BvpState, NewtonReport, f64)> = match args.b {
        Some(b) => solve_fixed_b(args.sigma, b, args.psi_b.unwrap_or(0.0), &cfg)
            .map(|(s, r)| (s, r, b))
            .map_err(CliError::from),
        None => solve_t(args.sigma, &cfg)
            .map(|sol| (sol.state, sol.report, sol.b_final))
            .map_err(CliError::from),
    };
    let (state, report, b_final) = match solved {
        Ok(v) => v,
        Err(CliError::Numerical(msg)) => {
            eprintln!("profile solve failed: {msg}");
            scribe.push_row(RowRecord {
                sigma: args.sigma,
                status: format!("failed: {msg}"),
                b_final: None,
                n_final: None,
                iterations: None,
                newton_residual: None,
                flags: vec![],
            });
            scribe.finish(1)?;
            return Ok(1);
        }
        Err(e) => return Err(e),
    };

    let t = state.inner_height();
    scribe.push_row(RowRecord {
        sigma: args.sigma,
        status: "converged".into(),
        b_final: Some(b_final),
        n_final: Some(report.n_final),
        iterations: Some(report.iterations),
        newton_residual: Some(report.final_residual),
        flags: vec![],
    });

    // Lower-portion CSV on the collocation grid.
    let comments = vec![
        format!(
            "sigma = {}, b = {}, psi_b = {}, kappa = {}",
            fmt_f64(args.sigma),
            fmt_f64(b_final),
            fmt_f64(args.psi_b.unwrap_or(0.0)),
            fmt_f64(args.kappa)
        ),
        format!("ell = {}", fmt_f64(state.ell)),
        format!("T = {}", fmt_f64(t)),
    ];
    scribe.write_artifact(
        "profile.csv",
        &columns_to_csv(
            "tau,R,U,Psi",
            &comments,
            &[state.grid.nodes(), &state.r, &state.u, &state.psi],
        ),
    )?;

    let top = top_portion(args.sigma, t, &cfg).map_err(CliError::from)?;
    scribe.write_artifact(
        "top.csv",
        &columns_to_csv(
            "phi,r,u",
            &[format!("sigma = {}", fmt_f64(args.sigma))],
            &[top.grid().nodes(), top.r(), top.u()],
        ),
    )?;

    scribe.write_artifact("profile.svg", &curve_svg(args.sigma, b_final, &state, &top)?)?;

    println!(
        "sigma = {}: T = {} (b = {b_final}, n = {}, {} Newton iterations)",
        args.sigma, t, report.n_final, report.iterations
    );
    scribe.finish(0)?;
    Ok(0)
}

/// The generating curve in the (r, u) plane: spectral lower portion,
/// integrated top portion, the reference height u = 0, and the truncation
/// radius.
fn curve_svg(sigma: f64, b: f64, state: &BvpState, top: &TopPortion) -> CliResult<String> {
    let mut plot = Plot::new(
        &format!("generating curve, sigma = {sigma}"),
        "r",
        "u",
    );
    let n = super::CURVE_SAMPLES;
    let taus: Vec<f64> = (0..n).map(|i| -1.0 + 2.0 * i as f64 / (n - 1) as f64).collect();
    let r_low = bary_eval(&state.grid, &state.r, &taus).map_err(CliError::from)?;
    let u_low = bary_eval(&state.grid, &state.u, &taus).map_err(CliError::from)?;
    plot.include(0.0, 0.0);
    plot.line(&r_low, &u_low, "steelblue", 1.8, None);
    plot.line(top.r(), top.u(), "steelblue", 1.8, None);
    plot.hline(0.0, "gray", Some("5 4"));
    plot.vline(b, "black", Some("2 3"));
    plot.markers(&[sigma], &[top.t], "firebrick", 3.0);
    plot.legend_entry("steelblue", "profile");
    plot.legend_entry("firebrick", "vertical point");
    Ok(plot.render())
}
