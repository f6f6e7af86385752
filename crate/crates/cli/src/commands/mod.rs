//! Subcommand implementations. Each returns the process exit code on the
//! success path (0 clean, 1 numerical/verification failure) and reserves
//! `Err` for usage and I/O problems (exit 2).

pub mod extend;
pub mod profile;
pub mod rdot;
pub mod sweep;
pub mod verify;

use ulb_core::chebyshev::{bary_eval, ChebGrid};
use ulb_core::tprime::TTable;

use crate::errors::{CliError, CliResult};

/// Sample the polynomial interpolant through Chebyshev-gridded samples at
/// `count` equispaced points, for smooth plotted curves (the plotted curve
/// is the interpolant, not a polyline through the data).
pub(crate) fn sample_interpolant(
    lo: f64,
    hi: f64,
    values: &[f64],
    count: usize,
) -> CliResult<(Vec<f64>, Vec<f64>)> {
    let grid = ChebGrid::new(values.len(), (lo, hi)).map_err(CliError::from)?;
    let xs: Vec<f64> = (0..count)
        .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
        .collect();
    let ys = bary_eval(&grid, values, &xs).map_err(CliError::from)?;
    Ok((xs, ys))
}

/// Number of samples drawn along plotted interpolant curves.
pub(crate) const CURVE_SAMPLES: usize = 400;

pub(crate) fn read_table(path: &std::path::Path) -> CliResult<TTable> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    crate::csvio::ttable_from_csv(&text)
}
