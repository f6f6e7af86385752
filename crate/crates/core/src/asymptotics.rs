//! Small-radius treatment of T(sigma): Turkington's estimates
//! T ~ -sigma log(sigma) and T' ~ -log(sigma) - 1 below the solver's
//! practical range, merged with computed data through a natural cubic
//! spline sampled on Chebyshev points. Spline rows carry no accuracy
//! claim; they are tagged so downstream consumers can exclude them.

use serde::Serialize;

use crate::chebyshev::{cheb_points, NaturalSpline};
use crate::error::{Error, Result};
use crate::profile::SolverConfig;
use crate::tprime::{Provenance, TSample, TTable};
use crate::variation::{sweep_variation, SweepReport};

/// Parameters of the asymptotic extension.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AsymptoticConfig {
    /// Smallest radius of the extension.
    pub sigma_lo: f64,
    /// Upper end of the interval on which the asymptote is sampled.
    pub sigma_hi_asym: f64,
    /// Chebyshev sample count for both the asymptote and the spline.
    pub n_points: usize,
    /// How many leftmost asymptotic samples join the spline knots.
    pub n_keep: usize,
    /// Right end of the spline segment; the computed table starts here.
    pub splice_hi: f64,
}

impl Default for AsymptoticConfig {
    fn default() -> Self {
        AsymptoticConfig {
            sigma_lo: 0.00085,
            sigma_hi_asym: 0.170,
            n_points: 100,
            n_keep: 10,
            splice_hi: 0.085,
        }
    }
}

impl AsymptoticConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_lo > 0.0 && self.sigma_lo < self.splice_hi && self.splice_hi <= self.sigma_hi_asym)
        {
            return Err(Error::InvalidArgument(format!(
                "need 0 < sigma_lo < splice_hi <= sigma_hi_asym, got {}, {}, {}",
                self.sigma_lo, self.splice_hi, self.sigma_hi_asym
            )));
        }
        if self.n_points < 4 {
            return Err(Error::InvalidArgument(format!(
                "n_points must be at least 4, got {}",
                self.n_points
            )));
        }
        if self.n_keep > self.n_points {
            return Err(Error::InvalidArgument(format!(
                "n_keep = {} exceeds n_points = {}",
                self.n_keep, self.n_points
            )));
        }
        Ok(())
    }
}

fn check_domain(sigma: f64) -> Result<()> {
    if !(sigma > 0.0 && sigma <= 1.0) {
        return Err(Error::OutOfDomain {
            point: sigma,
            lo: 0.0,
            hi: 1.0,
        });
    }
    Ok(())
}

/// Turkington's small-radius height estimate -sigma log(sigma), meaningful
/// for sigma in (0, 1]; it degenerates to 0 at the right endpoint.
pub fn turkington_t(sigma: f64) -> Result<f64> {
    check_domain(sigma)?;
    Ok(-sigma * sigma.ln())
}

/// Derivative of the estimate: -log(sigma) - 1.
pub fn turkington_tprime(sigma: f64) -> Result<f64> {
    check_domain(sigma)?;
    Ok(-sigma.ln() - 1.0)
}

/// Merge asymptotic data with a computed table: sample the Turkington
/// formulas on Chebyshev points, keep the leftmost `n_keep`, fit natural
/// cubic splines (one in T, one in T') through those knots plus every
/// computed row, and sample the splines on Chebyshev points over
/// [sigma_lo, splice_hi]. Duplicate radii are resolved with computed rows
/// winning, then asymptotic, then spline.
pub fn splice_tables(computed: &TTable, cfg: &AsymptoticConfig) -> Result<TTable> {
    cfg.validate()?;
    if cfg.n_keep == 0 {
        return Ok(computed.clone());
    }
    if computed.sigma_min() > cfg.splice_hi * (1.0 + 1e-12) {
        return Err(Error::InvalidArgument(format!(
            "computed table starts at {} but the splice needs coverage from {}",
            computed.sigma_min(),
            cfg.splice_hi
        )));
    }
    for s in computed.samples() {
        if s.tprime.is_none() {
            return Err(Error::InvalidArgument(format!(
                "computed row at sigma = {} lacks T'; differentiate the table first",
                s.sigma
            )));
        }
    }

    let asym_nodes = cheb_points(cfg.n_points, (cfg.sigma_lo, cfg.sigma_hi_asym))?;
    let kept: Vec<TSample> = asym_nodes[..cfg.n_keep]
        .iter()
        .map(|&s| {
            Ok(TSample::bare(
                s,
                turkington_t(s)?,
                Some(turkington_tprime(s)?),
                Provenance::Asymptotic,
            ))
        })
        .collect::<Result<_>>()?;

    // Spline knots: kept asymptotic points then the computed rows.
    let mut knot_sigma: Vec<f64> = kept.iter().map(|s| s.sigma).collect();
    let mut knot_t: Vec<f64> = kept.iter().map(|s| s.t).collect();
    let mut knot_tp: Vec<f64> = kept.iter().map(|s| s.tprime.unwrap()).collect();
    for s in computed.samples() {
        if knot_sigma.last().is_none_or(|&last| s.sigma > last) {
            knot_sigma.push(s.sigma);
            knot_t.push(s.t);
            knot_tp.push(s.tprime.unwrap());
        }
    }
    let spline_t = NaturalSpline::new(&knot_sigma, &knot_t)?;
    let spline_tp = NaturalSpline::new(&knot_sigma, &knot_tp)?;

    let spline_nodes = cheb_points(cfg.n_points, (cfg.sigma_lo, cfg.splice_hi))?;
    let spline_rows: Vec<TSample> = spline_nodes
        .iter()
        .map(|&s| {
            Ok(TSample::bare(
                s,
                spline_t.eval(s)?,
                Some(spline_tp.eval(s)?),
                Provenance::Spline,
            ))
        })
        .collect::<Result<_>>()?;

    // Merge with precedence computed > asymptotic > spline on duplicates.
    let mut rows: Vec<TSample> = Vec::new();
    rows.extend(spline_rows);
    rows.extend(kept);
    rows.extend(computed.samples().iter().cloned());
    rows.sort_by(|a, b| {
        a.sigma
            .partial_cmp(&b.sigma)
            .unwrap()
            .then_with(|| rank(a.provenance).cmp(&rank(b.provenance)))
    });
    rows.dedup_by(|next, kept_row| next.sigma == kept_row.sigma);
    TTable::new(rows)
}

fn rank(p: Provenance) -> u8 {
    match p {
        Provenance::Computed => 0,
        Provenance::Asymptotic => 1,
        Provenance::Spline => 2,
    }
}

/// Run the dotted-variation sweep over a spliced table.
pub fn sweep_variation_extended(spliced: &TTable, cfg: &SolverConfig) -> Result<SweepReport> {
    sweep_variation(spliced, cfg)
}

/// Index of the first row whose T fails to increase strictly, if any;
/// used to audit the seam after splicing.
pub fn first_monotonicity_violation(table: &TTable) -> Option<usize> {
    table
        .samples()
        .windows(2)
        .position(|w| !(w[1].t > w[0].t))
        .map(|i| i + 1)
}
