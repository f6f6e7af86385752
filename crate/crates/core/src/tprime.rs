//! T(sigma) sample tables and spectral differentiation of the T column.
//!
//! T'(sigma) is needed as the initial value of the height variation, so it
//! has to be accurate; differencing the swept T values spectrally on their
//! own Chebyshev grid gives that, provided the samples really lie on one.

use serde::Serialize;

use crate::chebyshev::{cheb_points, diff_operator};
use crate::error::{Error, Result};

/// Where a table row came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    /// Solved from the boundary value problem.
    Computed,
    /// Turkington small-radius estimate.
    Asymptotic,
    /// Sampled from the patching spline.
    Spline,
}

impl std::fmt::Display for Provenance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Provenance::Computed => "computed",
            Provenance::Asymptotic => "asymptotic",
            Provenance::Spline => "spline",
        })
    }
}

impl std::str::FromStr for Provenance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "computed" => Ok(Provenance::Computed),
            "asymptotic" => Ok(Provenance::Asymptotic),
            "spline" => Ok(Provenance::Spline),
            other => Err(Error::InvalidArgument(format!("unknown provenance '{other}'"))),
        }
    }
}

/// One (sigma, T, T') record with solver metadata when computed.
#[derive(Debug, Clone, Serialize)]
pub struct TSample {
    pub sigma: f64,
    pub t: f64,
    pub tprime: Option<f64>,
    pub provenance: Provenance,
    pub b_final: Option<f64>,
    pub n_final: Option<usize>,
    pub newton_residual: Option<f64>,
}

impl TSample {
    /// A bare row without solver metadata.
    pub fn bare(sigma: f64, t: f64, tprime: Option<f64>, provenance: Provenance) -> TSample {
        TSample {
            sigma,
            t,
            tprime,
            provenance,
            b_final: None,
            n_final: None,
            newton_residual: None,
        }
    }
}

/// A sweep of T samples, sigma strictly ascending.
#[derive(Debug, Clone)]
pub struct TTable {
    samples: Vec<TSample>,
}

impl TTable {
    pub fn new(samples: Vec<TSample>) -> Result<TTable> {
        if samples.is_empty() {
            return Err(Error::InvalidArgument("empty table".into()));
        }
        for w in samples.windows(2) {
            if !(w[0].sigma < w[1].sigma) {
                return Err(Error::InvalidArgument(format!(
                    "table sigmas must be strictly ascending: {} then {}",
                    w[0].sigma, w[1].sigma
                )));
            }
        }
        Ok(TTable { samples })
    }

    pub fn samples(&self) -> &[TSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn sigma_min(&self) -> f64 {
        self.samples[0].sigma
    }

    pub fn sigma_max(&self) -> f64 {
        self.samples[self.samples.len() - 1].sigma
    }

    /// (sigma_min, sigma_max, count).
    pub fn grid_meta(&self) -> (f64, f64, usize) {
        (self.sigma_min(), self.sigma_max(), self.len())
    }

    pub fn sigmas(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.sigma).collect()
    }

    pub fn t_values(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }
}

/// Fill the T' column by applying the square first-order Chebyshev
/// differentiation operator on [sigma_min, sigma_max] to the T column.
/// The samples must lie on the matching Chebyshev grid.
pub fn differentiate_t(table: &TTable) -> Result<TTable> {
    let n = table.len();
    if n < 2 {
        return Err(Error::GridMismatch(format!(
            "need at least 2 samples to differentiate, got {n}"
        )));
    }
    let (lo, hi, _) = table.grid_meta();
    let expected = cheb_points(n, (lo, hi))?;
    let tol = 1e-12 * (hi - lo).max(1.0);
    for (sample, &node) in table.samples.iter().zip(expected.iter()) {
        if (sample.sigma - node).abs() > tol {
            return Err(Error::GridMismatch(format!(
                "sample at sigma = {} is off the Chebyshev node {} by {:.3e}",
                sample.sigma,
                node,
                (sample.sigma - node).abs()
            )));
        }
    }

    let op = diff_operator(n, n, 1, (lo, hi))?;
    let t: Vec<f64> = table.t_values();
    let tp = op.apply(&t)?;
    let samples = table
        .samples
        .iter()
        .zip(tp.iter())
        .map(|(s, &d)| TSample {
            tprime: Some(d),
            ..s.clone()
        })
        .collect();
    TTable::new(samples)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cheb_table(n: usize, lo: f64, hi: f64, f: impl Fn(f64) -> f64) -> TTable {
        let nodes = cheb_points(n, (lo, hi)).unwrap();
        TTable::new(
            nodes
                .iter()
                .map(|&s| TSample::bare(s, f(s), None, Provenance::Computed))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn constant_column_differentiates_to_zero() {
        let table = cheb_table(40, 0.085, 2.0, |_| 0.75);
        let out = differentiate_t(&table).unwrap();
        for s in out.samples() {
            assert!(s.tprime.unwrap().abs() < 1e-11);
        }
    }

    #[test]
    fn linear_column_differentiates_to_one() {
        let table = cheb_table(100, 0.085, 2.0, |s| s);
        let out = differentiate_t(&table).unwrap();
        for s in out.samples() {
            assert!((s.tprime.unwrap() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn off_grid_samples_are_rejected() {
        let mut nodes = cheb_points(10, (0.1, 1.0)).unwrap();
        nodes[4] += 1e-6;
        let table = TTable::new(
            nodes
                .iter()
                .map(|&s| TSample::bare(s, s * s, None, Provenance::Computed))
                .collect(),
        )
        .unwrap();
        assert!(matches!(
            differentiate_t(&table),
            Err(Error::GridMismatch(_))
        ));
    }

    #[test]
    fn table_requires_ascending_sigma() {
        let rows = vec![
            TSample::bare(1.0, 0.5, None, Provenance::Computed),
            TSample::bare(0.5, 0.4, None, Provenance::Computed),
        ];
        assert!(TTable::new(rows).is_err());
    }
}
