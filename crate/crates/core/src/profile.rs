//! Bridge profiles and the vertical-point height function T(sigma).
//!
//! The lower portion (inclination from -pi/2 at the vertical point out to 0
//! at the truncation radius) is solved spectrally; the decay condition at
//! infinity is replaced by a flat boundary at r = b, and b is grown in
//! fixed steps until T stops moving to within `tol_abs`. The top portion
//! (inclination angle phi from pi/2 down to 0) is an initial value problem
//! integrated in phi.

use rayon::prelude::*;
use serde::Serialize;

use crate::bvp::{adapt_grid, BvpProblem, BvpState, NewtonReport};
use crate::chebyshev::ChebGrid;
use crate::error::{Error, Result};
use crate::ode::{integrate_with_outputs, DenseOutput, OdeOptions};
use crate::tprime::{Provenance, TSample, TTable};

/// All tolerances and sizes driving a bridge solve.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SolverConfig {
    /// Truncation acceptance: successive-b values of T must agree to this.
    pub tol_abs: f64,
    /// Newton exit: relative update norm.
    pub tol_newton: f64,
    /// Grid adaptation acceptance on U(-1) between consecutive grids.
    pub tol_grid: f64,
    /// First grid size tried.
    pub n_init: usize,
    /// Largest grid size before the adaptation gives up.
    pub n_max: usize,
    /// Smallest initial truncation radius.
    pub b_init_floor: f64,
    /// Increment of the truncation radius between solves.
    pub b_step: f64,
    /// Hard cap on the truncation radius.
    pub b_max: f64,
    /// Capillary constant.
    pub kappa: f64,
    /// Absolute and relative tolerance for phi-space integrations.
    pub ode_tol: f64,
    /// Newton iteration cap.
    pub newton_max_iter: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol_abs: 1e-11,
            tol_newton: 1e-13,
            tol_grid: 1e-12,
            n_init: 60,
            n_max: 2000,
            b_init_floor: 14.0,
            b_step: 2.0,
            b_max: 200.0,
            kappa: 1.0,
            ode_tol: 1e-11,
            newton_max_iter: 100,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positives = [
            ("tol_abs", self.tol_abs),
            ("tol_newton", self.tol_newton),
            ("tol_grid", self.tol_grid),
            ("b_step", self.b_step),
            ("kappa", self.kappa),
            ("ode_tol", self.ode_tol),
        ];
        for (name, v) in positives {
            if !(v > 0.0) {
                return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
            }
        }
        if self.n_init < 4 || self.n_max < self.n_init {
            return Err(Error::InvalidArgument(format!(
                "bad grid sizes: n_init = {}, n_max = {}",
                self.n_init, self.n_max
            )));
        }
        Ok(())
    }
}

/// A converged bridge profile at one sigma.
#[derive(Debug, Clone)]
pub struct ProfileSolution {
    pub sigma: f64,
    /// Height of the vertical point, T(sigma) = U(-1).
    pub t: f64,
    /// Spectral solution of the lower portion.
    pub state: BvpState,
    /// Truncation radius at acceptance.
    pub b_final: f64,
    pub report: NewtonReport,
}

/// The bridge-family initial guess on a given grid: linear radius, an
/// exponentially decaying height, the matching inclination, and the chord
/// length for the arclength scale.
pub fn initial_guess(sigma: f64, b: f64, grid: &ChebGrid) -> Result<BvpState> {
    if !(sigma > 0.0 && sigma < b) {
        return Err(Error::InvalidArgument(format!(
            "need 0 < sigma < b, got sigma = {sigma}, b = {b}"
        )));
    }
    let mut r = Vec::with_capacity(grid.n());
    let mut u = Vec::with_capacity(grid.n());
    let mut psi = Vec::with_capacity(grid.n());
    for &tau in grid.nodes() {
        let r0 = 0.5 * (1.0 + tau) * b + 0.5 * (1.0 - tau) * sigma;
        let u0 = (-r0 + sigma).exp();
        r.push(r0);
        u.push(u0);
        psi.push((-u0).atan());
    }
    BvpState::new(grid.clone(), r, u, psi, b - sigma)
}

/// Reuse a converged state as the initial guess for a larger truncation
/// radius: radii above 1 are rescaled affinely so the old outer boundary
/// lands on the new one, and the arclength scale is stretched by the chord
/// ratio. Nodal heights and inclinations carry over; the adaptation loop
/// re-interpolates everything onto its working grids barycentrically.
pub fn warm_start(prev: &BvpState, sigma: f64, b_new: f64) -> Result<BvpState> {
    let n = prev.n();
    let b_old = prev.r[n - 1];
    if !(b_new > b_old) {
        return Err(Error::InvalidArgument(format!(
            "warm start needs b_new > b_old, got {b_new} <= {b_old}"
        )));
    }
    let scale = (b_new - 1.0) / (b_old - 1.0);
    let r: Vec<f64> = prev
        .r
        .iter()
        .map(|&rj| if rj > 1.0 { 1.0 + (rj - 1.0) * scale } else { rj })
        .collect();
    let ell = prev.ell * (b_new - sigma) / (b_old - sigma);
    BvpState::new(prev.grid.clone(), r, prev.u.clone(), prev.psi.clone(), ell)
}

fn solve_at_b(
    sigma: f64,
    b: f64,
    warm: Option<&BvpState>,
    cfg: &SolverConfig,
) -> Result<(BvpState, NewtonReport)> {
    let problem = BvpProblem::new(sigma, b, 0.0, cfg.kappa)?;
    let init = match warm {
        Some(prev) => warm_start(prev, sigma, b)?,
        None => {
            let grid = ChebGrid::new(cfg.n_init.max(4), (-1.0, 1.0))?;
            initial_guess(sigma, b, &grid)?
        }
    };
    let (state, report) = adapt_grid(&init, &problem, cfg)?;
    if !report.converged {
        return Err(Error::NonConvergence {
            context: format!("sigma = {sigma}, b = {b}, n = {}", report.n_final),
            residual: report.final_residual,
            iterations: report.iterations,
        });
    }
    Ok((state, report))
}

/// Solve the truncated exterior problem at a fixed outer radius (flat outer
/// boundary), without the truncation loop.
pub fn solve_fixed_b(sigma: f64, b: f64, psi_b: f64, cfg: &SolverConfig) -> Result<(BvpState, NewtonReport)> {
    cfg.validate()?;
    let problem = BvpProblem::new(sigma, b, psi_b, cfg.kappa)?;
    let grid = ChebGrid::new(cfg.n_init.max(4), (-1.0, 1.0))?;
    let init = initial_guess(sigma, b, &grid)?;
    let (state, report) = adapt_grid(&init, &problem, cfg)?;
    if !report.converged {
        return Err(Error::NonConvergence {
            context: format!("sigma = {sigma}, b = {b}, n = {}", report.n_final),
            residual: report.final_residual,
            iterations: report.iterations,
        });
    }
    Ok((state, report))
}

/// Compute T(sigma) by growing the truncation radius until the inner height
/// stabilizes to `cfg.tol_abs`.
pub fn solve_t(sigma: f64, cfg: &SolverConfig) -> Result<ProfileSolution> {
    cfg.validate()?;
    if !(sigma > 0.0) {
        return Err(Error::InvalidArgument(format!("sigma must be positive, got {sigma}")));
    }
    let mut b = cfg.b_init_floor.max(sigma + 4.0);
    let mut current = solve_at_b(sigma, b, None, cfg)?;
    let mut t_prev = current.0.inner_height();
    let mut last_delta = f64::INFINITY;

    while b + cfg.b_step <= cfg.b_max {
        b += cfg.b_step;
        current = solve_at_b(sigma, b, Some(&current.0), cfg)?;
        let t = current.0.inner_height();
        last_delta = (t - t_prev).abs();
        if last_delta < cfg.tol_abs {
            return Ok(ProfileSolution {
                sigma,
                t,
                state: current.0,
                b_final: b,
                report: current.1,
            });
        }
        t_prev = t;
    }
    Err(Error::TruncationFailure {
        b_cap: cfg.b_max,
        last_delta,
    })
}

/// A sweep row that failed, with the sigma it belonged to.
#[derive(Debug)]
pub struct SweepFailure {
    pub sigma: f64,
    pub error: Error,
}

/// Outcome of a T(sigma) sweep: the table of converged rows plus any
/// per-row failures (the sweep continues past them).
#[derive(Debug)]
pub struct SweepOutcome {
    pub table: TTable,
    pub failures: Vec<SweepFailure>,
}

/// Solve T on each given sigma (ascending). Rows are independent and run in
/// parallel; assembly order is the input order regardless of scheduling.
pub fn sweep_t(sigmas: &[f64], cfg: &SolverConfig) -> Result<SweepOutcome> {
    cfg.validate()?;
    if sigmas.is_empty() {
        return Err(Error::InvalidArgument("empty sigma list".into()));
    }
    for w in sigmas.windows(2) {
        if !(w[0] < w[1]) {
            return Err(Error::InvalidArgument(format!(
                "sigmas must be strictly ascending: {} then {}",
                w[0], w[1]
            )));
        }
    }
    if !(sigmas[0] > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "sigmas must be positive, got {}",
            sigmas[0]
        )));
    }

    let results: Vec<(f64, Result<ProfileSolution>)> = sigmas
        .par_iter()
        .map(|&sigma| (sigma, solve_t(sigma, cfg)))
        .collect();

    let mut samples = Vec::new();
    let mut failures = Vec::new();
    for (sigma, res) in results {
        match res {
            Ok(sol) => samples.push(TSample {
                sigma,
                t: sol.t,
                tprime: None,
                provenance: Provenance::Computed,
                b_final: Some(sol.b_final),
                n_final: Some(sol.report.n_final),
                newton_residual: Some(sol.report.final_residual),
            }),
            Err(error) => failures.push(SweepFailure { sigma, error }),
        }
    }
    Ok(SweepOutcome {
        table: TTable::new(samples)?,
        failures,
    })
}

/// Right-hand side of the phi-parametrized profile system. The shared
/// denominator ru + sin(phi) must stay positive along valid profiles.
pub fn profile_rhs(phi: f64, r: f64, u: f64) -> Result<[f64; 2]> {
    let delta = r * u + phi.sin();
    if !(delta > 0.0) {
        return Err(Error::Singularity { phi, delta });
    }
    Ok([-r * phi.cos() / delta, -r * phi.sin() / delta])
}

/// Number of Chebyshev samples stored along integrated trajectories; plenty
/// for spectrally accurate re-interpolation and quadrature.
pub const TRAJECTORY_SAMPLES: usize = 257;

/// The top portion of the generating curve, phi in [0, pi/2], integrated
/// down from the vertical point (sigma, T). Stores values on a Chebyshev
/// grid in phi (hit exactly by the integrator, not interpolated) alongside
/// the dense solution.
#[derive(Debug, Clone)]
pub struct TopPortion {
    pub sigma: f64,
    pub t: f64,
    grid: ChebGrid,
    r: Vec<f64>,
    u: Vec<f64>,
    dense: DenseOutput<2>,
}

impl TopPortion {
    /// Chebyshev grid in phi over [0, pi/2], ascending.
    pub fn grid(&self) -> &ChebGrid {
        &self.grid
    }

    /// Radii at the grid nodes, ascending in phi.
    pub fn r(&self) -> &[f64] {
        &self.r
    }

    /// Heights at the grid nodes, ascending in phi.
    pub fn u(&self) -> &[f64] {
        &self.u
    }

    /// Radius where the curve becomes horizontal (phi = 0).
    pub fn r_at_0(&self) -> f64 {
        self.r[0]
    }

    /// Height at phi = 0, the top of the curve.
    pub fn u_at_0(&self) -> f64 {
        self.u[0]
    }

    /// Evaluate (r, u) anywhere on [0, pi/2] from the dense solution.
    pub fn eval(&self, phi: f64) -> Result<(f64, f64)> {
        let y = self.dense.eval(phi)?;
        Ok((y[0], y[1]))
    }

    /// Height of the top portion at a given radius, found by bisection on
    /// the monotone r(phi).
    pub fn u_at_radius(&self, r_query: f64) -> Result<f64> {
        let (r_lo, r_hi) = (self.sigma, self.r_at_0());
        if r_query < r_lo - 1e-12 || r_query > r_hi + 1e-12 {
            return Err(Error::OutOfDomain {
                point: r_query,
                lo: r_lo,
                hi: r_hi,
            });
        }
        // r decreases as phi increases.
        let mut lo = 0.0;
        let mut hi = std::f64::consts::FRAC_PI_2;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let (r_mid, _) = self.eval(mid)?;
            if r_mid > r_query {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let phi = 0.5 * (lo + hi);
        Ok(self.eval(phi)?.1)
    }
}

/// Integrate the top portion from (sigma, T) at phi = pi/2 down to phi = 0.
pub fn top_portion(sigma: f64, t: f64, cfg: &SolverConfig) -> Result<TopPortion> {
    if !(sigma > 0.0) || !(t > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need positive sigma and T, got sigma = {sigma}, T = {t}"
        )));
    }
    let grid = ChebGrid::new(TRAJECTORY_SAMPLES, (0.0, std::f64::consts::FRAC_PI_2))?;
    let mut outputs: Vec<f64> = grid.nodes().to_vec();
    outputs.reverse();
    let opts = OdeOptions::with_tol(cfg.ode_tol);
    let (dense, at_nodes) = integrate_with_outputs(
        |phi, y: &[f64; 2]| profile_rhs(phi, y[0], y[1]),
        std::f64::consts::FRAC_PI_2,
        0.0,
        [sigma, t],
        &outputs,
        &opts,
    )?;
    let mut r: Vec<f64> = at_nodes.iter().map(|y| y[0]).collect();
    let mut u: Vec<f64> = at_nodes.iter().map(|y| y[1]).collect();
    r.reverse();
    u.reverse();
    Ok(TopPortion {
        sigma,
        t,
        grid,
        r,
        u,
        dense,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn initial_guess_values_at_endpoints() {
        let grid = ChebGrid::new(9, (-1.0, 1.0)).unwrap();
        let g = initial_guess(1.0, 14.0, &grid).unwrap();
        // tau = -1: R = sigma, U = 1, Psi = atan(-1) = -pi/4.
        assert_eq!(g.r[0], 1.0);
        assert!((g.u[0] - 1.0).abs() < 1e-15);
        assert!((g.psi[0] + std::f64::consts::FRAC_PI_4).abs() < 1e-15);
        // tau = 1: R = b, U = exp(sigma - b).
        assert_eq!(g.r[8], 14.0);
        assert!((g.u[8] - (1.0f64 - 14.0).exp()).abs() < 1e-18);
        assert_eq!(g.ell, 13.0);
    }

    #[test]
    fn initial_guess_rejects_bad_radii() {
        let grid = ChebGrid::new(5, (-1.0, 1.0)).unwrap();
        assert!(initial_guess(-1.0, 14.0, &grid).is_err());
        assert!(initial_guess(2.0, 1.0, &grid).is_err());
    }

    #[test]
    fn warm_start_rescales_tail_only() {
        let grid = ChebGrid::new(17, (-1.0, 1.0)).unwrap();
        let prev = initial_guess(0.5, 14.0, &grid).unwrap();
        let warm = warm_start(&prev, 0.5, 16.0).unwrap();
        let n = warm.n();
        assert!((warm.r[n - 1] - 16.0).abs() < 1e-12);
        // Radii at or below 1 are untouched.
        for j in 0..n {
            if prev.r[j] <= 1.0 {
                assert_eq!(warm.r[j], prev.r[j]);
            } else {
                assert!(warm.r[j] >= prev.r[j]);
            }
        }
        let expect_ell = 13.5 * (16.0 - 0.5) / (14.0 - 0.5);
        assert!((warm.ell - expect_ell).abs() < 1e-12);
    }

    #[test]
    fn profile_rhs_signs_and_singularity() {
        // At phi = pi/2 the radial derivative vanishes (cos = 0) and the
        // height decreases.
        let [dr, du] = profile_rhs(std::f64::consts::FRAC_PI_2, 1.0, 0.7).unwrap();
        assert!(dr.abs() < 1e-16);
        assert!(du < 0.0);
        // Nonpositive denominator is an error.
        assert!(matches!(
            profile_rhs(0.0, 1.0, 0.0),
            Err(Error::Singularity { .. })
        ));
    }

    #[test]
    fn top_portion_initial_point_is_exact() {
        let cfg = SolverConfig::default();
        let top = top_portion(1.0, 0.66, &cfg).unwrap();
        let n = top.grid().n();
        assert_eq!(top.r()[n - 1], 1.0);
        assert_eq!(top.u()[n - 1], 0.66);
        // Height increases as phi decreases toward the top of the curve.
        assert!(top.u_at_0() > 0.66);
        // Radius grows monotonically toward phi = 0.
        for w in top.r().windows(2) {
            assert!(w[0] > w[1]);
        }
    }
}
