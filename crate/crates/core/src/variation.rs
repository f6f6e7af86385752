//! The variation equations of the bridge family: differentiate the profile
//! system with respect to the vertical-point radius sigma (dotted
//! quantities) or the initial height (accented quantities; same right-hand
//! side, different anchoring), and sweep the dotted radial component over a
//! T table. Positivity of that component on the top portion is the
//! uniqueness evidence this crate exists to produce.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ode::{integrate, integrate_until, DenseOutput, OdeOptions};
use crate::profile::SolverConfig;
use crate::tprime::TTable;

/// Right-hand side of the coupled 4-dimensional system
/// (r, u, rdot, udot) in the inclination angle phi. The variation block is
/// linear in (rdot, udot).
pub fn variation_rhs(phi: f64, state: &[f64; 4]) -> Result<[f64; 4]> {
    let [r, u, rdot, udot] = *state;
    let (sin_phi, cos_phi) = phi.sin_cos();
    let delta = r * u + sin_phi;
    if !(delta > 0.0) {
        return Err(Error::Singularity { phi, delta });
    }
    let d2 = delta * delta;
    let core = udot * r * r - rdot * sin_phi;
    Ok([
        -r * cos_phi / delta,
        -r * sin_phi / delta,
        cos_phi * core / d2,
        sin_phi * core / d2,
    ])
}

/// Dense record of one dotted-variation trajectory on the top portion,
/// phi from pi/2 down to 0.
#[derive(Debug, Clone)]
pub struct VariationTrajectory {
    pub sigma: f64,
    /// Stored sample angles, descending from pi/2 to 0: the integrator's
    /// accepted steps merged with a uniform fill of at least 200 samples.
    pub phis: Vec<f64>,
    pub r: Vec<f64>,
    pub u: Vec<f64>,
    pub rdot: Vec<f64>,
    pub udot: Vec<f64>,
    pub min_rdot: f64,
    /// Angle at which the minimum of rdot is attained.
    pub argmin_phi: f64,
    /// Endpoint value rdot(0).
    pub rdot_at_0: f64,
    /// Whether udot > 0 held at every stored sample with phi > 0; a row
    /// with corrupted T' breaks this immediately at phi = pi/2.
    pub udot_positive: bool,
}

/// How many uniform phi samples are merged into the stored trajectory on
/// top of the integrator's own steps.
pub const VARIATION_SAMPLES: usize = 201;

/// Integrate the dotted variation system from the vertical point: initial
/// state (sigma, T, 1, T') at phi = pi/2, down to phi = 0.
pub fn integrate_variation(
    sigma: f64,
    t: f64,
    tprime: f64,
    cfg: &SolverConfig,
) -> Result<VariationTrajectory> {
    if !(sigma > 0.0) {
        return Err(Error::InvalidArgument(format!("sigma must be positive, got {sigma}")));
    }
    let half_pi = std::f64::consts::FRAC_PI_2;
    let init = [sigma, t, 1.0, tprime];
    let opts = OdeOptions::with_tol(cfg.ode_tol);
    let dense = integrate(variation_rhs, half_pi, 0.0, init, &opts)?;
    build_trajectory(sigma, init, dense)
}

fn build_trajectory(
    sigma: f64,
    init: [f64; 4],
    dense: DenseOutput<4>,
) -> Result<VariationTrajectory> {
    let half_pi = std::f64::consts::FRAC_PI_2;
    // Merge natural steps with a uniform fill, descending, deduplicated.
    let mut phis = dense.step_times();
    for i in 0..VARIATION_SAMPLES {
        phis.push(half_pi * (1.0 - i as f64 / (VARIATION_SAMPLES - 1) as f64));
    }
    phis.sort_by(|a, b| b.partial_cmp(a).unwrap());
    phis.dedup();

    let n = phis.len();
    let mut r = Vec::with_capacity(n);
    let mut u = Vec::with_capacity(n);
    let mut rdot = Vec::with_capacity(n);
    let mut udot = Vec::with_capacity(n);
    for (i, &phi) in phis.iter().enumerate() {
        let y = if i == 0 {
            init // the initial condition is stored exactly
        } else if i == n - 1 {
            dense.y_end()
        } else {
            dense.eval(phi)?
        };
        r.push(y[0]);
        u.push(y[1]);
        rdot.push(y[2]);
        udot.push(y[3]);
    }

    let mut min_rdot = f64::INFINITY;
    let mut argmin_phi = half_pi;
    for (i, &v) in rdot.iter().enumerate() {
        if v < min_rdot {
            min_rdot = v;
            argmin_phi = phis[i];
        }
    }
    let udot_positive = phis
        .iter()
        .zip(udot.iter())
        .all(|(&phi, &ud)| phi <= 1e-12 || ud > 0.0);
    let rdot_at_0 = *rdot.last().unwrap();

    Ok(VariationTrajectory {
        sigma,
        phis,
        r,
        u,
        rdot,
        udot,
        min_rdot,
        argmin_phi,
        rdot_at_0,
        udot_positive,
    })
}

/// A sweep row that could not be integrated.
#[derive(Debug)]
pub struct VariationFailure {
    pub sigma: f64,
    pub error: Error,
}

/// All trajectories of a sweep with the global positivity verdict.
#[derive(Debug)]
pub struct SweepReport {
    pub trajectories: Vec<VariationTrajectory>,
    pub global_min_rdot: f64,
    /// True iff every trajectory's minimum of rdot is strictly positive.
    pub all_positive: bool,
    pub failures: Vec<VariationFailure>,
}

/// Run the dotted variation on every row of a differentiated T table.
/// Rows are independent; assembly order follows the table.
pub fn sweep_variation(table: &TTable, cfg: &SolverConfig) -> Result<SweepReport> {
    let rows: Vec<(f64, f64, Option<f64>)> = table
        .samples()
        .iter()
        .map(|s| (s.sigma, s.t, s.tprime))
        .collect();
    let results: Vec<(f64, Result<VariationTrajectory>)> = rows
        .par_iter()
        .map(|&(sigma, t, tprime)| {
            let res = match tprime {
                Some(tp) => integrate_variation(sigma, t, tp, cfg),
                None => Err(Error::InvalidArgument(format!(
                    "row sigma = {sigma} has no T' value"
                ))),
            };
            (sigma, res)
        })
        .collect();

    let mut trajectories = Vec::new();
    let mut failures = Vec::new();
    for (sigma, res) in results {
        match res {
            Ok(tr) => trajectories.push(tr),
            Err(error) => failures.push(VariationFailure { sigma, error }),
        }
    }
    let global_min_rdot = trajectories
        .iter()
        .map(|t| t.min_rdot)
        .fold(f64::INFINITY, f64::min);
    let all_positive = !trajectories.is_empty() && trajectories.iter().all(|t| t.min_rdot > 0.0);
    Ok(SweepReport {
        trajectories,
        global_min_rdot,
        all_positive,
        failures,
    })
}

/// State of a variation run carried to the angle phi-minus where the lower
/// portion of the curve returns to the anchoring radius rho0.
#[derive(Debug, Clone)]
pub struct PhiMinusRecord {
    pub sigma: f64,
    pub rho0: f64,
    pub phi_minus: f64,
    /// (r, u, variation-r, variation-u) at phi-minus.
    pub state: [f64; 4],
    /// ru + sin(phi) there; positive on valid profiles.
    pub delta: f64,
}

fn run_to_phi_minus(
    sigma: f64,
    start_phi: f64,
    init: [f64; 4],
    rho0: f64,
    cfg: &SolverConfig,
) -> Result<PhiMinusRecord> {
    let half_pi = std::f64::consts::FRAC_PI_2;
    if !(rho0 > sigma) {
        return Err(Error::InvalidArgument(format!(
            "phi-minus anchoring needs rho0 > sigma, got rho0 = {rho0}, sigma = {sigma}"
        )));
    }
    let opts = OdeOptions::with_tol(cfg.ode_tol);
    // The radius only returns to rho0 on the lower portion, past pi/2.
    let outcome = integrate_until(
        variation_rhs,
        start_phi,
        std::f64::consts::PI - 1e-3,
        init,
        |phi, y| phi > half_pi && y[0] >= rho0,
        &opts,
    )?;
    if !outcome.stopped {
        return Err(Error::Integrator(format!(
            "lower portion never returned to rho0 = {rho0} (sigma = {sigma})"
        )));
    }
    // Refine the crossing r(phi) = rho0 inside the last accepted step.
    let times = outcome.dense.step_times();
    let mut lo = times[times.len() - 2].max(half_pi);
    let mut hi = outcome.dense.t_end();
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if outcome.dense.eval(mid)?[0] >= rho0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let phi_minus = 0.5 * (lo + hi);
    let state = outcome.dense.eval(phi_minus)?;
    let delta = state[0] * state[1] + phi_minus.sin();
    Ok(PhiMinusRecord {
        sigma,
        rho0,
        phi_minus,
        state,
        delta,
    })
}

/// Dotted variation followed along the lower portion from the vertical
/// point up to phi-minus, where r returns to rho0.
pub fn lower_variation(
    sigma: f64,
    t: f64,
    tprime: f64,
    rho0: f64,
    cfg: &SolverConfig,
) -> Result<PhiMinusRecord> {
    let half_pi = std::f64::consts::FRAC_PI_2;
    run_to_phi_minus(sigma, half_pi, [sigma, t, 1.0, tprime], rho0, cfg)
}

/// Accented variation: anchored at the top of the curve phi = 0 with
/// r(0) = rho0, u(0) = u0 and variation state (0, 1), integrated through
/// the vertical point up to phi-minus.
pub fn accented_variation(
    sigma: f64,
    rho0: f64,
    u0: f64,
    cfg: &SolverConfig,
) -> Result<PhiMinusRecord> {
    run_to_phi_minus(sigma, 0.0, [rho0, u0, 0.0, 1.0], rho0, cfg)
}
