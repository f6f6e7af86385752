//! Numerical cross-checks: the washer-method volume computed two
//! analytically equal ways, Vogel's bounds at the top of the curve, the
//! height bound sqrt(2), boundary and unscaled residuals of converged
//! states, and the sign criterion 2 pi rdot Delta at phi-minus.

use crate::chebyshev::{bary_eval, clenshaw_curtis, diff_operator, ChebGrid};
use crate::error::{Error, Result};
use crate::ode::{integrate_until, integrate_with_outputs, OdeOptions};
use crate::profile::{profile_rhs, solve_t, top_portion, ProfileSolution, SolverConfig, TRAJECTORY_SAMPLES};
use crate::variation::PhiMinusRecord;

/// Default Clenshaw-Curtis order for washer quadrature.
pub const QUADRATURE_ORDER: usize = 128;

/// A profile arc in phi covering [phi0, phi_minus], through the vertical
/// point: the boundary of the rotated region whose volume the washer
/// formulas measure. Values are stored on a Chebyshev grid in phi hit
/// exactly by the integrator.
#[derive(Debug, Clone)]
pub struct ProfileArc {
    pub sigma: f64,
    pub t: f64,
    pub phi0: f64,
    pub rho0: f64,
    pub phi_minus: f64,
    pub delta_at_phi_minus: f64,
    grid: ChebGrid,
    r: Vec<f64>,
    u: Vec<f64>,
}

impl ProfileArc {
    pub fn grid(&self) -> &ChebGrid {
        &self.grid
    }

    pub fn r(&self) -> &[f64] {
        &self.r
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    /// Height at the anchor angle phi0.
    pub fn u0(&self) -> f64 {
        self.u[0]
    }

    pub fn eval(&self, phi: f64) -> Result<(f64, f64)> {
        let r = bary_eval(&self.grid, &self.r, &[phi])?[0];
        let u = bary_eval(&self.grid, &self.u, &[phi])?[0];
        Ok((r, u))
    }
}

/// Build the arc for a given sigma and T: integrate from the vertical
/// point down to phi0 to find rho0, locate phi-minus on the lower portion,
/// then collect Chebyshev samples over [phi0, phi_minus] with exact
/// landings.
pub fn profile_arc(sigma: f64, t: f64, phi0: f64, cfg: &SolverConfig) -> Result<ProfileArc> {
    let half_pi = std::f64::consts::FRAC_PI_2;
    if !(0.0..half_pi).contains(&phi0) {
        return Err(Error::InvalidArgument(format!(
            "phi0 must lie in [0, pi/2), got {phi0}"
        )));
    }
    let opts = OdeOptions::with_tol(cfg.ode_tol);
    let rhs = |phi: f64, y: &[f64; 2]| profile_rhs(phi, y[0], y[1]);

    // Anchor radius at phi0 (exact landing).
    let down = crate::ode::integrate(rhs, half_pi, phi0, [sigma, t], &opts)?;
    let rho0 = down.y_end()[0];

    // Locate phi-minus on the lower portion.
    let up = integrate_until(
        rhs,
        half_pi,
        std::f64::consts::PI - 1e-3,
        [sigma, t],
        |_, y| y[0] >= rho0,
        &opts,
    )?;
    if !up.stopped {
        return Err(Error::Integrator(format!(
            "lower portion never returned to rho0 = {rho0} (sigma = {sigma})"
        )));
    }
    let times = up.dense.step_times();
    let mut lo = times[times.len() - 2].max(half_pi);
    let mut hi = up.dense.t_end();
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if up.dense.eval(mid)?[0] >= rho0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let phi_minus = 0.5 * (lo + hi);
    let end = up.dense.eval(phi_minus)?;
    let delta_at_phi_minus = end[0] * end[1] + phi_minus.sin();

    // Chebyshev samples over [phi0, phi_minus], integrated exactly onto the
    // nodes from the vertical point in both directions.
    let grid = ChebGrid::new(TRAJECTORY_SAMPLES, (phi0, phi_minus))?;
    let mut below: Vec<f64> = grid
        .nodes()
        .iter()
        .copied()
        .filter(|&p| p <= half_pi)
        .collect();
    let above: Vec<f64> = grid
        .nodes()
        .iter()
        .copied()
        .filter(|&p| p > half_pi)
        .collect();
    below.reverse();

    let n = grid.n();
    let mut r = vec![0.0; n];
    let mut u = vec![0.0; n];
    if !below.is_empty() {
        let (_, vals) =
            integrate_with_outputs(rhs, half_pi, phi0, [sigma, t], &below, &opts)?;
        for (&phi, y) in below.iter().zip(vals.iter()) {
            let idx = grid.nodes().iter().position(|&g| g == phi).unwrap();
            r[idx] = y[0];
            u[idx] = y[1];
        }
    }
    if !above.is_empty() {
        let (_, vals) =
            integrate_with_outputs(rhs, half_pi, phi_minus, [sigma, t], &above, &opts)?;
        for (&phi, y) in above.iter().zip(vals.iter()) {
            let idx = grid.nodes().iter().position(|&g| g == phi).unwrap();
            r[idx] = y[0];
            u[idx] = y[1];
        }
    }

    Ok(ProfileArc {
        sigma,
        t,
        phi0,
        rho0,
        phi_minus,
        delta_at_phi_minus,
        grid,
        r,
        u,
    })
}

fn check_anchor(arc: &ProfileArc, rho0: f64, phi0: f64) -> Result<()> {
    if (arc.rho0 - rho0).abs() > 1e-8 * rho0.abs().max(1.0)
        || (arc.phi0 - phi0).abs() > 1e-10
    {
        return Err(Error::InvalidArgument(format!(
            "anchor mismatch: arc has (rho0, phi0) = ({}, {}), asked ({rho0}, {phi0})",
            arc.rho0, arc.phi0
        )));
    }
    Ok(())
}

/// Closed-form volume of the region swept between the anchor radius and
/// the curve: pi (r^2 - rho0^2) u(phi) + 2 pi (r sin phi - rho0 sin phi0).
pub fn volume_closed_form(arc: &ProfileArc, phi: f64, rho0: f64, phi0: f64) -> Result<f64> {
    check_anchor(arc, rho0, phi0)?;
    let (r, u) = arc.eval(phi)?;
    Ok(std::f64::consts::PI * (r * r - rho0 * rho0) * u
        + 2.0 * std::f64::consts::PI * (r * phi.sin() - rho0 * phi0.sin()))
}

/// The same volume by washer quadrature along the stored arc, integrating
/// r^2 du/dphi with Clenshaw-Curtis of the given order.
pub fn volume_quadrature_with_order(
    arc: &ProfileArc,
    phi: f64,
    rho0: f64,
    order: usize,
) -> Result<f64> {
    check_anchor(arc, rho0, arc.phi0)?;
    let (_, u_phi) = arc.eval(phi)?;
    let u0 = arc.u0();
    let pi = std::f64::consts::PI;
    if (phi - arc.phi0).abs() < 1e-14 {
        return Ok(0.0);
    }
    let (nodes, weights) = clenshaw_curtis(order, (arc.phi0, phi))?;
    let mut integral = 0.0;
    for (&p, &w) in nodes.iter().zip(weights.iter()) {
        let (r, u) = arc.eval(p)?;
        let du = profile_rhs(p, r, u)?[1];
        integral += w * r * r * du;
    }
    Ok(pi * rho0 * rho0 * (u0 - u_phi) + pi * integral)
}

/// Washer quadrature at the default order.
pub fn volume_quadrature(arc: &ProfileArc, phi: f64, rho0: f64) -> Result<f64> {
    volume_quadrature_with_order(arc, phi, rho0, QUADRATURE_ORDER)
}

/// Result of comparing the two volume routes on one profile.
#[derive(Debug, Clone)]
pub struct VolumeCheck {
    pub rho0: f64,
    pub phi0: f64,
    pub phi_minus: f64,
    pub v_closed: f64,
    pub v_quadrature: f64,
    pub delta_at_phi_minus: f64,
}

impl VolumeCheck {
    pub fn relative_gap(&self) -> f64 {
        (self.v_closed - self.v_quadrature).abs() / self.v_closed.abs().max(f64::MIN_POSITIVE)
    }
}

/// Evaluate both volume routes at phi-minus, where the closed form
/// collapses to 2 pi rho0 (sin phi_minus - sin phi0).
pub fn volume_check(sigma: f64, t: f64, phi0: f64, cfg: &SolverConfig) -> Result<VolumeCheck> {
    let arc = profile_arc(sigma, t, phi0, cfg)?;
    let v_closed = volume_closed_form(&arc, arc.phi_minus, arc.rho0, arc.phi0)?;
    let v_quadrature = volume_quadrature(&arc, arc.phi_minus, arc.rho0)?;
    Ok(VolumeCheck {
        rho0: arc.rho0,
        phi0: arc.phi0,
        phi_minus: arc.phi_minus,
        v_closed,
        v_quadrature,
        delta_at_phi_minus: arc.delta_at_phi_minus,
    })
}

/// The quantity 2 pi rdot Delta at phi-minus, whose sign decides how the
/// rotated volume responds to moving the family parameter.
pub fn vprime_criterion(record: &PhiMinusRecord) -> Result<f64> {
    if !(record.delta > 0.0) {
        return Err(Error::Singularity {
            phi: record.phi_minus,
            delta: record.delta,
        });
    }
    Ok(2.0 * std::f64::consts::PI * record.state[2] * record.delta)
}

/// Vogel's sandwich at the top of the curve, with a relative slack of 1e-9
/// so exact-boundary values pass:
/// sqrt(sigma/T + sigma^2) <= r(0) <= sqrt(2 sigma/T + sigma^2).
pub fn vogel_bounds_check(sigma: f64, t: f64, r_at_0: f64) -> bool {
    let lower = (sigma / t + sigma * sigma).sqrt();
    let upper = (2.0 * sigma / t + sigma * sigma).sqrt();
    let slack = 1e-9;
    r_at_0 >= lower * (1.0 - slack) && r_at_0 <= upper * (1.0 + slack)
}

/// One entry of a verification report.
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub tolerance: f64,
}

/// A list of named checks with an overall verdict.
#[derive(Debug, Clone, Default)]
pub struct VerificationReport {
    pub checks: Vec<CheckResult>,
}

impl VerificationReport {
    pub fn push(&mut self, name: impl Into<String>, passed: bool, measured: f64, tolerance: f64) {
        self.checks.push(CheckResult {
            name: name.into(),
            passed,
            measured,
            tolerance,
        });
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Residual of the unscaled arclength system on a converged state,
/// evaluated at interior nodes with the square differentiation operator:
/// dr/ds - cos psi and companions, after mapping tau back to arclength.
pub fn unscaled_residual(sol: &ProfileSolution, kappa: f64) -> Result<f64> {
    let state = &sol.state;
    let n = state.n();
    let d = diff_operator(n, n, 1, (-1.0, 1.0))?;
    let dr = d.apply(&state.r)?;
    let du = d.apply(&state.u)?;
    let dpsi = d.apply(&state.psi)?;
    let ell = state.ell;
    let mut worst = 0.0f64;
    for j in 1..n - 1 {
        let (sin_psi, cos_psi) = state.psi[j].sin_cos();
        let e1 = dr[j] / ell - cos_psi;
        let e2 = du[j] / ell - sin_psi;
        let e3 = dpsi[j] / ell - (kappa * state.u[j] - sin_psi / state.r[j]);
        worst = worst.max(e1.abs()).max(e2.abs()).max(e3.abs());
    }
    Ok(worst)
}

/// Full verification battery for a single sigma: solves the profile, then
/// checks convergence quality, the geometric invariants, Vogel's sandwich,
/// and the volume identity.
pub fn verify_profile(sigma: f64, cfg: &SolverConfig) -> Result<VerificationReport> {
    let sol = solve_t(sigma, cfg)?;
    let mut report = VerificationReport::default();
    report_profile_checks(&mut report, &sol, cfg, "")?;
    Ok(report)
}

pub(crate) fn report_profile_checks(
    report: &mut VerificationReport,
    sol: &ProfileSolution,
    cfg: &SolverConfig,
    prefix: &str,
) -> Result<()> {
    let state = &sol.state;
    let problem = crate::bvp::BvpProblem::new(sol.sigma, sol.b_final, 0.0, cfg.kappa)?;

    report.push(
        format!("{prefix}newton_residual"),
        sol.report.converged && sol.report.final_residual < cfg.tol_newton,
        sol.report.final_residual,
        cfg.tol_newton,
    );

    let bc = state.boundary_residuals(&problem);
    let bc_worst = bc.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    report.push(format!("{prefix}boundary_residuals"), bc_worst < 1e-10, bc_worst, 1e-10);

    let t = sol.t;
    report.push(
        format!("{prefix}height_bound_sqrt2"),
        t > 0.0 && t < 2.0_f64.sqrt(),
        t,
        2.0_f64.sqrt(),
    );

    // U must decrease strictly in tau and stay positive.
    let monotone = state.u.windows(2).all(|w| w[1] < w[0]) && state.u.iter().all(|&u| u > 0.0);
    report.push(
        format!("{prefix}height_monotone_positive"),
        monotone,
        if monotone { 1.0 } else { 0.0 },
        1.0,
    );

    // Physical curve length is 2 ell (tau spans [-1, 1] with s = ell tau);
    // it exceeds the chord and stays bounded on this family.
    let chord = sol.b_final - sol.sigma;
    let length = 2.0 * state.ell;
    report.push(
        format!("{prefix}arclength_vs_chord"),
        length > chord && length < 4.0 * chord,
        length / chord,
        4.0,
    );

    let unscaled = unscaled_residual(sol, cfg.kappa)?;
    report.push(format!("{prefix}unscaled_residual"), unscaled < 1e-9, unscaled, 1e-9);

    let top = top_portion(sol.sigma, sol.t, cfg)?;
    report.push(
        format!("{prefix}vogel_sandwich"),
        vogel_bounds_check(sol.sigma, sol.t, top.r_at_0()),
        top.r_at_0(),
        (2.0 * sol.sigma / sol.t + sol.sigma * sol.sigma).sqrt(),
    );

    // Concavity of u(r) on the open top portion.
    let mut concave = true;
    for (j, &phi) in top.grid().nodes().iter().enumerate() {
        if phi <= 1e-9 || phi >= std::f64::consts::FRAC_PI_2 - 1e-9 {
            continue;
        }
        let (r, u) = (top.r()[j], top.u()[j]);
        let delta = r * u + phi.sin();
        let d2u = -delta / (r * phi.cos().powi(3));
        if !(d2u < 0.0) {
            concave = false;
        }
    }
    report.push(
        format!("{prefix}upper_profile_concave"),
        concave,
        if concave { 1.0 } else { 0.0 },
        1.0,
    );

    let vc = volume_check(sol.sigma, sol.t, 0.0, cfg)?;
    report.push(format!("{prefix}volume_identity"), vc.relative_gap() < 1e-8, vc.relative_gap(), 1e-8);
    report.push(
        format!("{prefix}delta_at_phi_minus"),
        vc.delta_at_phi_minus > 0.0,
        vc.delta_at_phi_minus,
        0.0,
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vogel_check_accepts_bounds_and_rejects_outside() {
        // Fabricated values: lower bound sqrt(1/0.5 + 1) = sqrt(3).
        let lower = 3.0_f64.sqrt();
        let upper = 5.0_f64.sqrt();
        assert!(vogel_bounds_check(1.0, 0.5, lower));
        assert!(vogel_bounds_check(1.0, 0.5, upper));
        assert!(vogel_bounds_check(1.0, 0.5, 0.5 * (lower + upper)));
        assert!(!vogel_bounds_check(1.0, 0.5, lower * 0.9));
        assert!(!vogel_bounds_check(1.0, 0.5, upper * 1.1));
    }

    #[test]
    fn vprime_sign_follows_radial_variation() {
        let mut rec = PhiMinusRecord {
            sigma: 1.0,
            rho0: 1.5,
            phi_minus: 2.0,
            state: [1.5, 0.3, 0.25, 0.4],
            delta: 1.2,
        };
        let v = vprime_criterion(&rec).unwrap();
        assert!((v - 2.0 * std::f64::consts::PI * 0.25 * 1.2).abs() < 1e-14);
        rec.state[2] = 0.0;
        assert_eq!(vprime_criterion(&rec).unwrap(), 0.0);
        rec.delta = -0.1;
        assert!(vprime_criterion(&rec).is_err());
    }
}
