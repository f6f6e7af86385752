//! Independent shooting oracle for T(sigma).
//!
//! Completely separate discretization from the spectral solver: integrate
//! the arclength initial value problem outward from the vertical point
//! (sigma, T_guess, psi = -pi/2) and classify the trajectory. If the
//! height crosses zero the guess was too low; if the inclination returns
//! to zero while the height is still positive, too high. Bisect the guess
//! to the separatrix.

use ulb_core::ode::{integrate_until, OdeOptions};

fn too_high(sigma: f64, t_guess: f64) -> bool {
    let opts = OdeOptions::with_tol(1e-12);
    let rhs = |_s: f64, y: &[f64; 3]| {
        let [r, u, psi] = *y;
        Ok([psi.cos(), psi.sin(), u - psi.sin() / r])
    };
    let out = integrate_until(
        rhs,
        0.0,
        400.0,
        [sigma, t_guess, -std::f64::consts::FRAC_PI_2],
        |_, y| y[1] <= 0.0 || y[2] >= 0.0,
        &opts,
    )
    .expect("oracle integration failed");
    assert!(out.stopped, "oracle trajectory never classified itself");
    let y = out.dense.y_end();
    y[2] >= 0.0 && y[1] > 0.0
}

/// Bisect the guess to a bracket of width 1e-10.
pub fn oracle_t(sigma: f64) -> f64 {
    let mut lo = 1e-9;
    let mut hi = 1.5;
    assert!(!too_high(sigma, lo), "oracle bracket broken at the low end");
    assert!(too_high(sigma, hi), "oracle bracket broken at the high end");
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if too_high(sigma, mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}
