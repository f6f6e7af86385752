//! Solve one bridge, integrate its top portion, and run the variation
//! equations along it.

use ulb_core::profile::{solve_t, top_portion, SolverConfig};
use ulb_core::variation::integrate_variation;

fn main() -> ulb_core::Result<()> {
    let cfg = SolverConfig::default();
    let sigma = 1.0;

    let sol = solve_t(sigma, &cfg)?;
    println!(
        "T({sigma}) = {:.12}   (truncated at b = {}, grid n = {})",
        sol.t, sol.b_final, sol.report.n_final
    );

    let top = top_portion(sigma, sol.t, &cfg)?;
    println!(
        "top of the curve: (r, u) = ({:.8}, {:.8})",
        top.r_at_0(),
        top.u_at_0()
    );

    // T'(sigma) by a central difference, good enough for a demo; sweeps
    // use the spectral derivative instead.
    let h = 1e-4;
    let tp = (solve_t(sigma + h, &cfg)?.t - solve_t(sigma - h, &cfg)?.t) / (2.0 * h);
    let tr = integrate_variation(sigma, sol.t, tp, &cfg)?;
    println!(
        "radial variation: min = {:.8} at phi = {:.4}, endpoint = {:.8}",
        tr.min_rdot, tr.argmin_phi, tr.rdot_at_0
    );
    Ok(())
}
