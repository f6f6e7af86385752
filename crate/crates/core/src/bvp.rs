//! The rescaled two-point boundary value problem for the lower portion of
//! the bridge profile, discretized by rectangular Chebyshev collocation and
//! solved with a Newton iteration.
//!
//! Unknowns are the nodal values of R (radius), U (height), Psi
//! (inclination) on an n-point Chebyshev grid over tau in [-1, 1], plus the
//! total arclength ell, stacked as v = [R U Psi ell]. The three first-order
//! equations are collocated on the (n-1)-point grid through rectangular
//! order-0/order-1 operators, and four boundary rows close the square
//! system: R(-1) = sigma, R(1) = b, Psi(-1) = psi_inner, Psi(1) = psi_b.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::chebyshev::{bary_eval, diff_operator, ChebGrid, DiffOperator};
use crate::error::{Error, Result};
use crate::profile::SolverConfig;

/// Boundary data for one truncated exterior problem.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BvpProblem {
    /// Inner radius where the profile is vertical.
    pub sigma: f64,
    /// Outer truncation radius.
    pub b: f64,
    /// Inclination prescribed at the outer radius.
    pub psi_b: f64,
    /// Capillary constant.
    pub kappa: f64,
    /// Inclination prescribed at the inner radius; -pi/2 for the vertical
    /// point of the bridge family.
    pub psi_inner: f64,
}

impl BvpProblem {
    pub fn new(sigma: f64, b: f64, psi_b: f64, kappa: f64) -> Result<Self> {
        if !(sigma > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "sigma must be positive, got {sigma}"
            )));
        }
        if !(sigma < b) {
            return Err(Error::InvalidArgument(format!(
                "need sigma < b, got sigma = {sigma}, b = {b}"
            )));
        }
        if !(kappa > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "kappa must be positive, got {kappa}"
            )));
        }
        if !(-std::f64::consts::PI..=std::f64::consts::PI).contains(&psi_b) {
            return Err(Error::InvalidArgument(format!(
                "psi_b out of [-pi, pi]: {psi_b}"
            )));
        }
        Ok(BvpProblem {
            sigma,
            b,
            psi_b,
            kappa,
            psi_inner: -std::f64::consts::FRAC_PI_2,
        })
    }

    /// Replace the inner-boundary inclination (used by degenerate tests;
    /// the bridge family always pins it at -pi/2).
    pub fn with_psi_inner(mut self, psi_inner: f64) -> Self {
        self.psi_inner = psi_inner;
        self
    }
}

/// Nodal unknowns of the rescaled system on a Chebyshev grid.
#[derive(Debug, Clone)]
pub struct BvpState {
    pub grid: ChebGrid,
    pub r: Vec<f64>,
    pub u: Vec<f64>,
    pub psi: Vec<f64>,
    pub ell: f64,
}

impl BvpState {
    pub fn new(grid: ChebGrid, r: Vec<f64>, u: Vec<f64>, psi: Vec<f64>, ell: f64) -> Result<Self> {
        let n = grid.n();
        if r.len() != n || u.len() != n || psi.len() != n {
            return Err(Error::InvalidArgument(format!(
                "state arrays must have {n} entries (got {}, {}, {})",
                r.len(),
                u.len(),
                psi.len()
            )));
        }
        if !(ell > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "arclength must be positive, got {ell}"
            )));
        }
        Ok(BvpState {
            grid,
            r,
            u,
            psi,
            ell,
        })
    }

    pub fn n(&self) -> usize {
        self.grid.n()
    }

    /// Height at the inner boundary tau = -1; equals T(sigma) on a
    /// converged bridge solve.
    pub fn inner_height(&self) -> f64 {
        self.u[0]
    }

    /// The four boundary residuals in operator-row order:
    /// R(-1) - sigma, R(1) - b, Psi(-1) - psi_inner, Psi(1) - psi_b.
    pub fn boundary_residuals(&self, problem: &BvpProblem) -> [f64; 4] {
        let n = self.n();
        [
            self.r[0] - problem.sigma,
            self.r[n - 1] - problem.b,
            self.psi[0] - problem.psi_inner,
            self.psi[n - 1] - problem.psi_b,
        ]
    }

    /// Interpolate the state onto an m-point grid on the same interval.
    pub fn resample(&self, m: usize) -> Result<BvpState> {
        if m == self.n() {
            return Ok(self.clone());
        }
        let target = ChebGrid::new(m, self.grid.interval())?;
        let r = bary_eval(&self.grid, &self.r, target.nodes())?;
        let u = bary_eval(&self.grid, &self.u, target.nodes())?;
        let psi = bary_eval(&self.grid, &self.psi, target.nodes())?;
        BvpState::new(target, r, u, psi, self.ell)
    }

    fn check_positive_radius(&self) -> Result<()> {
        for (j, &rj) in self.r.iter().enumerate() {
            if !(rj > 0.0) || !rj.is_finite() {
                return Err(Error::SingularState(format!(
                    "R = {rj} at node {j}: profile reached the axis"
                )));
            }
        }
        Ok(())
    }

    fn stack(&self) -> DVector<f64> {
        let n = self.n();
        let mut v = DVector::zeros(3 * n + 1);
        for j in 0..n {
            v[j] = self.r[j];
            v[n + j] = self.u[j];
            v[2 * n + j] = self.psi[j];
        }
        v[3 * n] = self.ell;
        v
    }

    fn unstack(&self, v: &DVector<f64>) -> BvpState {
        let n = self.n();
        BvpState {
            grid: self.grid.clone(),
            r: v.as_slice()[..n].to_vec(),
            u: v.as_slice()[n..2 * n].to_vec(),
            psi: v.as_slice()[2 * n..3 * n].to_vec(),
            ell: v[3 * n],
        }
    }
}

/// Convergence record for one solve.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct NewtonReport {
    pub iterations: usize,
    /// Relative update norm |dv| / |v| at exit.
    pub final_residual: f64,
    /// Grid size of the returned state.
    pub n_final: usize,
    pub converged: bool,
}

/// Rectangular collocation operators for a given grid size on [-1, 1],
/// built once per solve and shared across Newton iterations.
struct Ops {
    d0: DiffOperator,
    d1: DiffOperator,
}

impl Ops {
    fn build(n: usize) -> Result<Ops> {
        Ok(Ops {
            d0: diff_operator(n - 1, n, 0, (-1.0, 1.0))?,
            d1: diff_operator(n - 1, n, 1, (-1.0, 1.0))?,
        })
    }
}

/// Residual of the rescaled system: three collocation blocks on the
/// (n-1)-point grid followed by the four boundary rows. Length 3(n-1)+4.
pub fn residual(state: &BvpState, problem: &BvpProblem) -> Result<Vec<f64>> {
    let ops = Ops::build(state.n())?;
    residual_with(state, problem, &ops)
}

fn residual_with(state: &BvpState, problem: &BvpProblem, ops: &Ops) -> Result<Vec<f64>> {
    state.check_positive_radius()?;
    let n = state.n();
    let m = n - 1;
    let ell = state.ell;
    let kappa = problem.kappa;

    let cos_psi: Vec<f64> = state.psi.iter().map(|p| p.cos()).collect();
    let sin_psi: Vec<f64> = state.psi.iter().map(|p| p.sin()).collect();
    let sin_over_r: Vec<f64> = sin_psi
        .iter()
        .zip(state.r.iter())
        .map(|(s, r)| s / r)
        .collect();

    let dr = ops.d1.apply(&state.r)?;
    let du = ops.d1.apply(&state.u)?;
    let dpsi = ops.d1.apply(&state.psi)?;
    let cos_ds = ops.d0.apply(&cos_psi)?;
    let sin_ds = ops.d0.apply(&sin_psi)?;
    let sor_ds = ops.d0.apply(&sin_over_r)?;
    let u_ds = ops.d0.apply(&state.u)?;

    let mut out = vec![0.0; 3 * m + 4];
    for i in 0..m {
        out[i] = dr[i] - ell * cos_ds[i];
        out[m + i] = du[i] - ell * sin_ds[i];
        out[2 * m + i] = dpsi[i] + ell * sor_ds[i] - kappa * ell * u_ds[i];
    }
    let bc = state.boundary_residuals(problem);
    out[3 * m..3 * m + 4].copy_from_slice(&bc);
    Ok(out)
}

/// Dense Frechet operator of the residual with respect to the stacked
/// unknowns [R U Psi ell]; shape (3(n-1)+4) x (3n+1), which is square.
pub fn frechet(state: &BvpState, problem: &BvpProblem) -> Result<DMatrix<f64>> {
    let ops = Ops::build(state.n())?;
    frechet_with(state, problem, &ops)
}

fn frechet_with(state: &BvpState, problem: &BvpProblem, ops: &Ops) -> Result<DMatrix<f64>> {
    state.check_positive_radius()?;
    let n = state.n();
    let m = n - 1;
    let ell = state.ell;
    let kappa = problem.kappa;
    let d0 = ops.d0.matrix();
    let d1 = ops.d1.matrix();

    let cos_psi: Vec<f64> = state.psi.iter().map(|p| p.cos()).collect();
    let sin_psi: Vec<f64> = state.psi.iter().map(|p| p.sin()).collect();

    let mut l = DMatrix::zeros(3 * m + 4, 3 * n + 1);
    for i in 0..m {
        for j in 0..n {
            let d0ij = d0[(i, j)];
            let d1ij = d1[(i, j)];
            // d(eq_R)/dR = D1, d(eq_R)/dPsi = ell D0 diag(sin Psi)
            l[(i, j)] = d1ij;
            l[(i, 2 * n + j)] = ell * d0ij * sin_psi[j];
            // d(eq_U)/dU = D1, d(eq_U)/dPsi = -ell D0 diag(cos Psi)
            l[(m + i, n + j)] = d1ij;
            l[(m + i, 2 * n + j)] = -ell * d0ij * cos_psi[j];
            // d(eq_Psi)/dR = -ell D0 diag(sin Psi / R^2)
            l[(2 * m + i, j)] = -ell * d0ij * sin_psi[j] / (state.r[j] * state.r[j]);
            // d(eq_Psi)/dU = -kappa ell D0
            l[(2 * m + i, n + j)] = -kappa * ell * d0ij;
            // d(eq_Psi)/dPsi = D1 + ell D0 diag(cos Psi / R)
            l[(2 * m + i, 2 * n + j)] = d1ij + ell * d0ij * cos_psi[j] / state.r[j];
        }
    }
    // ell column: -D0 cos Psi, -D0 sin Psi, D0 (sin Psi / R - kappa U).
    let sor_minus_ku: Vec<f64> = (0..n)
        .map(|j| sin_psi[j] / state.r[j] - kappa * state.u[j])
        .collect();
    let col_r = ops.d0.apply(&cos_psi)?;
    let col_u = ops.d0.apply(&sin_psi)?;
    let col_p = ops.d0.apply(&sor_minus_ku)?;
    for i in 0..m {
        l[(i, 3 * n)] = -col_r[i];
        l[(m + i, 3 * n)] = -col_u[i];
        l[(2 * m + i, 3 * n)] = col_p[i];
    }
    // Boundary rows are exact evaluation functionals at the grid endpoints.
    l[(3 * m, 0)] = 1.0; // R(-1)
    l[(3 * m + 1, n - 1)] = 1.0; // R(1)
    l[(3 * m + 2, 2 * n)] = 1.0; // Psi(-1)
    l[(3 * m + 3, 3 * n - 1)] = 1.0; // Psi(1)
    Ok(l)
}

/// Full-step Newton iteration with a fallback halving search that only
/// activates when a step blows the residual up by more than 10x or leaves
/// the admissible region (R > 0).
pub fn newton_solve(
    initial: &BvpState,
    problem: &BvpProblem,
    cfg: &SolverConfig,
) -> Result<(BvpState, NewtonReport)> {
    initial.check_positive_radius()?;
    let n = initial.n();
    let ops = Ops::build(n)?;
    let mut state = initial.clone();
    let mut res = residual_with(&state, problem, &ops)?;
    let mut res_norm = norm(&res);

    let mut report = NewtonReport {
        iterations: 0,
        final_residual: f64::INFINITY,
        n_final: n,
        converged: false,
    };

    for it in 1..=cfg.newton_max_iter {
        let l = frechet_with(&state, problem, &ops)?;
        let rhs = DVector::from_column_slice(&res);
        let lu = l.lu();
        let delta = lu.solve(&rhs).ok_or(Error::Factorization { n: 3 * n + 1 })?;

        let v = state.stack();
        let mut step = 1.0;
        let mut best: Option<(f64, BvpState, Vec<f64>, f64)> = None;
        for _ in 0..=20 {
            let candidate = state.unstack(&(&v - step * &delta));
            let cand_ok = candidate.r.iter().all(|&r| r > 0.0 && r.is_finite())
                && candidate.ell.is_finite()
                && candidate.ell > 0.0;
            if cand_ok {
                if let Ok(cres) = residual_with(&candidate, problem, &ops) {
                    let cnorm = norm(&cres);
                    if cnorm.is_finite() && cnorm <= 10.0 * res_norm {
                        best = Some((step, candidate, cres, cnorm));
                        break;
                    }
                    if cnorm.is_finite() && best.as_ref().is_none_or(|(_, _, _, b)| cnorm < *b) {
                        best = Some((step, candidate, cres, cnorm));
                    }
                }
            }
            step *= 0.5;
        }
        let (taken, new_state, new_res, new_norm) = best.ok_or_else(|| {
            Error::SingularState(format!(
                "Newton step left the admissible region at iteration {it} (sigma = {}, b = {})",
                problem.sigma, problem.b
            ))
        })?;

        state = new_state;
        res = new_res;
        res_norm = new_norm;

        let update_norm = taken * delta.norm();
        let v_norm = state.stack().norm();
        let rel = update_norm / v_norm;
        report.iterations = it;
        report.final_residual = rel;
        if rel < cfg.tol_newton {
            report.converged = true;
            return Ok((state, report));
        }
    }
    Ok((state, report))
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Solve with increasing grid sizes until the inner height U(-1) agrees
/// between consecutive grids to `tol_grid`. Grows n by a factor 1.5
/// (rounded) from `n_init` up to `n_max`, warm-starting each size from the
/// previous converged state.
pub fn adapt_grid(
    initial: &BvpState,
    problem: &BvpProblem,
    cfg: &SolverConfig,
) -> Result<(BvpState, NewtonReport)> {
    let mut n = cfg.n_init.max(4);
    let mut current = initial.resample(n)?;
    let (mut state, mut report) = newton_solve(&current, problem, cfg)?;
    if !report.converged {
        return Ok((state, report));
    }
    let mut t_prev = state.inner_height();

    while n < cfg.n_max {
        n = ((n as f64 * 1.5).round() as usize).min(cfg.n_max);
        current = state.resample(n)?;
        let (next_state, next_report) = newton_solve(&current, problem, cfg)?;
        if !next_report.converged {
            return Ok((next_state, next_report));
        }
        let t_next = next_state.inner_height();
        state = next_state;
        report = next_report;
        if (t_next - t_prev).abs() < cfg.tol_grid {
            return Ok((state, report));
        }
        t_prev = t_next;
    }
    report.converged = false;
    Ok((state, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::initial_guess;

    fn test_cfg() -> SolverConfig {
        SolverConfig::default()
    }

    #[test]
    fn residual_layout_and_boundary_rows() {
        let grid = ChebGrid::new(8, (-1.0, 1.0)).unwrap();
        let problem = BvpProblem::new(1.0, 14.0, 0.0, 1.0).unwrap();
        let state = initial_guess(1.0, 14.0, &grid).unwrap();
        let res = residual(&state, &problem).unwrap();
        assert_eq!(res.len(), 3 * 7 + 4);
        // The initial guess satisfies R(-1) = sigma and R(1) = b exactly.
        assert_eq!(res[21], 0.0);
        assert_eq!(res[22], 0.0);
        // Psi(-1) = atan(-1) = -pi/4, so the third boundary row is pi/4.
        assert!((res[23] - std::f64::consts::FRAC_PI_4).abs() < 1e-15);
    }

    #[test]
    fn vertical_state_zeroes_first_block() {
        // With Psi = -pi/2 and R constant, R' - ell cos(Psi) vanishes.
        let n = 7;
        let grid = ChebGrid::new(n, (-1.0, 1.0)).unwrap();
        let problem = BvpProblem::new(1.0, 3.0, 0.0, 1.0).unwrap();
        let state = BvpState::new(
            grid,
            vec![1.0; n],
            vec![0.5; n],
            vec![-std::f64::consts::FRAC_PI_2; n],
            2.0,
        )
        .unwrap();
        let res = residual(&state, &problem).unwrap();
        for v in &res[..n - 1] {
            assert!(v.abs() < 1e-13, "{v}");
        }
    }

    #[test]
    fn residual_rejects_nonpositive_radius() {
        let n = 6;
        let grid = ChebGrid::new(n, (-1.0, 1.0)).unwrap();
        let problem = BvpProblem::new(1.0, 3.0, 0.0, 1.0).unwrap();
        let mut state = initial_guess(1.0, 3.0, &grid).unwrap();
        state.r[2] = -0.5;
        assert!(matches!(
            residual(&state, &problem),
            Err(Error::SingularState(_))
        ));
    }

    #[test]
    fn frechet_boundary_rows_are_evaluations() {
        let n = 9;
        let grid = ChebGrid::new(n, (-1.0, 1.0)).unwrap();
        let problem = BvpProblem::new(0.7, 5.0, 0.1, 1.0).unwrap();
        let state = initial_guess(0.7, 5.0, &grid).unwrap();
        let l = frechet(&state, &problem).unwrap();
        let v = state.stack();
        let prod = &l * &v;
        let m = n - 1;
        assert!((prod[3 * m] - state.r[0]).abs() < 1e-14);
        assert!((prod[3 * m + 1] - state.r[n - 1]).abs() < 1e-14);
        assert!((prod[3 * m + 2] - state.psi[0]).abs() < 1e-14);
        assert!((prod[3 * m + 3] - state.psi[n - 1]).abs() < 1e-14);
    }

    #[test]
    fn frechet_ell_column_at_zero_inclination() {
        // Where Psi = 0: the ell column reads (-1, 0, -kappa U) per block.
        let n = 6;
        let grid = ChebGrid::new(n, (-1.0, 1.0)).unwrap();
        let problem = BvpProblem::new(1.0, 3.0, 0.0, 1.0).unwrap();
        let state = BvpState::new(grid, vec![2.0; n], vec![0.3; n], vec![0.0; n], 2.0).unwrap();
        let l = frechet(&state, &problem).unwrap();
        let m = n - 1;
        // Constant nodal data stays constant under D0, so each block of the
        // ell column is the constant block value.
        for i in 0..m {
            assert!((l[(i, 3 * n)] + 1.0).abs() < 1e-13);
            assert!(l[(m + i, 3 * n)].abs() < 1e-13);
            assert!((l[(2 * m + i, 3 * n)] + 0.3).abs() < 1e-13);
        }
    }

    #[test]
    fn newton_from_converged_state_stops_in_one_iteration() {
        let problem = BvpProblem::new(1.0, 6.0, 0.0, 1.0).unwrap();
        let cfg = test_cfg();
        let grid = ChebGrid::new(48, (-1.0, 1.0)).unwrap();
        let guess = initial_guess(1.0, 6.0, &grid).unwrap();
        let (state, report) = newton_solve(&guess, &problem, &cfg).unwrap();
        assert!(report.converged, "residual {}", report.final_residual);
        let (_, again) = newton_solve(&state, &problem, &cfg).unwrap();
        assert_eq!(again.iterations, 1);
        assert!(again.converged);
    }

    #[test]
    fn degenerate_flat_line_converges_at_minimal_n() {
        // With both boundary inclinations zero and zero height the exact
        // solution is a straight horizontal segment (R linear, U = 0,
        // Psi = 0, ell = (b - sigma)/2): the curvature source kappa*ell*U
        // vanishes identically and every unknown is a polynomial of degree
        // at most one, so the solver accepts at the smallest grid pair.
        let problem = BvpProblem::new(1.0, 3.0, 0.0, 1.0)
            .unwrap()
            .with_psi_inner(0.0);
        let mut cfg = test_cfg();
        cfg.n_init = 4;
        let grid = ChebGrid::new(4, (-1.0, 1.0)).unwrap();
        let r: Vec<f64> = grid.nodes().iter().map(|&t| 2.0 + t).collect();
        let state = BvpState::new(grid, r, vec![0.0; 4], vec![0.0; 4], 1.0).unwrap();
        let (solved, report) = adapt_grid(&state, &problem, &cfg).unwrap();
        assert!(report.converged);
        assert_eq!(report.n_final, 6);
        assert!((solved.ell - 1.0).abs() < 1e-12);
        for (j, &t) in solved.grid.nodes().iter().enumerate() {
            assert!((solved.r[j] - (2.0 + t)).abs() < 1e-12);
            assert!(solved.psi[j].abs() < 1e-12);
            assert!(solved.u[j].abs() < 1e-12);
        }
    }
}
