//! Property tests for the collocation primitives.

use proptest::prelude::*;

use ulb_core::chebyshev::{bary_eval, cheb_points, cubic_spline, diff_operator, ChebGrid};

fn interval_strategy() -> impl Strategy<Value = (f64, f64)> {
    (-5.0..5.0f64, 0.1..8.0f64).prop_map(|(lo, width)| (lo, lo + width))
}

proptest! {
    #[test]
    fn nodes_are_sorted_symmetric_with_exact_endpoints(
        n in 2usize..80,
        interval in interval_strategy(),
    ) {
        let (lo, hi) = interval;
        let pts = cheb_points(n, interval).unwrap();
        prop_assert_eq!(pts[0], lo);
        prop_assert_eq!(pts[n - 1], hi);
        for w in pts.windows(2) {
            prop_assert!(w[0] < w[1]);
        }
        // Width-relative symmetry plus the unavoidable rounding from the
        // interval's absolute position (relevant only far from the origin;
        // every grid the solver builds has |lo + hi| comparable to the
        // width, where the first term dominates).
        let tol = 1e-15 * (hi - lo) + 4.0 * f64::EPSILON * lo.abs().max(hi.abs());
        for j in 0..n {
            let s = pts[j] + pts[n - 1 - j];
            prop_assert!((s - (lo + hi)).abs() <= tol);
        }
    }

    #[test]
    fn derivative_annihilates_constants(
        n in 2usize..50,
        interval in interval_strategy(),
        square in any::<bool>(),
    ) {
        let (lo, hi) = interval;
        let rows = if square || n == 2 { n } else { n - 1 };
        let d = diff_operator(rows, n, 1, interval).unwrap();
        let out = d.apply(&vec![1.0; n]).unwrap();
        // Entries grow like n^2 / width, so the achievable zero is
        // relative to that scale; on the solver's actual grids this is
        // far below 1e-12 absolute.
        let tol = 1e-13f64.max(5e-15 * (n * n) as f64 / (hi - lo));
        for v in out {
            prop_assert!(v.abs() < tol, "row sum {v} exceeds {tol}");
        }
    }

    #[test]
    fn interpolation_reproduces_cubics(
        interval in interval_strategy(),
        coeffs in prop::array::uniform4(-2.0..2.0f64),
        q in 0.0..1.0f64,
    ) {
        let (lo, hi) = interval;
        let grid = ChebGrid::new(9, interval).unwrap();
        let f = |x: f64| coeffs[0] + coeffs[1] * x + coeffs[2] * x * x + coeffs[3] * x * x * x;
        let vals: Vec<f64> = grid.nodes().iter().map(|&x| f(x)).collect();
        let point = lo + q * (hi - lo);
        let out = bary_eval(&grid, &vals, &[point]).unwrap();
        let scale = vals.iter().fold(1.0f64, |a, &b| a.max(b.abs()));
        prop_assert!((out[0] - f(point)).abs() <= 1e-12 * scale);
    }

    #[test]
    fn downsample_then_interpolate_is_identity_on_polynomials(
        n in 5usize..30,
        interval in interval_strategy(),
    ) {
        let grid = ChebGrid::new(n, interval).unwrap();
        let coarse = ChebGrid::new(n - 1, interval).unwrap();
        // Degree n-2 polynomial: representable on both grids.
        let f = |x: f64| {
            let z = (x - interval.0) / (interval.1 - interval.0);
            (0..n - 1).map(|k| 0.5f64.powi(k as i32) * z.powi(k as i32)).sum::<f64>()
        };
        let vals: Vec<f64> = grid.nodes().iter().map(|&x| f(x)).collect();
        let d0 = diff_operator(n - 1, n, 0, interval).unwrap();
        let down = d0.apply(&vals).unwrap();
        let back = bary_eval(&coarse, &down, grid.nodes()).unwrap();
        for (b, v) in back.iter().zip(vals.iter()) {
            prop_assert!((b - v).abs() < 1e-12);
        }
    }

    #[test]
    fn spline_interpolates_its_knots(
        ys in prop::collection::vec(-3.0..3.0f64, 6..20),
    ) {
        let xs: Vec<f64> = (0..ys.len()).map(|i| i as f64).collect();
        let out = cubic_spline(&xs, &ys, &xs).unwrap();
        for (o, y) in out.iter().zip(ys.iter()) {
            prop_assert!((o - y).abs() < 1e-12);
        }
    }
}
