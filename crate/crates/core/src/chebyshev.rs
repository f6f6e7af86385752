//! Chebyshev collocation primitives: grids, square and rectangular
//! differentiation operators, barycentric interpolation, natural cubic
//! splines, and Clenshaw-Curtis quadrature.
//!
//! Nodes are Chebyshev points of the second kind, stored ascending so that
//! `nodes[0]` is the left endpoint. Rectangular operators map data on an
//! n-point grid to data on an (n-1)-point grid of the same family, which is
//! what lets boundary rows be appended to first-order collocation systems
//! without overdetermining them.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// A Chebyshev grid of the second kind on `[lo, hi]`, nodes ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct ChebGrid {
    n: usize,
    interval: (f64, f64),
    nodes: Vec<f64>,
}

impl ChebGrid {
    pub fn new(n: usize, interval: (f64, f64)) -> Result<Self> {
        let nodes = cheb_points(n, interval)?;
        Ok(ChebGrid { n, interval, nodes })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn interval(&self) -> (f64, f64) {
        self.interval
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }
}

/// Chebyshev points of the second kind mapped to `[lo, hi]`, ascending.
///
/// Uses the sine form `sin(pi*(2j - (n-1)) / (2(n-1)))` so the nodes are
/// symmetric about the midpoint in exact floating point; the endpoints are
/// pinned to `lo` and `hi` exactly.
pub fn cheb_points(n: usize, interval: (f64, f64)) -> Result<Vec<f64>> {
    let (lo, hi) = interval;
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 Chebyshev points, got {n}"
        )));
    }
    if !(lo < hi) {
        return Err(Error::InvalidArgument(format!(
            "degenerate interval [{lo}, {hi}]"
        )));
    }
    Ok(cheb_nodes_unchecked(n, lo, hi))
}

fn cheb_nodes_unchecked(n: usize, lo: f64, hi: f64) -> Vec<f64> {
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    if n == 1 {
        return vec![mid];
    }
    let nm1 = (n - 1) as f64;
    let mut nodes: Vec<f64> = (0..n)
        .map(|j| {
            let x = (std::f64::consts::PI * (2.0 * j as f64 - nm1) / (2.0 * nm1)).sin();
            mid + half * x
        })
        .collect();
    nodes[0] = lo;
    nodes[n - 1] = hi;
    nodes
}

/// Barycentric weights for second-kind Chebyshev points: alternating signs
/// with halved endpoints. Only weight ratios matter, so the interval scaling
/// common to all weights is dropped.
fn bary_weights(n: usize) -> Vec<f64> {
    let mut w: Vec<f64> = (0..n)
        .map(|j| if j.is_multiple_of(2) { 1.0 } else { -1.0 })
        .collect();
    w[0] *= 0.5;
    w[n - 1] *= 0.5;
    w
}

/// A dense collocation operator between Chebyshev grids on one interval.
///
/// `order` 0 is interpolate-then-resample (the identity when square);
/// `order` 1 differentiates the degree-(cols-1) interpolant and samples it
/// on the row grid. Square shapes keep the column grid; rectangular shapes
/// (`rows == cols - 1`) sample on the coarser grid ("spectral
/// down-sampling").
#[derive(Debug, Clone, PartialEq)]
pub struct DiffOperator {
    rows: usize,
    cols: usize,
    order: u8,
    interval: (f64, f64),
    entries: DMatrix<f64>,
}

impl DiffOperator {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn order(&self) -> u8 {
        self.order
    }

    pub fn interval(&self) -> (f64, f64) {
        self.interval
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    /// Apply the operator to nodal values on the column grid.
    pub fn apply(&self, values: &[f64]) -> Result<Vec<f64>> {
        if values.len() != self.cols {
            return Err(Error::InvalidArgument(format!(
                "operator expects {} values, got {}",
                self.cols,
                values.len()
            )));
        }
        let out = (0..self.rows)
            .map(|i| {
                values
                    .iter()
                    .enumerate()
                    .map(|(j, v)| self.entries[(i, j)] * v)
                    .sum()
            })
            .collect();
        Ok(out)
    }
}

/// Build a square or rectangular collocation operator.
pub fn diff_operator(
    rows: usize,
    cols: usize,
    order: u8,
    interval: (f64, f64),
) -> Result<DiffOperator> {
    let (lo, hi) = interval;
    if cols < 2 {
        return Err(Error::InvalidArgument(format!(
            "operator needs at least 2 columns, got {cols}"
        )));
    }
    if !(lo < hi) {
        return Err(Error::InvalidArgument(format!(
            "degenerate interval [{lo}, {hi}]"
        )));
    }
    if order > 1 {
        return Err(Error::InvalidArgument(format!(
            "unsupported derivative order {order}"
        )));
    }
    if rows != cols && rows + 1 != cols {
        return Err(Error::InvalidArgument(format!(
            "unsupported shape {rows}x{cols}: rows must be cols or cols-1"
        )));
    }

    let col_nodes = cheb_nodes_unchecked(cols, lo, hi);
    let entries = if rows == cols {
        match order {
            0 => DMatrix::identity(cols, cols),
            _ => diff_square(&col_nodes),
        }
    } else {
        let row_nodes = cheb_nodes_unchecked(rows, lo, hi);
        if order == 0 {
            bary_matrix(&col_nodes, &row_nodes)
        } else {
            diff_rect(&col_nodes, &row_nodes)
        }
    };

    Ok(DiffOperator {
        rows,
        cols,
        order,
        interval,
        entries,
    })
}

/// Square first-derivative collocation matrix from barycentric weights,
/// with the diagonal set by the negative-sum trick so constants map to
/// exactly representable zeros.
fn diff_square(nodes: &[f64]) -> DMatrix<f64> {
    let n = nodes.len();
    let w = bary_weights(n);
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut diag = 0.0;
        for j in 0..n {
            if i != j {
                let entry = (w[j] / w[i]) / (nodes[i] - nodes[j]);
                d[(i, j)] = entry;
                diag -= entry;
            }
        }
        d[(i, i)] = diag;
    }
    d
}

/// Rectangular first-derivative operator: differentiate the interpolant
/// through the column nodes and sample on the row nodes. Rows use the
/// barycentric derivative formula directly (not a resample-times-square
/// product, which amplifies rounding); each row's nearest-node entry is
/// set by the negative-sum trick so constants map to zero.
fn diff_rect(nodes: &[f64], points: &[f64]) -> DMatrix<f64> {
    let n = nodes.len();
    let w = bary_weights(n);
    let mut m = DMatrix::zeros(points.len(), n);
    let square_rows = std::cell::OnceCell::new();
    for (i, &y) in points.iter().enumerate() {
        if let Some(k) = nodes.iter().position(|&xj| xj == y) {
            let sq = square_rows.get_or_init(|| diff_square(nodes));
            for j in 0..n {
                m[(i, j)] = sq[(k, j)];
            }
            continue;
        }
        // l(y) = sum w_j/(y - x_j); basis derivative
        // L_j'(y) = L_j(y) (q/l - 1/(y - x_j)) with q = sum w_j/(y - x_j)^2.
        let mut l = 0.0;
        let mut q = 0.0;
        let mut t = vec![0.0; n];
        for j in 0..n {
            let tj = w[j] / (y - nodes[j]);
            t[j] = tj;
            l += tj;
            q += tj / (y - nodes[j]);
        }
        let mut nearest = 0usize;
        let mut sum = 0.0;
        for j in 0..n {
            let entry = (t[j] / l) * (q / l - 1.0 / (y - nodes[j]));
            m[(i, j)] = entry;
            if (y - nodes[j]).abs() < (y - nodes[nearest]).abs() {
                nearest = j;
            }
        }
        for j in 0..n {
            if j != nearest {
                sum += m[(i, j)];
            }
        }
        m[(i, nearest)] = -sum;
    }
    m
}

/// Barycentric evaluation matrix: row i evaluates the interpolant through
/// the column nodes at `points[i]`. Rows at points coinciding with a node
/// are exact unit rows.
fn bary_matrix(nodes: &[f64], points: &[f64]) -> DMatrix<f64> {
    let n = nodes.len();
    let w = bary_weights(n);
    let mut m = DMatrix::zeros(points.len(), n);
    for (i, &x) in points.iter().enumerate() {
        if let Some(j) = nodes.iter().position(|&xj| xj == x) {
            m[(i, j)] = 1.0;
            continue;
        }
        let mut denom = 0.0;
        let mut terms = vec![0.0; n];
        for j in 0..n {
            let t = w[j] / (x - nodes[j]);
            terms[j] = t;
            denom += t;
        }
        for j in 0..n {
            m[(i, j)] = terms[j] / denom;
        }
    }
    m
}

/// Evaluate the polynomial interpolant of `values` on `grid` at `points`.
///
/// No extrapolation: any query outside the grid interval is an error.
/// A tiny overshoot (rounding from affine maps) is clamped to the endpoint.
pub fn bary_eval(grid: &ChebGrid, values: &[f64], points: &[f64]) -> Result<Vec<f64>> {
    if values.len() != grid.n {
        return Err(Error::InvalidArgument(format!(
            "grid has {} nodes but {} values given",
            grid.n,
            values.len()
        )));
    }
    let (lo, hi) = grid.interval;
    let slack = 1e-12 * (hi - lo);
    let w = bary_weights(grid.n);
    let mut out = Vec::with_capacity(points.len());
    for &p in points {
        if p < lo - slack || p > hi + slack {
            return Err(Error::OutOfDomain { point: p, lo, hi });
        }
        let x = p.clamp(lo, hi);
        if let Some(j) = grid.nodes.iter().position(|&xj| xj == x) {
            out.push(values[j]);
            continue;
        }
        let mut num = 0.0;
        let mut den = 0.0;
        for j in 0..grid.n {
            let t = w[j] / (x - grid.nodes[j]);
            num += t * values[j];
            den += t;
        }
        out.push(num / den);
    }
    Ok(out)
}

/// Natural cubic spline through `(x, y)` data, with zero second derivative
/// at both ends.
#[derive(Debug, Clone)]
pub struct NaturalSpline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    y2s: Vec<f64>,
}

impl NaturalSpline {
    pub fn new(x: &[f64], y: &[f64]) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::InvalidArgument(format!(
                "spline data length mismatch: {} x vs {} y",
                x.len(),
                y.len()
            )));
        }
        if x.len() < 4 {
            return Err(Error::InvalidArgument(format!(
                "spline needs at least 4 knots, got {}",
                x.len()
            )));
        }
        for i in 1..x.len() {
            if !(x[i] > x[i - 1]) {
                return Err(Error::InvalidArgument(format!(
                    "spline knots must be strictly increasing at index {i}"
                )));
            }
        }

        // Tridiagonal sweep for the interior second derivatives; natural
        // ends pin y'' = 0 at the first and last knot.
        let n = x.len();
        let mut y2s = vec![0.0; n];
        let mut u = vec![0.0; n - 1];
        for i in 1..n - 1 {
            let sig = (x[i] - x[i - 1]) / (x[i + 1] - x[i - 1]);
            let p = sig * y2s[i - 1] + 2.0;
            y2s[i] = (sig - 1.0) / p;
            let du = (y[i + 1] - y[i]) / (x[i + 1] - x[i]) - (y[i] - y[i - 1]) / (x[i] - x[i - 1]);
            u[i] = (6.0 * du / (x[i + 1] - x[i - 1]) - sig * u[i - 1]) / p;
        }
        for k in (1..n - 1).rev() {
            y2s[k] = y2s[k] * y2s[k + 1] + u[k];
        }

        Ok(NaturalSpline {
            xs: x.to_vec(),
            ys: y.to_vec(),
            y2s,
        })
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        let n = self.xs.len();
        let (lo, hi) = (self.xs[0], self.xs[n - 1]);
        if x < lo || x > hi {
            return Err(Error::OutOfDomain { point: x, lo, hi });
        }
        let mut a = 0;
        let mut b = n - 1;
        while b - a > 1 {
            let m = (a + b) / 2;
            if self.xs[m] > x {
                b = m;
            } else {
                a = m;
            }
        }
        let h = self.xs[b] - self.xs[a];
        let ta = (self.xs[b] - x) / h;
        let tb = (x - self.xs[a]) / h;
        Ok(ta * self.ys[a]
            + tb * self.ys[b]
            + ((ta * ta * ta - ta) * self.y2s[a] + (tb * tb * tb - tb) * self.y2s[b]) * h * h
                / 6.0)
    }
}

/// Natural cubic spline values at `queries`.
pub fn cubic_spline(x: &[f64], y: &[f64], queries: &[f64]) -> Result<Vec<f64>> {
    let spline = NaturalSpline::new(x, y)?;
    queries.iter().map(|&q| spline.eval(q)).collect()
}

/// Clenshaw-Curtis nodes (ascending) and weights for `n` points on
/// `[lo, hi]`; exact for polynomials of degree below `n`.
pub fn clenshaw_curtis(n: usize, interval: (f64, f64)) -> Result<(Vec<f64>, Vec<f64>)> {
    let nodes = cheb_points(n, interval)?;
    let (lo, hi) = interval;
    let big_n = n - 1;
    let mut w = vec![0.0; n];
    if big_n == 1 {
        w[0] = 1.0;
        w[1] = 1.0;
    } else {
        let nf = big_n as f64;
        let end = if big_n.is_multiple_of(2) {
            1.0 / (nf * nf - 1.0)
        } else {
            1.0 / (nf * nf)
        };
        w[0] = end;
        w[big_n] = end;
        for (i, wi) in w.iter_mut().enumerate().take(big_n).skip(1) {
            let theta = std::f64::consts::PI * i as f64 / nf;
            let mut v = 1.0;
            if big_n.is_multiple_of(2) {
                for k in 1..big_n / 2 {
                    v -= 2.0 * (2.0 * k as f64 * theta).cos() / (4.0 * (k * k) as f64 - 1.0);
                }
                v -= (nf * theta).cos() / (nf * nf - 1.0);
            } else {
                for k in 1..=(big_n - 1) / 2 {
                    v -= 2.0 * (2.0 * k as f64 * theta).cos() / (4.0 * (k * k) as f64 - 1.0);
                }
            }
            *wi = 2.0 * v / nf;
        }
    }
    // Weights come out for [-1, 1] in descending-theta order; they are
    // symmetric, so only the interval scaling needs applying.
    let half = 0.5 * (hi - lo);
    for wi in w.iter_mut() {
        *wi *= half;
    }
    Ok((nodes, w))
}
