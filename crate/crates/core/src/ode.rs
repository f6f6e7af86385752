//! Embedded Dormand-Prince 5(4) integrator with PI step-size control and
//! quartic dense output, after Hairer-Norsett-Wanner's DOPRI5.
//!
//! Supports forward and backward integration, exact landing on requested
//! output points (the step is clamped, not interpolated), and an optional
//! stop predicate checked at accepted steps. The right-hand side returns a
//! `Result` so singular denominators abort integration cleanly; a failing
//! stage is first retried with a smaller step in case the step merely
//! overshot into an invalid region.

use crate::error::{Error, Result};

// Butcher tableau, 7 stages, FSAL.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A2: [f64; 1] = [0.2];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [
    19372.0 / 6561.0,
    -25360.0 / 2187.0,
    64448.0 / 6561.0,
    -212.0 / 729.0,
];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
const A7: [f64; 6] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
];
// Error coefficients: 5th-order weights minus the embedded 4th-order ones.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
// Dense-output coefficients.
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

const SAFE: f64 = 0.9;
const BETA: f64 = 0.04;
const EXPO1: f64 = 0.2 - BETA * 0.75;
const FAC_MIN: f64 = 0.1; // hnew >= h/10 on wild error growth
const FAC_MAX: f64 = 5.0; // hnew <= 5h  (reciprocals of Hairer's FAC1/FAC2)

/// Integrator tolerances and budget.
#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-11,
            atol: 1e-11,
            max_steps: 500_000,
        }
    }
}

impl OdeOptions {
    pub fn with_tol(tol: f64) -> Self {
        OdeOptions {
            rtol: tol,
            atol: tol,
            ..Default::default()
        }
    }
}

/// One accepted step's dense-output polynomial.
#[derive(Debug, Clone)]
struct Segment<const N: usize> {
    t0: f64,
    h: f64,
    cont: [[f64; N]; 5],
}

impl<const N: usize> Segment<N> {
    fn eval(&self, t: f64) -> [f64; N] {
        let theta = (t - self.t0) / self.h;
        let omt = 1.0 - theta;
        let mut y = [0.0; N];
        for i in 0..N {
            let c = &self.cont;
            y[i] = c[0][i] + theta * (c[1][i] + omt * (c[2][i] + theta * (c[3][i] + omt * c[4][i])));
        }
        y
    }
}

/// Piecewise-polynomial solution over the integration range.
#[derive(Debug, Clone)]
pub struct DenseOutput<const N: usize> {
    t_start: f64,
    t_end: f64,
    y_start: [f64; N],
    y_end: [f64; N],
    segments: Vec<Segment<N>>,
}

impl<const N: usize> DenseOutput<N> {
    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn y_end(&self) -> [f64; N] {
        self.y_end
    }

    /// Evaluate the dense solution; `t` must lie inside the integration range.
    pub fn eval(&self, t: f64) -> Result<[f64; N]> {
        let (lo, hi) = if self.t_start <= self.t_end {
            (self.t_start, self.t_end)
        } else {
            (self.t_end, self.t_start)
        };
        let slack = 1e-12 * (hi - lo).max(1.0);
        if t < lo - slack || t > hi + slack {
            return Err(Error::OutOfDomain { point: t, lo, hi });
        }
        if self.segments.is_empty() {
            return Ok(self.y_start);
        }
        let t = t.clamp(lo, hi);
        // Binary search on step start times (monotone in integration direction).
        let forward = self.t_end >= self.t_start;
        let mut a = 0usize;
        let mut b = self.segments.len() - 1;
        while a < b {
            let m = (a + b).div_ceil(2);
            let starts_before = if forward {
                self.segments[m].t0 <= t
            } else {
                self.segments[m].t0 >= t
            };
            if starts_before {
                a = m;
            } else {
                b = m - 1;
            }
        }
        Ok(self.segments[a].eval(t))
    }

    /// Accepted step endpoints, starting point included.
    pub fn step_times(&self) -> Vec<f64> {
        let mut ts = Vec::with_capacity(self.segments.len() + 1);
        ts.push(self.t_start);
        for s in &self.segments {
            ts.push(s.t0 + s.h);
        }
        ts
    }
}

struct Drive<const N: usize> {
    dense: DenseOutput<N>,
    at_outputs: Vec<[f64; N]>,
    stopped: bool,
}

/// Integrate from `t0` to `tf` (either direction) and return the dense solution.
pub fn integrate<const N: usize, F>(
    mut f: F,
    t0: f64,
    tf: f64,
    y0: [f64; N],
    opts: &OdeOptions,
) -> Result<DenseOutput<N>>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    Ok(drive(&mut f, t0, tf, y0, &[], None::<StopRef<N>>, opts)?.dense)
}

/// Integrate and also return the state exactly at each requested output
/// point. `outputs` must be sorted in the direction of integration and lie
/// within `[t0, tf]`; the integrator lands on them by clamping steps, so the
/// returned states carry no interpolation error.
pub fn integrate_with_outputs<const N: usize, F>(
    mut f: F,
    t0: f64,
    tf: f64,
    y0: [f64; N],
    outputs: &[f64],
    opts: &OdeOptions,
) -> Result<(DenseOutput<N>, Vec<[f64; N]>)>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let dir = (tf - t0).signum();
    let mut prev = t0;
    for &p in outputs {
        if (p - prev) * dir < 0.0 || (p - t0) * dir < 0.0 || (p - tf) * dir > 0.0 {
            return Err(Error::InvalidArgument(format!(
                "output point {p} is not ordered within [{t0}, {tf}]"
            )));
        }
        prev = p;
    }
    let out = drive(&mut f, t0, tf, y0, outputs, None::<StopRef<N>>, opts)?;
    Ok((out.dense, out.at_outputs))
}

type StopRef<'a, const N: usize> = &'a (dyn Fn(f64, &[f64; N]) -> bool + 'a);

/// Outcome of an integration with a stop predicate.
pub struct StopOutcome<const N: usize> {
    pub dense: DenseOutput<N>,
    /// Whether the predicate fired before `t_max` was reached.
    pub stopped: bool,
}

/// Integrate until `stop(t, y)` holds at an accepted step, or until `t_max`.
/// The predicate is evaluated at step endpoints; refine the crossing with
/// the returned dense output.
pub fn integrate_until<const N: usize, F>(
    mut f: F,
    t0: f64,
    t_max: f64,
    y0: [f64; N],
    stop: impl Fn(f64, &[f64; N]) -> bool,
    opts: &OdeOptions,
) -> Result<StopOutcome<N>>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let stop_ref: StopRef<'_, N> = &stop;
    let out = drive(&mut f, t0, t_max, y0, &[], Some(stop_ref), opts)?;
    Ok(StopOutcome {
        dense: out.dense,
        stopped: out.stopped,
    })
}

fn error_norm<const N: usize>(err: &[f64; N], y0: &[f64; N], y1: &[f64; N], opts: &OdeOptions) -> f64 {
    let mut acc = 0.0;
    for i in 0..N {
        let sc = opts.atol + opts.rtol * y0[i].abs().max(y1[i].abs());
        let q = err[i] / sc;
        acc += q * q;
    }
    (acc / N as f64).sqrt()
}

/// Hairer's starting-step heuristic.
fn initial_step<const N: usize, F>(
    f: &mut F,
    t0: f64,
    dir: f64,
    y0: &[f64; N],
    f0: &[f64; N],
    h_max: f64,
    opts: &OdeOptions,
) -> Result<f64>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let mut dnf = 0.0;
    let mut dny = 0.0;
    for i in 0..N {
        let sc = opts.atol + opts.rtol * y0[i].abs();
        dnf += (f0[i] / sc).powi(2);
        dny += (y0[i] / sc).powi(2);
    }
    let mut h = if dnf <= 1e-10 || dny <= 1e-10 {
        1e-6
    } else {
        (dny / dnf).sqrt() * 0.01
    };
    h = h.min(h_max);

    let mut y1 = [0.0; N];
    for i in 0..N {
        y1[i] = y0[i] + dir * h * f0[i];
    }
    let f1 = f(t0 + dir * h, &y1)?;
    let mut der2 = 0.0;
    for i in 0..N {
        let sc = opts.atol + opts.rtol * y0[i].abs();
        der2 += ((f1[i] - f0[i]) / sc).powi(2);
    }
    let der2 = der2.sqrt() / h;
    let der12 = der2.max(dnf.sqrt());
    let h1 = if der12 <= 1e-15 {
        (1e-6_f64).max(h * 1e-3)
    } else {
        (0.01 / der12).powf(0.2)
    };
    Ok(h.min(h1).min(h_max).max(1e-300))
}

fn drive<const N: usize, F>(
    f: &mut F,
    t0: f64,
    tf: f64,
    y0: [f64; N],
    outputs: &[f64],
    stop: Option<StopRef<'_, N>>,
    opts: &OdeOptions,
) -> Result<Drive<N>>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    if !(tf - t0).is_finite() || tf == t0 {
        return Err(Error::InvalidArgument(format!(
            "bad integration range [{t0}, {tf}]"
        )));
    }
    let dir = (tf - t0).signum();
    let span = (tf - t0).abs();

    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y)?;
    let mut h = initial_step(f, t0, dir, &y, &k1, span, opts)?;

    let mut segments: Vec<Segment<N>> = Vec::new();
    let mut at_outputs: Vec<[f64; N]> = Vec::new();
    let mut next_output = 0usize;
    // Record output points that coincide with the start.
    while next_output < outputs.len() && outputs[next_output] == t0 {
        at_outputs.push(y);
        next_output += 1;
    }
    if let Some(s) = stop {
        if s(t0, &y) {
            return Ok(Drive {
                dense: DenseOutput {
                    t_start: t0,
                    t_end: t0,
                    y_start: y0,
                    y_end: y0,
                    segments,
                },
                at_outputs,
                stopped: true,
            });
        }
    }

    let mut facold = 1e-4_f64;
    let mut rejected = false;
    let mut steps = 0usize;
    let mut bad_stage_retries = 0usize;

    loop {
        if steps >= opts.max_steps {
            return Err(Error::Integrator(format!(
                "step budget {} exhausted at t = {t}",
                opts.max_steps
            )));
        }
        steps += 1;

        let remaining = (tf - t) * dir;
        if remaining <= span * 1e-15 {
            // Nothing left but rounding.
            t = tf;
            break;
        }
        if h > remaining {
            h = remaining;
        }
        // Clamp onto the next requested output point.
        let mut clamped_output = false;
        if next_output < outputs.len() {
            let to_out = (outputs[next_output] - t) * dir;
            if to_out <= h * (1.0 + 1e-12) {
                h = to_out;
                clamped_output = true;
            }
        }
        if clamped_output && h <= span * 1e-16 {
            // The requested point coincides with the current time.
            t = outputs[next_output];
            while next_output < outputs.len() && outputs[next_output] == t {
                at_outputs.push(y);
                next_output += 1;
            }
            continue;
        }
        if h <= 100.0 * f64::EPSILON * t.abs().max(span) {
            return Err(Error::Integrator(format!("step size underflow at t = {t}")));
        }
        let hs = dir * h;

        // Stages. A failing right-hand side is treated like an oversized
        // step a few times before the error is considered real.
        let stage = |f: &mut F, t: f64, y: &[f64; N]| f(t, y);
        let result: Result<([f64; N], [[f64; N]; 7])> = (|| {
            let mut k = [[0.0; N]; 7];
            k[0] = k1;
            let mut ytmp = [0.0; N];
            macro_rules! combine {
                ($coeffs:expr, $stages:expr) => {
                    for i in 0..N {
                        let mut acc = 0.0;
                        for (c, kk) in $coeffs.iter().zip($stages.iter()) {
                            acc += c * kk[i];
                        }
                        ytmp[i] = y[i] + hs * acc;
                    }
                };
            }
            combine!(A2, k[..1]);
            k[1] = stage(f, t + C[1] * hs, &ytmp)?;
            combine!(A3, k[..2]);
            k[2] = stage(f, t + C[2] * hs, &ytmp)?;
            combine!(A4, k[..3]);
            k[3] = stage(f, t + C[3] * hs, &ytmp)?;
            combine!(A5, k[..4]);
            k[4] = stage(f, t + C[4] * hs, &ytmp)?;
            combine!(A6, k[..5]);
            k[5] = stage(f, t + C[5] * hs, &ytmp)?;
            combine!(A7, k[..6]);
            let ynew = ytmp;
            k[6] = stage(f, t + hs, &ynew)?;
            Ok((ynew, k))
        })();

        let (ynew, k) = match result {
            Ok(v) => v,
            Err(e) => {
                bad_stage_retries += 1;
                if bad_stage_retries > 60 || h <= span * 1e-14 {
                    return Err(e);
                }
                h *= 0.25;
                continue;
            }
        };
        bad_stage_retries = 0;

        let mut err_vec = [0.0; N];
        for i in 0..N {
            let mut acc = 0.0;
            for s in 0..7 {
                acc += E[s] * k[s][i];
            }
            err_vec[i] = hs * acc;
        }
        let err = error_norm(&err_vec, &y, &ynew, opts);

        let fac11 = err.powf(EXPO1);
        if err <= 1.0 {
            // Accept. The controller memory keeps last step's error.
            let fac_mem = facold.powf(BETA);
            facold = err.max(1e-4);
            let mut cont = [[0.0; N]; 5];
            for i in 0..N {
                let dy = ynew[i] - y[i];
                let bspl = hs * k[0][i] - dy;
                cont[0][i] = y[i];
                cont[1][i] = dy;
                cont[2][i] = bspl;
                cont[3][i] = dy - hs * k[6][i] - bspl;
                let mut acc = 0.0;
                for s in 0..7 {
                    acc += D[s] * k[s][i];
                }
                cont[4][i] = hs * acc;
            }
            segments.push(Segment { t0: t, h: hs, cont });
            t += hs;
            y = ynew;
            k1 = k[6];

            if clamped_output {
                // Pin the landing exactly on the requested point.
                t = outputs[next_output];
                while next_output < outputs.len() && outputs[next_output] == t {
                    at_outputs.push(y);
                    next_output += 1;
                }
            }
            if let Some(s) = stop {
                if s(t, &y) {
                    return Ok(Drive {
                        dense: DenseOutput {
                            t_start: t0,
                            t_end: t,
                            y_start: y0,
                            y_end: y,
                            segments,
                        },
                        at_outputs,
                        stopped: true,
                    });
                }
            }
            if (tf - t) * dir <= span * 1e-15 {
                t = tf;
                break;
            }

            let mut fac = fac11 / fac_mem;
            fac = (fac / SAFE).clamp(FAC_MIN, FAC_MAX);
            let mut hnew = h / fac;
            if rejected {
                hnew = hnew.min(h);
                rejected = false;
            }
            h = hnew;
        } else {
            // Reject and shrink.
            h /= (fac11 / SAFE).min(1.0 / FAC_MIN);
            rejected = true;
        }
    }

    Ok(Drive {
        dense: DenseOutput {
            t_start: t0,
            t_end: t,
            y_start: y0,
            y_end: y,
            segments,
        },
        at_outputs,
        stopped: false,
    })
}
