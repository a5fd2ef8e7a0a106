//! Embedded Runge–Kutta 5(4) (Dormand–Prince) with continuous output.
//!
//! Integration runs forward or backward in `x`. Error control is relative to
//! the max-norm of the whole state rather than per component, so solutions
//! whose components pass through zero, or whose overall size is many orders
//! of magnitude below one, are tracked with the same relative accuracy.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Options {
    pub rtol: f64,
    pub atol: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            h_max: f64::INFINITY,
            max_steps: 2_000_000,
        }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// One accepted step with its quartic continuous extension.
#[derive(Debug, Clone, Copy)]
pub struct Segment<const N: usize> {
    x0: f64,
    h: f64,
    rc: [[f64; N]; 5],
}

impl<const N: usize> Segment<N> {
    pub fn start(&self) -> f64 {
        self.x0
    }
    pub fn end(&self) -> f64 {
        self.x0 + self.h
    }

    pub fn eval(&self, x: f64) -> [f64; N] {
        let th = (x - self.x0) / self.h;
        let th1 = 1.0 - th;
        let mut y = [0.0; N];
        for (i, yi) in y.iter_mut().enumerate() {
            let r = &self.rc;
            *yi = r[0][i] + th * (r[1][i] + th1 * (r[2][i] + th * (r[3][i] + th1 * r[4][i])));
        }
        y
    }

    fn contains(&self, x: f64) -> bool {
        let (lo, hi) = if self.h > 0.0 {
            (self.x0, self.end())
        } else {
            (self.end(), self.x0)
        };
        x >= lo && x <= hi
    }
}

/// Accepted steps of one integration, ordered in the direction of travel.
#[derive(Debug, Clone)]
pub struct Trajectory<const N: usize> {
    pub segments: Vec<Segment<N>>,
    pub x_end: f64,
    pub y_end: [f64; N],
    /// The stop predicate fired before `x_end` was reached.
    pub stopped: bool,
}

impl<const N: usize> Trajectory<N> {
    /// Dense output at `x`, `None` outside the covered interval.
    pub fn eval(&self, x: f64) -> Option<[f64; N]> {
        let first = self.segments.first()?;
        let forward = first.h > 0.0;
        // segments are monotone in x0 along the direction of travel
        let idx = self
            .segments
            .partition_point(|s| if forward { s.end() < x } else { s.end() > x });
        let seg = self.segments.get(idx)?;
        if seg.contains(x) {
            Some(seg.eval(x))
        } else {
            None
        }
    }

    pub fn x_start(&self) -> Option<f64> {
        self.segments.first().map(|s| s.x0)
    }
}

fn norm_inf<const N: usize>(y: &[f64; N]) -> f64 {
    y.iter().fold(0.0, |m, v| m.max(v.abs()))
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += h * c * k[i];
        }
    }
    out
}

/// Integrate `y' = f(x, y)` from `x0` to `x_end`.
///
/// `stop` is called after every accepted step; returning `true` ends the
/// integration early with `stopped = true`. Errors from `f` propagate.
pub fn integrate<const N: usize, F, S>(
    mut f: F,
    x0: f64,
    y0: [f64; N],
    x_end: f64,
    opts: &Options,
    mut stop: S,
) -> Result<Trajectory<N>>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
    S: FnMut(f64, &[f64; N]) -> bool,
{
    let span = x_end - x0;
    let mut traj = Trajectory {
        segments: Vec::new(),
        x_end: x0,
        y_end: y0,
        stopped: false,
    };
    if span == 0.0 {
        return Ok(traj);
    }
    let dir = span.signum();
    let mut x = x0;
    let mut y = y0;
    let mut k1 = f(x, &y)?;

    let scale0 = opts.atol + opts.rtol * norm_inf(&y);
    let d0 = norm_inf(&y) / scale0;
    let d1 = norm_inf(&k1) / scale0;
    let mut h = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    h = h.min(opts.h_max).min(span.abs()) * dir;

    let mut steps = 0usize;
    let mut reject_streak = 0usize;
    loop {
        if steps >= opts.max_steps {
            return Err(Error::BlowUp {
                x,
                reason: format!("integrator exceeded {} steps", opts.max_steps),
            });
        }
        steps += 1;
        let last = (x + h - x_end) * dir >= 0.0;
        if last {
            h = x_end - x;
        }

        let k2 = f(x + C2 * h, &axpy(&y, h, &[(A21, &k1)]))?;
        let k3 = f(x + C3 * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]))?;
        let k4 = f(
            x + C4 * h,
            &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
        )?;
        let k5 = f(
            x + C5 * h,
            &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        )?;
        let y6 = axpy(
            &y,
            h,
            &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
        );
        let k6 = f(x + h, &y6)?;
        let y1 = axpy(
            &y,
            h,
            &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
        );
        let k7 = f(x + h, &y1)?;

        let mut err = 0.0f64;
        let sc = opts.atol + opts.rtol * norm_inf(&y).max(norm_inf(&y1));
        for i in 0..N {
            let e =
                h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            err = err.max(e.abs() / sc);
        }
        if !err.is_finite() || y1.iter().any(|v| !v.is_finite()) {
            return Err(Error::BlowUp {
                x,
                reason: "non-finite state in integrator".into(),
            });
        }

        if err <= 1.0 {
            reject_streak = 0;
            let mut rc = [[0.0; N]; 5];
            for i in 0..N {
                let ydiff = y1[i] - y[i];
                let bspl = h * k1[i] - ydiff;
                rc[0][i] = y[i];
                rc[1][i] = ydiff;
                rc[2][i] = bspl;
                rc[3][i] = ydiff - h * k7[i] - bspl;
                rc[4][i] = h
                    * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
            }
            traj.segments.push(Segment { x0: x, h, rc });
            x = if last { x_end } else { x + h };
            y = y1;
            k1 = k7;
            if last {
                break;
            }
            if stop(x, &y) {
                traj.stopped = true;
                break;
            }
            let fac = (0.9 * err.max(1e-10).powf(-0.2)).clamp(0.2, 5.0);
            h = (h.abs() * fac).min(opts.h_max) * dir;
        } else {
            reject_streak += 1;
            if reject_streak > 60 {
                return Err(Error::BlowUp {
                    x,
                    reason: "step size underflow".into(),
                });
            }
            let fac = (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
            h *= fac;
        }
    }
    traj.x_end = x;
    traj.y_end = y;
    Ok(traj)
}
