//! Backward shooting on a one-dimensional stable manifold (M₊ > 1) and
//! forward marching on the stable (M₊ < 1) or center-stable (M₊ = 1)
//! manifold.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::integrate::{integrate, Options, Trajectory};
use crate::stationary::field::StationaryField;
use crate::stationary::spectrum::SpectrumReport;

/// Absolute tolerance on `ũ(0) − u₋` and `ṽ(0) − u₋`.
pub const TOL_BC: f64 = 1e-8;

const NEWTON_BUDGET: usize = 60;
const BISECTION_BUDGET: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ShootingMethod {
    /// `δ = 0`: the far-field state itself.
    Trivial,
    /// Backward integration from a seed on the linear stable eigenspace.
    StableManifold,
    /// Forward integration from `x = 0` on the stable manifold with the
    /// unstable component removed by bisection, restarted segment by segment.
    StableMarching,
    /// As `StableMarching`, on the center-stable manifold of a sonic far field.
    CenterStable,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShootingParams {
    pub method: ShootingMethod,
    /// Seed amplitude along the stable eigenvector in the linear prediction
    /// (backward shooting), or `[ũ_x(0)]` (marching).
    pub amplitudes: Vec<f64>,
    pub shooting_length: f64,
    pub iterations: usize,
    pub restarts: usize,
    /// `max(|ũ(0) − u₋|, |ṽ(0) − u₋|)`.
    pub boundary_mismatch: f64,
}

struct Piece {
    traj: Trajectory<3>,
    lo: f64,
    hi: f64,
}

/// A solution of the stationary system on `[0, L]` assembled from one or
/// more integrator runs.
pub(crate) struct Orbit {
    pieces: Vec<Piece>,
}

impl Orbit {
    pub fn constant(length: f64) -> Self {
        let traj = Trajectory {
            segments: Vec::new(),
            x_end: length,
            y_end: [0.0; 3],
            stopped: false,
        };
        Self {
            pieces: vec![Piece {
                traj,
                lo: 0.0,
                hi: length,
            }],
        }
    }

    pub fn length(&self) -> f64 {
        self.pieces.last().map_or(0.0, |p| p.hi)
    }

    pub fn eval(&self, x: f64) -> Option<[f64; 3]> {
        let idx = self.pieces.partition_point(|p| p.hi < x);
        let piece = self.pieces.get(idx)?;
        if x < piece.lo {
            return None;
        }
        if piece.traj.segments.is_empty() {
            return Some(piece.traj.y_end);
        }
        piece.traj.eval(x)
    }
}

fn options_for(scale: f64) -> Options {
    let base = Options::default();
    Options {
        atol: base.rtol * 1e-3 * scale.max(f64::MIN_POSITIVE),
        ..base
    }
}

fn norm_inf(y: &[f64; 3]) -> f64 {
    y.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Real basis of the stable eigenspace, returned as `(value at 0, growth)`
/// pairs so that `b(x) = Re/Im(r e^{λx})`.
fn stable_basis(spec: &SpectrumReport) -> Vec<([Complex64; 3], Complex64, bool)> {
    let mut out = Vec::new();
    for i in spec.stable_indices() {
        let lambda = spec.eigenvalues[i];
        let r = spec.eigenvectors[i];
        if lambda.im == 0.0 {
            out.push((r, lambda, false));
        } else if lambda.im > 0.0 {
            out.push((r, lambda, false));
            out.push((r, lambda, true));
        }
    }
    out
}

fn basis_at(basis: &[([Complex64; 3], Complex64, bool)], x: f64) -> Vec<[f64; 3]> {
    basis
        .iter()
        .map(|(r, lambda, imag)| {
            let g = (lambda * x).exp();
            r.map(|c| {
                let z = c * g;
                if *imag {
                    z.im
                } else {
                    z.re
                }
            })
        })
        .collect()
}

fn combine(basis: &[[f64; 3]], t: &[f64]) -> [f64; 3] {
    let mut y = [0.0; 3];
    for (b, tk) in basis.iter().zip(t) {
        for i in 0..3 {
            y[i] += tk * b[i];
        }
    }
    y
}

/// Backward shooting on a one-dimensional stable manifold from `x = length`.
///
/// The seed is `t e^{λL} r`; in the linear approximation the orbit reaches
/// `t r` at the boundary, which gives the Newton starting point.
pub(crate) fn shoot_stable(
    field: &StationaryField,
    spec: &SpectrumReport,
    target: f64,
    length: f64,
) -> Result<(Orbit, ShootingParams)> {
    let basis = stable_basis(spec);
    let at_zero = basis_at(&basis, 0.0);
    let at_l = basis_at(&basis, length);

    let shoot = |t: &[f64]| -> Result<Trajectory<3>> {
        let seed = combine(&at_l, t);
        let opts = options_for(norm_inf(&seed));
        integrate(
            |x, y| field.rhs(x, y),
            length,
            seed,
            0.0,
            &opts,
            |_, _| false,
        )
    };

    match at_zero.len() {
        1 => shoot_one(&shoot, &at_zero, target, length),
        k => Err(Error::Structural(format!(
            "backward shooting needs a one-dimensional stable manifold, got {k}"
        ))),
    }
}

fn shoot_one<S>(
    shoot: &S,
    at_zero: &[[f64; 3]],
    target: f64,
    length: f64,
) -> Result<(Orbit, ShootingParams)>
where
    S: Fn(&[f64]) -> Result<Trajectory<3>>,
{
    let r = at_zero[0];
    let residual = |traj: &Trajectory<3>| traj.y_end[0] - target;
    let goal = (1e-12 * target.abs()).max(1e-15);
    let mut t = target / r[0];
    let mut traj = shoot(&[t])?;
    let mut f = residual(&traj);
    let mut iterations = 0;
    let mut stalled = false;

    while iterations < NEWTON_BUDGET && f.abs() > goal {
        iterations += 1;
        let h = 1e-7 * t.abs().max(1e-3 * target.abs());
        let df = (residual(&shoot(&[t + h])?) - f) / h;
        if df == 0.0 || !df.is_finite() {
            stalled = true;
            break;
        }
        let step = -f / df;
        let mut damping = 1.0;
        let mut improved = false;
        for _ in 0..12 {
            let trial = t + damping * step;
            if let Ok(tr) = shoot(&[trial]) {
                let ft = residual(&tr);
                if ft.abs() < f.abs() {
                    t = trial;
                    traj = tr;
                    f = ft;
                    improved = true;
                    break;
                }
            }
            damping *= 0.5;
        }
        if !improved {
            stalled = true;
            break;
        }
    }

    if stalled && f.abs() > TOL_BC {
        // bisection fallback on a bracket grown around the current amplitude
        let mut width = t.abs().max(target.abs() / r[0].abs()) * 0.5;
        let mut bracket = None;
        for _ in 0..40 {
            let (lo, hi) = (t - width, t + width);
            if let (Ok(tl), Ok(th)) = (shoot(&[lo]), shoot(&[hi])) {
                if residual(&tl).signum() != residual(&th).signum() {
                    bracket = Some((lo, hi, residual(&tl)));
                    break;
                }
            }
            width *= 2.0;
        }
        if let Some((mut lo, mut hi, flo)) = bracket {
            for _ in 0..BISECTION_BUDGET {
                iterations += 1;
                let mid = 0.5 * (lo + hi);
                if mid == lo || mid == hi {
                    break;
                }
                let tm = shoot(&[mid])?;
                let fm = residual(&tm);
                if fm.signum() == flo.signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
                t = mid;
                traj = tm;
                f = fm;
                if f.abs() <= goal {
                    break;
                }
            }
        }
    }

    let v_gap = traj.y_end[2] - target;
    let mismatch = f.abs().max(v_gap.abs());
    if f.abs() > TOL_BC {
        return Err(Error::NoProfile {
            reason: "root-find on the stable amplitude failed".into(),
            mismatch,
        });
    }
    if v_gap.abs() > TOL_BC {
        return Err(Error::NoProfile {
            reason: format!(
                "one-dimensional stable manifold reaches u(0) = u- with v(0) - u- = {v_gap:.3e}; the inflow data need both"
            ),
            mismatch,
        });
    }
    let params = ShootingParams {
        method: ShootingMethod::StableManifold,
        amplitudes: vec![t],
        shooting_length: length,
        iterations,
        restarts: 0,
        boundary_mismatch: mismatch,
    };
    Ok((
        Orbit {
            pieces: vec![Piece {
                traj,
                lo: 0.0,
                hi: length,
            }],
        },
        params,
    ))
}

struct Trial {
    sign: f64,
    escape: Option<f64>,
    traj: Trajectory<3>,
}

/// Forward marching on the stable (subsonic) or center-stable (sonic)
/// manifold.
///
/// The single unstable component is removed by bisection on `ũ_x(0)`. The
/// orbit is trusted until its unstable component would exceed `e^{-14}` of
/// the starting size (at most `12/λ₁`), then the unstable component is removed
/// again by bisection on a kick along `r₁`.
pub(crate) fn march_forward(
    field: &StationaryField,
    spec: &SpectrumReport,
    target: f64,
    length: f64,
    sonic: bool,
) -> Result<(Orbit, ShootingParams)> {
    let unstable = spec.unstable_indices();
    let iu = match unstable.as_slice() {
        [i] if spec.eigenvalues[*i].im == 0.0 => *i,
        _ => {
            return Err(Error::Structural(format!(
                "expected one real unstable eigenvalue, got {:?}",
                spec.eigenvalues
            )))
        }
    };
    let lambda_u = spec.eigenvalues[iu].re;
    let r_u = spec.eigenvectors[iu].map(|c| c.re);
    let l_u = spec.left_eigenvector(iu).map(|c| c.re);
    let dot = |a: &[f64; 3], b: &[f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];

    // linear prediction on the invariant plane with ū = v̄ = target
    let (plane, l_c) = if sonic {
        let ic = spec.center_index();
        let is = (0..3).find(|&i| i != iu && i != ic).unwrap();
        let plane = vec![
            spec.eigenvectors[ic].map(|c| c.re),
            spec.eigenvectors[is].map(|c| c.re),
        ];
        (plane, Some(spec.left_eigenvector(ic).map(|c| c.re)))
    } else {
        (basis_at(&stable_basis(spec), 0.0), None)
    };
    if plane.len() != 2 {
        return Err(Error::Structural(format!(
            "invariant plane has dimension {}",
            plane.len()
        )));
    }
    let (a, b) = (plane[0], plane[1]);
    let det = a[0] * b[2] - a[2] * b[0];
    if det.abs() < 1e-14 * norm_inf(&a) * norm_inf(&b) {
        return Err(Error::NoProfile {
            reason: "invariant plane is tangent to the boundary line".into(),
            mismatch: target.abs(),
        });
    }
    let ca = target * (b[2] - b[0]) / det;
    let cb = target * (a[0] - a[2]) / det;
    let w_pred = ca * a[1] + cb * b[1];
    if sonic && !(ca < 0.0) {
        return Err(Error::NoProfile {
            reason: format!("center amplitude z3(0) = {ca:.3e} is not negative; the orbit leaves the equilibrium"),
            mismatch: ca.abs(),
        });
    }

    let window = 40.0 / lambda_u;
    let run = |x0: f64, y0: [f64; 3]| -> Result<Trial> {
        let threshold = 0.1 * norm_inf(&y0);
        let opts = options_for(norm_inf(&y0));
        let traj = integrate(
            |x, y| field.rhs(x, y),
            x0,
            y0,
            x0 + window,
            &opts,
            |_, y| dot(&l_u, y).abs() > threshold,
        )?;
        let sign = dot(&l_u, &traj.y_end).signum();
        let escape = traj.stopped.then(|| traj.x_end - x0);
        Ok(Trial { sign, escape, traj })
    };

    let mut pieces: Vec<Piece> = Vec::new();
    let mut iterations = 0usize;

    let state0 = |w: f64| [target, w, target];
    let (trial, w0) = bisect(
        &|w| run(0.0, state0(w)),
        w_pred,
        target.abs(),
        &state0,
        &mut iterations,
    )?;
    let mut x_s = 0.0;
    let mut accepted = trial;

    loop {
        let step = match accepted.escape {
            Some(e) => (e - 14.0 / lambda_u).clamp(1.0 / lambda_u, 12.0 / lambda_u),
            None => 12.0 / lambda_u,
        };
        // the escaping component was 0.1·|y(x_s)| at the escape point and
        // grew like e^{λ₁x}; keep it below 1e-8 of the current size
        let size0 = norm_inf(&accepted.traj.eval(x_s).unwrap_or(accepted.traj.y_end));
        let escape = x_s + accepted.escape.unwrap_or(window);
        let hi = trusted_end(&accepted.traj, x_s, (x_s + step).min(length), |x, y| {
            0.1 * size0 * (lambda_u * (x - escape)).exp() <= 1e-8 * norm_inf(y)
        });
        let y_hi = accepted.traj.eval(hi).unwrap_or(accepted.traj.y_end);
        pieces.push(Piece {
            traj: accepted.traj,
            lo: x_s,
            hi,
        });
        if hi >= length {
            break;
        }
        if let Some(l_c) = &l_c {
            let zc = dot(l_c, &y_hi);
            if !(zc < 0.0) {
                return Err(Error::NoProfile {
                    reason: format!("center coordinate changed sign at x = {hi:.3e}"),
                    mismatch: zc.abs(),
                });
            }
        }
        x_s = hi;
        let kick = |c: f64| {
            [
                y_hi[0] + c * r_u[0],
                y_hi[1] + c * r_u[1],
                y_hi[2] + c * r_u[2],
            ]
        };
        let (next, _) = bisect(
            &|c| run(x_s, kick(c)),
            0.0,
            1e-9 * norm_inf(&y_hi),
            &kick,
            &mut iterations,
        )?;
        accepted = next;
    }

    let params = ShootingParams {
        method: if sonic {
            ShootingMethod::CenterStable
        } else {
            ShootingMethod::StableMarching
        },
        amplitudes: vec![w0],
        shooting_length: length,
        iterations,
        restarts: pieces.len() - 1,
        boundary_mismatch: 0.0,
    };
    Ok((Orbit { pieces }, params))
}

/// Last of 64 sample points in `(lo, hi]` up to which `ok` holds, never less
/// than the first sample. Fast stable decay shrinks the orbit below the
/// unstable component long before that component reaches its escape size.
fn trusted_end(traj: &Trajectory<3>, lo: f64, hi: f64, ok: impl Fn(f64, &[f64; 3]) -> bool) -> f64 {
    const SAMPLES: usize = 64;
    let at = |k: usize| lo + (hi - lo) * k as f64 / SAMPLES as f64;
    for k in 1..=SAMPLES {
        match traj.eval(at(k)) {
            Some(y) if ok(at(k), &y) => {}
            _ => return at((k - 1).max(1)),
        }
    }
    hi
}

/// Bisection on a scalar parameter for the sign of the escaping unstable
/// component. Returns the surviving trial that escapes latest.
fn bisect<R, St>(
    run: &R,
    center: f64,
    scale: f64,
    state: &St,
    iterations: &mut usize,
) -> Result<(Trial, f64)>
where
    R: Fn(f64) -> Result<Trial>,
    St: Fn(f64) -> [f64; 3],
{
    let mut half = scale.max(f64::MIN_POSITIVE);
    let mut bracket = None;
    for _ in 0..60 {
        let (lo, hi) = (center - half, center + half);
        let tl = run(lo)?;
        let th = run(hi)?;
        if tl.sign != th.sign {
            bracket = Some((lo, tl, hi, th));
            break;
        }
        half *= 4.0;
    }
    let (mut lo, mut tl, mut hi, mut th) = bracket.ok_or_else(|| Error::NoProfile {
        reason: "could not bracket the center-stable manifold".into(),
        mismatch: f64::NAN,
    })?;
    for _ in 0..BISECTION_BUDGET {
        let mid = 0.5 * (lo + hi);
        let (sl, sh) = (state(lo), state(hi));
        let gap = (0..3).fold(0.0f64, |m, i| m.max((sl[i] - sh[i]).abs()));
        if mid == lo || mid == hi || gap <= 1e-15 * norm_inf(&sl) {
            break;
        }
        *iterations += 1;
        let tm = run(mid)?;
        if tm.sign == tl.sign {
            lo = mid;
            tl = tm;
        } else {
            hi = mid;
            th = tm;
        }
    }
    let reach = |t: &Trial| t.escape.unwrap_or(f64::INFINITY);
    Ok(if reach(&tl) >= reach(&th) {
        (tl, lo)
    } else {
        (th, hi)
    })
}
