#![allow(dead_code)]

use twophase_core::model::pressure;
use twophase_core::stationary::StationaryProfile;
use twophase_core::{ModelParams, Phase};

/// Fourth-order first and second differences, one-sided near the ends.
pub fn d1(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    (0..n)
        .map(|i| {
            let k = i.clamp(2, n - 3);
            let s = |o: isize| f[(k as isize + o) as usize];
            if k == i {
                (s(-2) - 8.0 * s(-1) + 8.0 * s(1) - s(2)) / (12.0 * h)
            } else {
                f64::NAN
            }
        })
        .collect()
}

pub fn d2(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    (0..n)
        .map(|i| {
            if i < 2 || i + 2 >= n {
                return f64::NAN;
            }
            (-f[i - 2] + 16.0 * f[i - 1] - 30.0 * f[i] + 16.0 * f[i + 1] - f[i + 2])
                / (12.0 * h * h)
        })
        .collect()
}

/// Worst defect of the two momentum equations and the integrated mixture
/// balance, each relative to the largest term it contains anywhere.
pub fn balance_residual(p: &ModelParams, prof: &StationaryProfile) -> f64 {
    let f = &prof.far;
    let (rp, np, up, mu) = (f.rho_plus(), f.n_plus(), f.u_plus(), p.mu());
    let h = prof.grid.dx();
    let (u, v, rho, n) = (&prof.u_t, &prof.v_t, &prof.rho_t, &prof.n_t);
    let p1: Vec<f64> = rho
        .iter()
        .map(|r| pressure(p, Phase::One, *r).unwrap())
        .collect();
    let p2: Vec<f64> = n
        .iter()
        .map(|r| pressure(p, Phase::Two, *r).unwrap())
        .collect();
    let (ux, vx, p1x, p2x, uxx) = (d1(u, h), d1(v, h), d1(&p1, h), d1(&p2, h), d2(u, h));
    let nvx: Vec<f64> = n.iter().zip(&vx).map(|(a, b)| a * b).collect();
    let nvx_x = d1(&nvx, h);
    let p1p = pressure(p, Phase::One, rp).unwrap();
    let p2p = pressure(p, Phase::Two, np).unwrap();

    let mut worst = [0.0f64; 3];
    let mut scale = [0.0f64; 3];
    for i in 4..u.len() - 4 {
        let drag = n[i] * (v[i] - u[i]);
        let eqs = [
            [rp * up * ux[i], p1x[i], -mu * uxx[i], -drag],
            [np * up * vx[i], p2x[i], -nvx_x[i], drag],
            [
                rp * up * (u[i] - up) + p1[i] - p1p,
                np * up * (v[i] - up) + p2[i] - p2p,
                -mu * ux[i],
                -nvx[i],
            ],
        ];
        for (k, terms) in eqs.iter().enumerate() {
            scale[k] = terms.iter().fold(scale[k], |m, t| m.max(t.abs()));
            worst[k] = worst[k].max(terms.iter().sum::<f64>().abs());
        }
    }
    (0..3).map(|k| worst[k] / scale[k]).fold(0.0, f64::max)
}
