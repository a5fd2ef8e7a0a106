//! Relative-entropy energy, dissipation and perturbation norms.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::derivative4;
use crate::model::{ModelParams, Phase};
use crate::stationary::StationaryProfile;

use super::{perturbation, EvolutionState, PerturbationState};

/// `G(t) = (e^{(γ−1)t} − 1)/(γ−1) + e^{−t} − 1`, with `t = ln(ρ/ρ̃)`.
fn entropy_kernel(gamma: f64, t: f64) -> f64 {
    if t.abs() < 0.1 {
        // Σ_{k≥2} t^k/k! [(γ−1)^{k−1} + (−1)^k]
        let g1 = gamma - 1.0;
        let mut sum = 0.0;
        let mut term = t; // t^k / k!
        let mut gpow = 1.0; // (γ−1)^{k−1}
        for k in 2..30 {
            term *= t / k as f64;
            gpow *= g1;
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            sum += term * (gpow + sign);
            // odd terms vanish exactly when γ = 2, so bound rather than test them
            if term.abs() * (gpow.abs() + 1.0) <= 1e-18 * sum.abs() {
                break;
            }
        }
        sum
    } else {
        let first = if gamma == 1.0 {
            t
        } else {
            ((gamma - 1.0) * t).exp_m1() / (gamma - 1.0)
        };
        first + (-t).exp_m1()
    }
}

/// `Φ = ρ ∫_{ρ̃}^{ρ} (p(s) − p(ρ̃))/s² ds` for `p(s) = A s^γ`.
pub fn relative_entropy(a: f64, gamma: f64, density: f64, reference: f64) -> f64 {
    let t = (density / reference).ln();
    density * a * reference.powf(gamma - 1.0) * entropy_kernel(gamma, t)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyReport {
    /// `∫ E₁ + E₂`, `E₁ = ρψ²/2 + Φ₁`, `E₂ = nψ̄²/2 + Φ₂`.
    pub e_total: f64,
    /// `∫ n(ψ̄ − ψ)² + μψ_x² + nψ̄_x²`.
    pub dissipation: f64,
    pub l2_norm: f64,
    pub h1_norm: f64,
    pub sup_norm: f64,
}

/// L², H¹ and sup norms of the perturbation; derivatives are 4th order.
pub fn perturbation_norms(p: &PerturbationState, dx: f64) -> (f64, f64, f64) {
    let fields = [&p.phi, &p.psi, &p.phi_bar, &p.psi_bar];
    let mut l2 = 0.0;
    let mut grad = 0.0;
    let mut sup = 0.0f64;
    for f in fields {
        let sq: Vec<f64> = f.iter().map(|v| v * v).collect();
        l2 += crate::grid::simpson(&sq, dx);
        let d = derivative4(f, dx);
        let dsq: Vec<f64> = d.iter().map(|v| v * v).collect();
        grad += crate::grid::simpson(&dsq, dx);
        sup = f.iter().fold(sup, |m, v| m.max(v.abs()));
    }
    (l2.sqrt(), (l2 + grad).sqrt(), sup)
}

pub fn energy(
    state: &EvolutionState,
    profile: &StationaryProfile,
    params: &ModelParams,
) -> Result<EnergyReport> {
    let p = perturbation(state, profile)?;
    let dx = state.grid.dx();
    let (a1, g) = params.law(Phase::One);
    let (a2, al) = params.law(Phase::Two);
    let len = state.grid.len();
    let mut density = Vec::with_capacity(len);
    for i in 0..len {
        let e1 = 0.5 * state.rho[i] * p.psi[i] * p.psi[i]
            + relative_entropy(a1, g, state.rho[i], profile.rho_t[i]);
        let e2 = 0.5 * state.n[i] * p.psi_bar[i] * p.psi_bar[i]
            + relative_entropy(a2, al, state.n[i], profile.n_t[i]);
        density.push(e1 + e2);
    }
    let psi_x = derivative4(&p.psi, dx);
    let psib_x = derivative4(&p.psi_bar, dx);
    let diss: Vec<f64> = (0..len)
        .map(|i| {
            let slip = p.psi_bar[i] - p.psi[i];
            state.n[i] * slip * slip
                + params.mu() * psi_x[i] * psi_x[i]
                + state.n[i] * psib_x[i] * psib_x[i]
        })
        .collect();
    let (l2, h1, sup) = perturbation_norms(&p, dx);
    Ok(EnergyReport {
        e_total: state.grid.integrate(&density),
        dissipation: state.grid.integrate(&diss),
        l2_norm: l2,
        h1_norm: h1,
        sup_norm: sup,
    })
}

/// Max defect of each equation of the perturbation system, evaluated at the
/// midpoint of two states with centered differences, relative to the largest
/// term in that equation.
///
/// The system is the one obtained by subtracting the stationary equations
/// from the evolution equations written in `(ρ, u, n, v)`; it is a consistency
/// check of the evolved solution, not part of the time stepping.
pub fn perturbation_defect(
    before: &EvolutionState,
    after: &EvolutionState,
    profile: &StationaryProfile,
    params: &ModelParams,
) -> Result<[f64; 4]> {
    if !before.grid.matches(&after.grid) {
        return Err(Error::Usage("states live on different grids".into()));
    }
    let dt = after.time - before.time;
    if !(dt > 0.0) {
        return Err(Error::Usage("states must be ordered in time".into()));
    }
    let p0 = perturbation(before, profile)?;
    let p1 = perturbation(after, profile)?;
    let dx = before.grid.dx();
    let len = before.grid.len();
    let mid = |a: &[f64], b: &[f64]| -> Vec<f64> {
        a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect()
    };
    let rate =
        |a: &[f64], b: &[f64]| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| (y - x) / dt).collect() };
    let d = |f: &[f64]| derivative4(f, dx);

    let (phi, psi, phib, psib) = (
        mid(&p0.phi, &p1.phi),
        mid(&p0.psi, &p1.psi),
        mid(&p0.phi_bar, &p1.phi_bar),
        mid(&p0.psi_bar, &p1.psi_bar),
    );
    let (phi_t, psi_t, phib_t, psib_t) = (
        rate(&p0.phi, &p1.phi),
        rate(&p0.psi, &p1.psi),
        rate(&p0.phi_bar, &p1.phi_bar),
        rate(&p0.psi_bar, &p1.psi_bar),
    );
    let rho: Vec<f64> = (0..len).map(|i| profile.rho_t[i] + phi[i]).collect();
    let n: Vec<f64> = (0..len).map(|i| profile.n_t[i] + phib[i]).collect();
    let u: Vec<f64> = (0..len).map(|i| profile.u_t[i] + psi[i]).collect();
    let v: Vec<f64> = (0..len).map(|i| profile.v_t[i] + psib[i]).collect();

    let (a1, g) = params.law(Phase::One);
    let (a2, al) = params.law(Phase::Two);
    let dp1 = |r: f64| a1 * g * r.powf(g - 1.0);
    let dp2 = |r: f64| a2 * al * r.powf(al - 1.0);
    let mu = params.mu();

    let (phi_x, psi_x, phib_x, psib_x) = (d(&phi), d(&psi), d(&phib), d(&psib));
    let psi_xx = d(&psi_x);
    let n_psib_x: Vec<f64> = (0..len).map(|i| n[i] * psib_x[i]).collect();
    let n_psib_xx = d(&n_psib_x);
    let rt_x = d(&profile.rho_t);
    let nt_x = d(&profile.n_t);
    let ut_x = &profile.u_x;
    let vt_x = &profile.v_x;
    let ut_xx = d(ut_x);
    let nvx: Vec<f64> = (0..len).map(|i| profile.n_t[i] * vt_x[i]).collect();
    let nvx_x = d(&nvx);
    let phib_vx: Vec<f64> = (0..len).map(|i| phib[i] * vt_x[i]).collect();
    let phib_vx_x = d(&phib_vx);

    let mut worst = [0.0f64; 4];
    let mut scale = [0.0f64; 4];
    // skip two nodes at each end where the one-sided stencils live
    for i in 2..len.saturating_sub(2) {
        let (rt, nt, ut, vt) = (
            profile.rho_t[i],
            profile.n_t[i],
            profile.u_t[i],
            profile.v_t[i],
        );
        let terms1 = [
            phi_t[i],
            u[i] * phi_x[i],
            rho[i] * psi_x[i],
            psi[i] * rt_x[i],
            phi[i] * ut_x[i],
        ];
        let f1 = -(-mu * (1.0 / rho[i] - 1.0 / rt) * ut_xx[i]
            + psi[i] * ut_x[i]
            + (dp1(rho[i]) / rho[i] - dp1(rt) / rt) * rt_x[i]
            - (n[i] / rho[i] - nt / rt) * (vt - ut));
        let terms2 = [
            psi_t[i],
            u[i] * psi_x[i],
            dp1(rho[i]) / rho[i] * phi_x[i],
            -mu * psi_xx[i] / rho[i],
            -n[i] * (psib[i] - psi[i]) / rho[i],
            -f1,
        ];
        let terms3 = [
            phib_t[i],
            v[i] * phib_x[i],
            n[i] * psib_x[i],
            psib[i] * nt_x[i],
            phib[i] * vt_x[i],
        ];
        let f2 = -(-(1.0 / n[i] - 1.0 / nt) * nvx_x[i] - phib_vx_x[i] / n[i]
            + psib[i] * vt_x[i]
            + (dp2(n[i]) / n[i] - dp2(nt) / nt) * nt_x[i]);
        let terms4 = [
            psib_t[i],
            v[i] * psib_x[i],
            dp2(n[i]) / n[i] * phib_x[i],
            -n_psib_xx[i] / n[i],
            psib[i] - psi[i],
            -f2,
        ];
        for (k, terms) in [&terms1[..], &terms2[..], &terms3[..], &terms4[..]]
            .iter()
            .enumerate()
        {
            let sum: f64 = terms.iter().sum();
            worst[k] = worst[k].max(sum.abs());
            scale[k] = terms.iter().fold(scale[k], |m, t| m.max(t.abs()));
        }
    }
    Ok([0, 1, 2, 3].map(|k| {
        if scale[k] > 0.0 {
            worst[k] / scale[k]
        } else {
            0.0
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quadrature(a: f64, gamma: f64, rho: f64, reference: f64) -> f64 {
        // composite Simpson with many panels as an independent reference
        let n = 20_000;
        let h = (rho - reference) / n as f64;
        let f = |s: f64| (a * s.powf(gamma) - a * reference.powf(gamma)) / (s * s);
        let mut sum = f(reference) + f(rho);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            sum += w * f(reference + i as f64 * h);
        }
        rho * sum * h / 3.0
    }

    #[test]
    fn relative_entropy_examples() {
        assert_eq!(relative_entropy(1.0, 1.4, 2.0, 2.0), 0.0);
        let e = std::f64::consts::E;
        assert!((relative_entropy(1.0, 1.0, e, 1.0) - 1.0).abs() < 1e-14);
        for (g, r, rt) in [
            (1.4, 1.3, 1.0),
            (2.0, 0.7, 1.1),
            (1.0, 1.0001, 1.0),
            (3.0, 0.999, 1.0),
        ] {
            let closed = relative_entropy(1.7, g, r, rt);
            let quad = quadrature(1.7, g, r, rt);
            assert!(
                (closed - quad).abs() <= 1e-10 * quad.abs().max(1e-300),
                "{g} {r} {rt}: {closed} {quad}"
            );
            assert!(closed > 0.0);
        }
    }

    #[test]
    fn series_and_closed_form_agree_at_switch() {
        for g in [1.0, 1.4, 2.0, 3.0] {
            let below = entropy_kernel(g, 0.0999999999);
            let first = if g == 1.0 {
                0.0999999999
            } else {
                ((g - 1.0) * 0.0999999999f64).exp_m1() / (g - 1.0)
            };
            let closed = first + (-0.0999999999f64).exp_m1();
            assert!((below - closed).abs() < 1e-14 * closed.abs());
        }
    }
}
