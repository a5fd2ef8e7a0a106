//! One time step of the discretized system.
//!
//! Strang splitting `D(Δt/2) A(Δt) D(Δt/2)`:
//!
//! * `A` — transport, pressure and drag, integrated with the three-stage SSP
//!   Runge–Kutta method. Continuity fluxes are second-order upwind at cell
//!   faces (velocities are positive for the inflow problem), momentum fluxes
//!   central with fourth-difference dissipation.
//! * `D` — viscosity, `ρu_t = μu_xx` and `nv_t = (nv_x)_x` with densities
//!   frozen, integrated with the L-stable two-stage SDIRK method.
//!
//! The viscous terms of the stationary profile are removed from `D` and
//! added to `A` as a fixed momentum source. Both substeps then leave the
//! profile in place up to its own discretization residual; without this the
//! splitting error of the stiff viscous step leaves an `O(Δt)` layer next to
//! the inflow node.
//!
//! Node 0 carries the inflow data. A ghost node beyond the last node holds
//! the last node plus a fixed offset, normally the increment of the
//! stationary profile over one cell, so that the perturbation (not the state)
//! has zero slope at the far end.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ModelParams, Phase};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SchemeOptions {
    /// Safety factor applied to both the advective and the drag limit.
    pub cfl: f64,
    /// Multiplier of the drag term `n(v − u)`; zero decouples the phases.
    pub drag_scale: f64,
    /// Coefficient of the fourth-difference momentum dissipation.
    pub dissipation: f64,
    /// How often a step may be halved after losing positivity.
    pub max_halvings: usize,
}

impl Default for SchemeOptions {
    fn default() -> Self {
        Self {
            cfl: 0.4,
            drag_scale: 1.0,
            dissipation: 1.0 / 64.0,
            max_halvings: 8,
        }
    }
}

/// Conserved variables `(ρ, ρu, n, nv)`.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Conserved {
    pub rho: Vec<f64>,
    pub m: Vec<f64>,
    pub n: Vec<f64>,
    pub q: Vec<f64>,
}

impl Conserved {
    pub fn from_primitive(rho: &[f64], u: &[f64], n: &[f64], v: &[f64]) -> Self {
        Self {
            rho: rho.to_vec(),
            m: rho.iter().zip(u).map(|(a, b)| a * b).collect(),
            n: n.to_vec(),
            q: n.iter().zip(v).map(|(a, b)| a * b).collect(),
        }
    }

    fn zeros(len: usize) -> Self {
        Self {
            rho: vec![0.0; len],
            m: vec![0.0; len],
            n: vec![0.0; len],
            q: vec![0.0; len],
        }
    }

    pub fn velocities(&self) -> (Vec<f64>, Vec<f64>) {
        (
            self.m.iter().zip(&self.rho).map(|(a, b)| a / b).collect(),
            self.q.iter().zip(&self.n).map(|(a, b)| a / b).collect(),
        )
    }

    fn len(&self) -> usize {
        self.rho.len()
    }

    /// `self ← a·base + b·(self + dt·rhs)` on nodes `1..`; returns whether
    /// both densities stayed positive and every value finite.
    fn stage(&mut self, a: f64, base: &Conserved, b: f64, rhs: &Conserved, dt: f64) -> bool {
        let mut positive = true;
        let mut acc = 0.0;
        for i in 1..self.len() {
            let rho = a * base.rho[i] + b * (self.rho[i] + dt * rhs.rho[i]);
            let m = a * base.m[i] + b * (self.m[i] + dt * rhs.m[i]);
            let n = a * base.n[i] + b * (self.n[i] + dt * rhs.n[i]);
            let q = a * base.q[i] + b * (self.q[i] + dt * rhs.q[i]);
            positive &= rho > 0.0 && n > 0.0;
            acc += m + q;
            self.rho[i] = rho;
            self.m[i] = m;
            self.n[i] = n;
            self.q[i] = q;
        }
        positive && acc.is_finite()
    }

    fn check(&self, t: f64) -> Result<()> {
        for i in 0..self.len() {
            let vals = [self.rho[i], self.m[i], self.n[i], self.q[i]];
            if vals.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite {
                    t,
                    dump: format!(
                        "node {i}: rho={}, m={}, n={}, q={}",
                        vals[0], vals[1], vals[2], vals[3]
                    ),
                });
            }
            if !(self.rho[i] > 0.0 && self.n[i] > 0.0) {
                return Err(Error::StepFailure {
                    t,
                    reason: format!(
                        "density lost positivity at node {i} (rho={}, n={})",
                        self.rho[i], self.n[i]
                    ),
                });
            }
        }
        Ok(())
    }
}

/// Grid spacing, the ghost offset `(Δρ, Δu, Δn, Δv)` at the far end and the
/// profile's viscous terms `[(ũ_x)_x, (ñṽ_x)_x]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Mesh<'a> {
    pub dx: f64,
    pub ghost: [f64; 4],
    pub balance: Option<&'a [Vec<f64>; 2]>,
}

/// Face fluxes of both continuity equations at the inflow face (between
/// nodes 0 and 1) and the outflow face (right of the last node).
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct BoundaryFluxes {
    pub inflow: [f64; 2],
    pub outflow: [f64; 2],
}

/// `x^e` with exact fast paths for the common integer exponents.
#[inline]
fn pow(x: f64, e: f64) -> f64 {
    if e == 1.0 {
        x
    } else if e == 2.0 {
        x * x
    } else if e == 0.0 {
        1.0
    } else {
        x.powf(e)
    }
}

/// Velocities and momentum fluxes `ρu² + p₁`, `nv² + p₂`, reused between the
/// two passes of [`hyperbolic_rhs`].
struct Fluxes {
    u: Vec<f64>,
    v: Vec<f64>,
    g1: Vec<f64>,
    g2: Vec<f64>,
}

impl Fluxes {
    fn new(len: usize) -> Self {
        Self {
            u: vec![0.0; len],
            v: vec![0.0; len],
            g1: vec![0.0; len],
            g2: vec![0.0; len],
        }
    }
}

/// Fills `out` with the transport, pressure and drag terms. `speed` scales
/// the fourth-difference dissipation; when absent it is taken as the largest
/// characteristic speed of `c` and returned.
fn hyperbolic_rhs(
    c: &Conserved,
    params: &ModelParams,
    opts: &SchemeOptions,
    mesh: &Mesh,
    speed: Option<f64>,
    work: &mut Fluxes,
    out: &mut Conserved,
) -> (BoundaryFluxes, f64) {
    let len = c.len();
    let (a1, g) = params.law(Phase::One);
    let (a2, al) = params.law(Phase::Two);
    let mut fastest = 0.0f64;
    for i in 0..len {
        let (rho, n) = (c.rho[i], c.n[i]);
        let u = c.m[i] / rho;
        let v = c.q[i] / n;
        let p1 = a1 * pow(rho, g);
        let p2 = a2 * pow(n, al);
        work.u[i] = u;
        work.v[i] = v;
        work.g1[i] = c.m[i] * u + p1;
        work.g2[i] = c.q[i] * v + p2;
        if speed.is_none() {
            fastest = fastest
                .max(u.abs() + (g * p1 / rho).sqrt())
                .max(v.abs() + (al * p2 / n).sqrt());
        }
    }
    let speed = speed.unwrap_or(fastest);
    let dx = mesh.dx;
    let k = opts.dissipation * speed / dx;
    let inv_dx = 1.0 / dx;
    let half_inv_dx = 0.5 / dx;
    let (m, q) = (&c.m, &c.q);
    let (g1, g2) = (&work.g1, &work.g2);
    let last = len - 1;
    let [d_rho, d_u, d_n, d_v] = mesh.ghost;
    let (rho_g, n_g) = (c.rho[last] + d_rho, c.n[last] + d_n);
    let (u_g, v_g) = (work.u[last] + d_u, work.v[last] + d_v);
    let ghost1 = rho_g * u_g * u_g + a1 * pow(rho_g, g);
    let ghost2 = n_g * v_g * v_g + a2 * pow(n_g, al);

    let mut left1 = 0.5 * (m[0] + m[1]);
    let mut left2 = 0.5 * (q[0] + q[1]);
    let inflow = [left1, left2];
    for i in 1..len {
        let right1 = 1.5 * m[i] - 0.5 * m[i - 1];
        let right2 = 1.5 * q[i] - 0.5 * q[i - 1];
        out.rho[i] = -(right1 - left1) * inv_dx;
        out.n[i] = -(right2 - left2) * inv_dx;
        left1 = right1;
        left2 = right2;

        let (next1, next2) = if i < last {
            (g1[i + 1], g2[i + 1])
        } else {
            (ghost1, ghost2)
        };
        let drag = opts.drag_scale * c.n[i] * (work.v[i] - work.u[i]);
        let mut dm = -(next1 - g1[i - 1]) * half_inv_dx + drag;
        let mut dq = -(next2 - g2[i - 1]) * half_inv_dx - drag;
        if i >= 2 && i + 2 <= last {
            dm -= k * (m[i + 2] - 4.0 * (m[i + 1] + m[i - 1]) + 6.0 * m[i] + m[i - 2]);
            dq -= k * (q[i + 2] - 4.0 * (q[i + 1] + q[i - 1]) + 6.0 * q[i] + q[i - 2]);
        }
        out.m[i] = dm;
        out.q[i] = dq;
    }
    (
        BoundaryFluxes {
            inflow,
            outflow: [left1, left2],
        },
        speed,
    )
}

/// LU factors of a tridiagonal matrix for repeated Thomas solves.
struct Tridiagonal {
    lower: Vec<f64>,
    /// Normalized super-diagonal `c'ᵢ`.
    upper: Vec<f64>,
    /// Reciprocal pivots.
    inv_pivot: Vec<f64>,
}

impl Tridiagonal {
    /// `lower[0]` and `upper[n−1]` are ignored.
    fn factor(lower: Vec<f64>, diag: &[f64], upper: &[f64]) -> Self {
        let n = diag.len();
        let mut cp = vec![0.0; n];
        let mut inv = vec![0.0; n];
        inv[0] = 1.0 / diag[0];
        cp[0] = upper[0] * inv[0];
        for i in 1..n {
            inv[i] = 1.0 / (diag[i] - lower[i] * cp[i - 1]);
            cp[i] = if i + 1 < n { upper[i] * inv[i] } else { 0.0 };
        }
        Self {
            lower,
            upper: cp,
            inv_pivot: inv,
        }
    }

    /// Overwrites `rhs` with the solution.
    fn solve_in_place(&self, rhs: &mut [f64]) {
        let n = rhs.len();
        rhs[0] *= self.inv_pivot[0];
        for i in 1..n {
            rhs[i] = (rhs[i] - self.lower[i] * rhs[i - 1]) * self.inv_pivot[i];
        }
        for i in (0..n - 1).rev() {
            rhs[i] -= self.upper[i] * rhs[i + 1];
        }
    }
}

#[cfg(test)]
fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Vec<f64> {
    let mut x = rhs.to_vec();
    Tridiagonal::factor(lower.to_vec(), diag, upper).solve_in_place(&mut x);
    x
}

const SDIRK_GAMMA: f64 = 1.0 - std::f64::consts::FRAC_1_SQRT_2;

/// `w_t = (1/ω)(κ w_x)_x` on nodes `1..`, Dirichlet at node 0 and a ghost
/// `w_last + jump` at the far end; `kappa_face(i)` is the coefficient between
/// nodes `i` and `i + 1`. Updates `w` in place.
///
/// Solved for the stage rates rather than the stage values, so a state with
/// zero discrete Laplacian is returned bit for bit.
fn diffuse(
    w: &mut [f64],
    weight: &[f64],
    kappa_face: impl Fn(usize) -> f64,
    jump: f64,
    source: Option<(&[f64], f64)>,
    dx: f64,
    h: f64,
) {
    let n = w.len() - 1;
    let mut kl = vec![0.0; n];
    let mut kr = vec![0.0; n];
    let mut kappa_left = kappa_face(0);
    for k in 0..n {
        let i = k + 1;
        let inv_w = 1.0 / weight[i] / (dx * dx);
        let kappa_right = if i < n { kappa_face(i) } else { 0.0 };
        kl[k] = kappa_left * inv_w;
        kr[k] = kappa_right * inv_w;
        kappa_left = kappa_right;
    }
    let gh = SDIRK_GAMMA * h;
    let lower: Vec<f64> = kl.iter().map(|k| -gh * k).collect();
    let upper: Vec<f64> = kr.iter().map(|k| -gh * k).collect();
    let diag: Vec<f64> = kl
        .iter()
        .zip(&kr)
        .map(|(a, b)| 1.0 + gh * (a + b))
        .collect();
    let lu = Tridiagonal::factor(lower, &diag, &upper);

    let div = viscous_divergence(w, kappa_face, jump, dx);
    let rate: Vec<f64> = (0..n)
        .map(|k| {
            let fixed = source.map_or(0.0, |(f, scale)| scale * f[k + 1]);
            (div[k + 1] - fixed) / weight[k + 1]
        })
        .collect();

    let mut k1 = rate.clone();
    lu.solve_in_place(&mut k1);
    // γhA·k1 = k1 − rate, so the second stage needs no extra product
    let carry = (1.0 - SDIRK_GAMMA) / SDIRK_GAMMA;
    let mut k2: Vec<f64> = rate
        .iter()
        .zip(&k1)
        .map(|(r, a)| r + carry * (a - r))
        .collect();
    lu.solve_in_place(&mut k2);
    for k in 0..n {
        w[k + 1] += h * ((1.0 - SDIRK_GAMMA) * k1[k] + SDIRK_GAMMA * k2[k]);
    }
}

/// `(κ w_x)_x` at nodes `1..` (zero at node 0), with the far ghost at
/// `w_last + jump`.
pub(crate) fn viscous_divergence(
    w: &[f64],
    kappa_face: impl Fn(usize) -> f64,
    jump: f64,
    dx: f64,
) -> Vec<f64> {
    let n = w.len() - 1;
    let mut out = vec![0.0; n + 1];
    let mut left = kappa_face(0) * (w[1] - w[0]);
    for i in 1..=n {
        let right = kappa_face(i) * if i < n { w[i + 1] - w[i] } else { jump };
        out[i] = (right - left) / (dx * dx);
        left = right;
    }
    out
}

/// Face coefficient of `(n v_x)_x`: the mean of the adjacent densities, the
/// last density on the ghost face.
pub(crate) fn density_face(n: &[f64]) -> impl Fn(usize) -> f64 + '_ {
    move |i| {
        if i + 1 < n.len() {
            0.5 * (n[i] + n[i + 1])
        } else {
            n[i]
        }
    }
}

fn viscous_half(c: &mut Conserved, mu: f64, mesh: &Mesh, h: f64) {
    let (mut u, mut v) = c.velocities();
    let len = c.len();
    let n = &c.n;
    let dx = mesh.dx;
    let bal = mesh.balance;
    diffuse(
        &mut u,
        &c.rho,
        |_| mu,
        mesh.ghost[1],
        bal.map(|b| (b[0].as_slice(), mu)),
        dx,
        h,
    );
    diffuse(
        &mut v,
        n,
        density_face(n),
        mesh.ghost[3],
        bal.map(|b| (b[1].as_slice(), 1.0)),
        dx,
        h,
    );
    for i in 1..len {
        c.m[i] = c.rho[i] * u[i];
        c.q[i] = c.n[i] * v[i];
    }
}

/// Largest step allowed by the advective and drag limits.
pub(crate) fn stable_dt(
    rho: &[f64],
    u: &[f64],
    n: &[f64],
    v: &[f64],
    params: &ModelParams,
    opts: &SchemeOptions,
    dx: f64,
) -> f64 {
    let (a1, g) = params.law(Phase::One);
    let (a2, al) = params.law(Phase::Two);
    let mut speed = 0.0f64;
    let mut drag = 0.0f64;
    for i in 0..rho.len() {
        let c1 = (a1 * g * pow(rho[i], g - 1.0)).sqrt();
        let c2 = (a2 * al * pow(n[i], al - 1.0)).sqrt();
        speed = speed.max(u[i].abs() + c1).max(v[i].abs() + c2);
        drag = drag.max(n[i] / rho[i]);
    }
    let diss = 1.0 + 16.0 * opts.dissipation;
    opts.cfl * (dx / (speed * diss)).min(1.0 / (1.0 + opts.drag_scale * drag))
}

/// One split step of length `dt`. Returns the new state and the boundary
/// mass fluxes integrated over the step.
fn add_balance(k: &mut Conserved, mu: f64, mesh: &Mesh) {
    if let Some([bu, bv]) = mesh.balance {
        for i in 1..k.len() {
            k.m[i] += mu * bu[i];
            k.q[i] += bv[i];
        }
    }
}

pub(crate) fn advance(
    c: &Conserved,
    params: &ModelParams,
    opts: &SchemeOptions,
    mesh: &Mesh,
    dt: f64,
    t: f64,
) -> Result<(Conserved, BoundaryFluxes)> {
    let len = c.len();
    let mut s = c.clone();
    viscous_half(&mut s, params.mu(), mesh, 0.5 * dt);
    s.check(t)?;

    let mut work = Fluxes::new(len);
    let mut k = Conserved::zeros(len);
    let mut stage = s.clone();
    let (f0, speed) = hyperbolic_rhs(&s, params, opts, mesh, None, &mut work, &mut k);
    add_balance(&mut k, params.mu(), mesh);
    if !stage.stage(0.0, &s, 1.0, &k, dt) {
        stage.check(t)?;
    }
    let (f1, _) = hyperbolic_rhs(&stage, params, opts, mesh, Some(speed), &mut work, &mut k);
    add_balance(&mut k, params.mu(), mesh);
    if !stage.stage(0.75, &s, 0.25, &k, dt) {
        stage.check(t)?;
    }
    let (f2, _) = hyperbolic_rhs(&stage, params, opts, mesh, Some(speed), &mut work, &mut k);
    add_balance(&mut k, params.mu(), mesh);
    if !stage.stage(1.0 / 3.0, &s, 2.0 / 3.0, &k, dt) {
        stage.check(t)?;
    }

    viscous_half(&mut stage, params.mu(), mesh, 0.5 * dt);
    stage.check(t + dt)?;

    let w = [dt / 6.0, dt / 6.0, 2.0 * dt / 3.0];
    let mut fluxes = BoundaryFluxes::default();
    for (wk, fk) in w.iter().zip([f0, f1, f2]) {
        for p in 0..2 {
            fluxes.inflow[p] += wk * fk.inflow[p];
            fluxes.outflow[p] += wk * fk.outflow[p];
        }
    }
    Ok((stage, fluxes))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tridiagonal_matches_dense_solution() {
        let lower = [0.0, -1.0, -1.0, -1.0];
        let diag = [4.0, 4.0, 4.0, 3.0];
        let upper = [-1.0, -1.0, -1.0, 0.0];
        let x = [1.0, -2.0, 0.5, 3.0];
        let rhs: Vec<f64> = (0..4)
            .map(|i| {
                diag[i] * x[i]
                    + if i > 0 { lower[i] * x[i - 1] } else { 0.0 }
                    + if i < 3 { upper[i] * x[i + 1] } else { 0.0 }
            })
            .collect();
        let sol = solve_tridiagonal(&lower, &diag, &upper, &rhs);
        for i in 0..4 {
            assert!((sol[i] - x[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn diffusion_preserves_constants_and_decays_modes() {
        let mut out = vec![2.0; 50];
        let ones = vec![1.0; 50];
        diffuse(&mut out, &ones, |_| 1.0, 0.0, None, 0.1, 0.3);
        assert!(out.iter().all(|v| *v == 2.0));

        // sin mode with zero Dirichlet data at node 0
        let dx = 0.01;
        let x: Vec<f64> = (0..201).map(|i| i as f64 * dx).collect();
        let k = std::f64::consts::PI / (2.0 * 2.0);
        let w: Vec<f64> = x.iter().map(|xi| (k * xi).sin()).collect();
        let ones = vec![1.0; w.len()];
        let h = 0.01;
        let mut out = w.clone();
        diffuse(&mut out, &ones, |_| 1.0, 0.0, None, dx, h);
        let expected = (-k * k * h).exp();
        assert!((out[100] / w[100] - expected).abs() < 1e-4);
    }
}
