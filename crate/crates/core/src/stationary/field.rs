//! Right-hand side of the reduced stationary system.
//!
//! With the fluxes `ρ̃ũ = ρ₊u₊`, `ñṽ = n₊u₊` eliminated and the summed momentum
//! equation integrated once from the far field, the stationary problem becomes
//!
//! ```text
//! ũ_x = w
//! μ w_x = ρ₊u₊ w − γA₁(ρ₊u₊)^γ ũ^{−γ−1} w − n₊u₊ (ṽ − ũ)/ṽ
//! ṽ_x = ṽ/(n₊u₊) [ρ₊u₊(ũ−u₊) + p₁(ρ̃) − p₁(ρ₊) + n₊u₊(ṽ−u₊) + p₂(ñ) − p₂(n₊) − μw]
//! ```
//!
//! The state is carried as deviations `(ũ − u₊, w, ṽ − u₊)` and the pressure
//! differences are formed with `expm1`/`ln_1p`, so seeds many orders of
//! magnitude below `u₊` keep full relative precision.

use crate::error::{Error, Result};
use crate::model::{FarFieldData, ModelParams};

#[derive(Debug, Clone, Copy)]
pub struct StationaryField {
    u_plus: f64,
    rho_plus: f64,
    n_plus: f64,
    rho_flux: f64,
    n_flux: f64,
    mu: f64,
    a1: f64,
    a2: f64,
    gamma: f64,
    alpha: f64,
}

impl StationaryField {
    pub fn new(params: &ModelParams, far: &FarFieldData) -> Self {
        Self {
            u_plus: far.u_plus(),
            rho_plus: far.rho_plus(),
            n_plus: far.n_plus(),
            rho_flux: far.rho_plus() * far.u_plus(),
            n_flux: far.n_plus() * far.u_plus(),
            mu: params.mu(),
            a1: params.a1(),
            a2: params.a2(),
            gamma: params.gamma(),
            alpha: params.alpha(),
        }
    }

    pub fn u_plus(&self) -> f64 {
        self.u_plus
    }

    /// `(ρ̃, ñ)` from the flux relations.
    pub fn densities(&self, u: f64, v: f64) -> (f64, f64) {
        (self.rho_flux / u, self.n_flux / v)
    }

    /// `p₁(ρ̃) − p₁(ρ₊)` in terms of the velocity deviation.
    fn dp1(&self, ubar: f64) -> f64 {
        self.a1
            * self.rho_plus.powf(self.gamma)
            * (-self.gamma * (ubar / self.u_plus).ln_1p()).exp_m1()
    }

    fn dp2(&self, vbar: f64) -> f64 {
        self.a2
            * self.n_plus.powf(self.alpha)
            * (-self.alpha * (vbar / self.u_plus).ln_1p()).exp_m1()
    }

    pub fn rhs(&self, x: f64, y: &[f64; 3]) -> Result<[f64; 3]> {
        let [ubar, w, vbar] = *y;
        let u = self.u_plus + ubar;
        let v = self.u_plus + vbar;
        if !(u > 0.0 && v > 0.0) {
            return Err(Error::BlowUp {
                x,
                reason: format!("nonpositive velocity (u = {u}, v = {v})"),
            });
        }
        let stiffness =
            self.gamma * self.a1 * self.rho_flux.powf(self.gamma) * u.powf(-self.gamma - 1.0);
        let wx = ((self.rho_flux - stiffness) * w - self.n_flux * (vbar - ubar) / v) / self.mu;
        let bracket = self.rho_flux * ubar + self.dp1(ubar) + self.n_flux * vbar + self.dp2(vbar)
            - self.mu * w;
        let vx = v / self.n_flux * bracket;
        Ok([w, wx, vx])
    }
}
