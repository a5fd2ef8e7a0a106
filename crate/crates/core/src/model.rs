//! Constitutive parameters, pressure laws and far-field algebra.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance on `|M₊ − 1|` below which a far field counts as sonic.
pub const TOL_SONIC: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Phase {
    /// The viscous phase with density ρ and velocity u.
    One,
    /// The phase with density n and velocity v.
    Two,
}

/// The five constants `A1, A2, γ, α, μ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParams {
    a1: f64,
    a2: f64,
    gamma: f64,
    alpha: f64,
    mu: f64,
}

impl ModelParams {
    pub fn new(a1: f64, a2: f64, gamma: f64, alpha: f64, mu: f64) -> Result<Self> {
        let finite = [a1, a2, gamma, alpha, mu].iter().all(|v| v.is_finite());
        if !finite {
            return Err(Error::Domain("model parameters must be finite".into()));
        }
        if a1 <= 0.0 || a2 <= 0.0 {
            return Err(Error::Domain(format!(
                "pressure coefficients must be positive (A1 = {a1}, A2 = {a2})"
            )));
        }
        if mu <= 0.0 {
            return Err(Error::Domain(format!(
                "viscosity must be positive (mu = {mu})"
            )));
        }
        if gamma < 1.0 || alpha < 1.0 {
            return Err(Error::Domain(format!(
                "adiabatic exponents must be >= 1 (gamma = {gamma}, alpha = {alpha})"
            )));
        }
        Ok(Self {
            a1,
            a2,
            gamma,
            alpha,
            mu,
        })
    }

    pub fn a1(&self) -> f64 {
        self.a1
    }
    pub fn a2(&self) -> f64 {
        self.a2
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Coefficient and exponent of the pressure law of `phase`.
    pub fn law(&self, phase: Phase) -> (f64, f64) {
        match phase {
            Phase::One => (self.a1, self.gamma),
            Phase::Two => (self.a2, self.alpha),
        }
    }

    /// Copy with `A1` replaced; used to build sonic far fields.
    pub fn with_a1(&self, a1: f64) -> Result<Self> {
        Self::new(a1, self.a2, self.gamma, self.alpha, self.mu)
    }

    /// Value of `A1` that makes the far field `(ρ₊, n₊, u₊)` exactly sonic,
    /// i.e. the solution of `u₊ = c₊` for `A1` with the other constants fixed.
    pub fn sonic_a1(&self, rho_plus: f64, n_plus: f64, u_plus: f64) -> Result<f64> {
        let rest =
            (rho_plus + n_plus) * u_plus * u_plus - self.a2 * self.alpha * n_plus.powf(self.alpha);
        let a1 = rest / (self.gamma * rho_plus.powf(self.gamma));
        if a1 > 0.0 {
            Ok(a1)
        } else {
            Err(Error::Domain(format!(
                "no positive A1 makes u+ = {u_plus} sonic (phase 2 alone exceeds the mixture momentum)"
            )))
        }
    }
}

fn check_density(density: f64) -> Result<()> {
    if density > 0.0 && density.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "density must be positive, got {density}"
        )))
    }
}

/// `A ρ^γ` for phase 1, `A2 n^α` for phase 2.
pub fn pressure(params: &ModelParams, phase: Phase, density: f64) -> Result<f64> {
    check_density(density)?;
    let (a, e) = params.law(phase);
    Ok(a * density.powf(e))
}

/// `A e density^(e − 1)`.
pub fn pressure_derivative(params: &ModelParams, phase: Phase, density: f64) -> Result<f64> {
    check_density(density)?;
    let (a, e) = params.law(phase);
    Ok(a * e * density.powf(e - 1.0))
}

/// Mixture sound speed `c₊ = ((A1γρ₊^γ + A2αn₊^α)/(ρ₊ + n₊))^{1/2}`.
pub fn sound_speed(params: &ModelParams, rho_plus: f64, n_plus: f64) -> Result<f64> {
    check_density(rho_plus)?;
    check_density(n_plus)?;
    let num = params.a1 * params.gamma * rho_plus.powf(params.gamma)
        + params.a2 * params.alpha * n_plus.powf(params.alpha);
    Ok((num / (rho_plus + n_plus)).sqrt())
}

/// Boundary and far-field states linked by flux compatibility
/// `ρ₋u₋ = ρ₊u₊`, `n₋u₋ = n₊u₊`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FarFieldData {
    rho_plus: f64,
    n_plus: f64,
    u_plus: f64,
    rho_minus: f64,
    n_minus: f64,
    u_minus: f64,
    delta: f64,
}

impl FarFieldData {
    pub fn rho_plus(&self) -> f64 {
        self.rho_plus
    }
    pub fn n_plus(&self) -> f64 {
        self.n_plus
    }
    pub fn u_plus(&self) -> f64 {
        self.u_plus
    }
    pub fn rho_minus(&self) -> f64 {
        self.rho_minus
    }
    pub fn n_minus(&self) -> f64 {
        self.n_minus
    }
    pub fn u_minus(&self) -> f64 {
        self.u_minus
    }
    /// `|u₊ − u₋|`.
    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Boundary state from a prescribed far field and inflow velocity.
    pub fn from_far_state(rho_plus: f64, n_plus: f64, u_plus: f64, u_minus: f64) -> Result<Self> {
        for (name, v) in [
            ("rho_plus", rho_plus),
            ("n_plus", n_plus),
            ("u_plus", u_plus),
            ("u_minus", u_minus),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Domain(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(Self {
            rho_plus,
            n_plus,
            u_plus,
            rho_minus: rho_plus * u_plus / u_minus,
            n_minus: n_plus * u_plus / u_minus,
            u_minus,
            delta: (u_plus - u_minus).abs(),
        })
    }

    /// Same far field, different inflow velocity.
    pub fn with_u_minus(&self, u_minus: f64) -> Result<Self> {
        Self::from_far_state(self.rho_plus, self.n_plus, self.u_plus, u_minus)
    }
}

/// Far field from boundary data: `ρ₊ = ρ₋u₋/u₊`, `n₊ = n₋u₋/u₊`.
pub fn complete_far_field(
    _params: &ModelParams,
    rho_minus: f64,
    n_minus: f64,
    u_minus: f64,
    u_plus: f64,
) -> Result<FarFieldData> {
    for (name, v) in [
        ("rho_minus", rho_minus),
        ("n_minus", n_minus),
        ("u_minus", u_minus),
        ("u_plus", u_plus),
    ] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::Domain(format!("{name} must be positive, got {v}")));
        }
    }
    Ok(FarFieldData {
        rho_plus: rho_minus * u_minus / u_plus,
        n_plus: n_minus * u_minus / u_plus,
        u_plus,
        rho_minus,
        n_minus,
        u_minus,
        delta: (u_plus - u_minus).abs(),
    })
}

/// `M₊ = |u₊| / c₊`.
pub fn mach_number(params: &ModelParams, far: &FarFieldData) -> f64 {
    // far is validated at construction, so the densities are positive.
    far.u_plus.abs() / sound_speed(params, far.rho_plus, far.n_plus).expect("validated far field")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    Supersonic,
    Subsonic,
    Sonic,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Regime::Supersonic => "Supersonic",
            Regime::Subsonic => "Subsonic",
            Regime::Sonic => "Sonic",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "supersonic" => Ok(Regime::Supersonic),
            "subsonic" => Ok(Regime::Subsonic),
            "sonic" => Ok(Regime::Sonic),
            other => Err(Error::Config(format!("unknown regime label '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeLabel {
    pub tag: Regime,
    pub mach: f64,
}

impl RegimeLabel {
    pub fn classify(mach: f64) -> Self {
        let tag = if (mach - 1.0).abs() <= TOL_SONIC {
            Regime::Sonic
        } else if mach > 1.0 {
            Regime::Supersonic
        } else {
            Regime::Subsonic
        };
        Self { tag, mach }
    }
}

pub fn classify(params: &ModelParams, far: &FarFieldData) -> RegimeLabel {
    RegimeLabel::classify(mach_number(params, far))
}

/// Right side minus left side of the sonic stability hypothesis
///
/// ```text
/// |p1'(ρ₊) − p2'(n₊)| ≤ √2 u₊ min{(1 + ρ₊/n₊)[(γ−1)p1'(ρ₊)]^{1/2}, (1 + n₊/ρ₊)[(α−1)p2'(n₊)]^{1/2}}
/// ```
///
/// Nonnegative means the hypothesis holds. With γ = 1 or α = 1 the minimum is
/// zero and only identical pressure slopes pass.
pub fn sonic_stability_margin(params: &ModelParams, far: &FarFieldData) -> f64 {
    let (rp, np, up) = (far.rho_plus, far.n_plus, far.u_plus);
    let dp1 = params.a1 * params.gamma * rp.powf(params.gamma - 1.0);
    let dp2 = params.a2 * params.alpha * np.powf(params.alpha - 1.0);
    let lhs = (dp1 - dp2).abs();
    let first = (1.0 + rp / np) * ((params.gamma - 1.0) * dp1).sqrt();
    let second = (1.0 + np / rp) * ((params.alpha - 1.0) * dp2).sqrt();
    let rhs = std::f64::consts::SQRT_2 * up * first.min(second);
    rhs - lhs
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(a1: f64, a2: f64, g: f64, al: f64, mu: f64) -> ModelParams {
        ModelParams::new(a1, a2, g, al, mu).unwrap()
    }

    #[test]
    fn pressure_examples() {
        assert_eq!(
            pressure(&params(1.0, 1.0, 1.0, 1.0, 1.0), Phase::One, 3.0).unwrap(),
            3.0
        );
        assert_eq!(
            pressure(&params(1.0, 1.0, 2.0, 1.0, 1.0), Phase::One, 1.0).unwrap(),
            1.0
        );
        let p = pressure(&params(1.0, 0.5, 1.0, 2.0, 1.0), Phase::Two, 2.0).unwrap();
        assert!((p - 2.0).abs() < 1e-15);
    }

    #[test]
    fn pressure_derivative_examples() {
        let p = params(1.0, 1.0, 1.0, 3.0, 1.0);
        assert_eq!(pressure_derivative(&p, Phase::One, 7.0).unwrap(), 1.0);
        assert_eq!(
            pressure_derivative(&params(2.0, 1.0, 2.0, 1.0, 1.0), Phase::One, 1.0).unwrap(),
            4.0
        );
        assert!((pressure_derivative(&p, Phase::Two, 2.0).unwrap() - 12.0).abs() < 1e-12);
    }

    #[test]
    fn nonpositive_density_is_a_domain_error() {
        let p = params(1.0, 1.0, 1.4, 1.0, 1.0);
        assert!(matches!(
            pressure(&p, Phase::One, 0.0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            pressure_derivative(&p, Phase::Two, -1.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(ModelParams::new(0.0, 1.0, 1.0, 1.0, 1.0).is_err());
        assert!(ModelParams::new(1.0, 1.0, 0.9, 1.0, 1.0).is_err());
        assert!(ModelParams::new(1.0, 1.0, 1.0, 1.0, 0.0).is_err());
        assert!(ModelParams::new(1.0, f64::NAN, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn sound_speed_examples() {
        assert!(
            (sound_speed(&params(1.0, 1.0, 1.0, 1.0, 1.0), 0.3, 7.0).unwrap() - 1.0).abs() < 1e-15
        );
        let c = sound_speed(&params(2.0, 2.0, 1.0, 1.0, 1.0), 2.5, 0.1).unwrap();
        assert!((c - 2f64.sqrt()).abs() < 1e-15);
        let c = sound_speed(&params(1.0, 0.5, 1.4, 2.0, 1.0), 1.0, 2.0).unwrap();
        assert!((c - (5.4f64 / 3.0).sqrt()).abs() < 1e-14);
        assert!((c - 1.341641).abs() < 1e-6);
    }

    #[test]
    fn mach_examples() {
        let p = params(1.0, 1.0, 1.0, 1.0, 1.0);
        let far = FarFieldData::from_far_state(1.0, 1.0, 2.0, 1.9).unwrap();
        assert!((mach_number(&p, &far) - 2.0).abs() < 1e-15);

        let p = params(1.0, 0.5, 1.4, 2.0, 1.0);
        let far = FarFieldData::from_far_state(1.0, 2.0, 1.0, 1.0).unwrap();
        assert!((mach_number(&p, &far) - 0.745356).abs() < 1e-6);

        // u+ = c+ by construction
        let c = sound_speed(&p, 1.0, 2.0).unwrap();
        let far = FarFieldData::from_far_state(1.0, 2.0, c, c).unwrap();
        assert!((mach_number(&p, &far) - 1.0).abs() < 1e-15);
        assert_eq!(classify(&p, &far).tag, Regime::Sonic);
    }

    #[test]
    fn far_field_completion_examples() {
        let p = params(1.0, 1.0, 1.0, 1.0, 1.0);
        let f = complete_far_field(&p, 2.0, 4.0, 1.0, 1.0).unwrap();
        assert_eq!((f.rho_plus(), f.n_plus(), f.delta()), (2.0, 4.0, 0.0));
        let f = complete_far_field(&p, 2.0, 4.0, 1.0, 2.0).unwrap();
        assert_eq!((f.rho_plus(), f.n_plus(), f.delta()), (1.0, 2.0, 1.0));
        let f = complete_far_field(&p, 1.0, 1.0, 3.0, 1.0).unwrap();
        assert_eq!((f.rho_plus(), f.n_plus(), f.delta()), (3.0, 3.0, 2.0));
        assert!(complete_far_field(&p, 1.0, -1.0, 3.0, 1.0).is_err());
    }

    #[test]
    fn sonic_margin_examples() {
        let far = FarFieldData::from_far_state(1.0, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(
            sonic_stability_margin(&params(1.0, 1.0, 1.0, 1.0, 1.0), &far),
            0.0
        );
        assert_eq!(
            sonic_stability_margin(&params(1.0, 2.0, 1.0, 1.0, 1.0), &far),
            -1.0
        );
        let m = sonic_stability_margin(&params(1.0, 1.0, 2.0, 2.0, 1.0), &far);
        assert!((m - 4.0).abs() < 1e-14);
    }

    #[test]
    fn sonic_a1_solves_u_equals_c() {
        let p = params(1.0, 1.0, 2.0, 1.0, 1.0);
        let a1 = p.sonic_a1(1.0, 1.0, 1.0).unwrap();
        assert!((a1 - 0.5).abs() < 1e-15);
        let p = p.with_a1(a1).unwrap();
        let far = FarFieldData::from_far_state(1.0, 1.0, 1.0, 0.999).unwrap();
        assert_eq!(classify(&p, &far).tag, Regime::Sonic);
    }

    #[test]
    fn regime_label_tolerance() {
        assert_eq!(RegimeLabel::classify(1.0 + 5e-10).tag, Regime::Sonic);
        assert_eq!(RegimeLabel::classify(1.0 + 5e-9).tag, Regime::Supersonic);
        assert_eq!(RegimeLabel::classify(0.9).tag, Regime::Subsonic);
    }
}
