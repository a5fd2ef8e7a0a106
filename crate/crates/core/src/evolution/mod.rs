//! Time integration of the inflow problem around a stationary profile.

pub mod energy;
pub mod scheme;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::model::ModelParams;
use crate::stationary::StationaryProfile;

pub use energy::{energy, perturbation_defect, perturbation_norms, relative_entropy, EnergyReport};
pub use scheme::SchemeOptions;

use scheme::Conserved;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Component {
    Phi,
    Psi,
    PhiBar,
    PsiBar,
}

/// `amplitude · exp(−((x − center)/width)²)` added to one perturbation field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bump {
    pub component: Component,
    pub amplitude: f64,
    pub center: f64,
    pub width: f64,
}

impl Bump {
    pub fn eval(&self, x: f64) -> f64 {
        let s = (x - self.center) / self.width;
        self.amplitude * (-s * s).exp()
    }

    /// Exact H¹ norm on the whole line: `A² √(π/2) (w + 1/w)`.
    pub fn h1_norm(&self) -> f64 {
        let w = self.width;
        (self.amplitude * self.amplitude * (std::f64::consts::PI / 2.0).sqrt() * (w + 1.0 / w))
            .sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationSpec {
    #[serde(default)]
    pub bumps: Vec<Bump>,
    /// Rescale all amplitudes so the discrete H¹ norm equals this value.
    #[serde(default)]
    pub h1_target: Option<f64>,
    /// Reject perturbations whose H¹ norm exceeds this value.
    #[serde(default)]
    pub max_h1: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationState {
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
    pub phi_bar: Vec<f64>,
    pub psi_bar: Vec<f64>,
}

/// Discrete masses of both phases on nodes `1..` and the boundary fluxes
/// accumulated since the initial time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MassLedger {
    pub initial: [f64; 2],
    pub inflow: [f64; 2],
    pub outflow: [f64; 2],
}

#[derive(Debug, Clone)]
pub struct EvolutionState {
    pub grid: Grid,
    pub rho: Vec<f64>,
    pub u: Vec<f64>,
    pub n: Vec<f64>,
    pub v: Vec<f64>,
    pub time: f64,
    pub ledger: MassLedger,
    /// `(Δρ, Δu, Δn, Δv)` from the last node to the ghost beyond it.
    pub outflow_ghost: [f64; 4],
    /// Discrete `(ũ_x)_x` and `(ñṽ_x)_x` of the profile the state was built
    /// on, moved from the viscous to the transport substep. `None` runs the
    /// plain splitting.
    pub viscous_balance: Option<Arc<[Vec<f64>; 2]>>,
}

impl EvolutionState {
    fn conserved(&self) -> Conserved {
        Conserved::from_primitive(&self.rho, &self.u, &self.n, &self.v)
    }

    fn mesh(&self) -> scheme::Mesh<'_> {
        scheme::Mesh {
            dx: self.grid.dx(),
            ghost: self.outflow_ghost,
            balance: self.viscous_balance.as_deref(),
        }
    }

    fn masses(&self) -> [f64; 2] {
        let dx = self.grid.dx();
        // node 0 is boundary data, not a control volume
        [
            self.rho[1..].iter().sum::<f64>() * dx,
            self.n[1..].iter().sum::<f64>() * dx,
        ]
    }

    /// `|M(t) − M(0) − ∫(F_in − F_out)| / M(0)` for each phase.
    pub fn mass_drift(&self) -> [f64; 2] {
        let now = self.masses();
        [0, 1].map(|p| {
            let expected = self.ledger.initial[p] + self.ledger.inflow[p] - self.ledger.outflow[p];
            (now[p] - expected).abs() / self.ledger.initial[p]
        })
    }
}

/// Profile plus the perturbation described by `spec`.
///
/// Rejects perturbations that do not vanish at `x = 0`, break positivity or
/// exceed `max_h1`.
pub fn init_state(profile: &StationaryProfile, spec: &PerturbationSpec) -> Result<EvolutionState> {
    let grid = profile.grid.clone();
    let len = grid.len();
    let mut pert = PerturbationState {
        phi: vec![0.0; len],
        psi: vec![0.0; len],
        phi_bar: vec![0.0; len],
        psi_bar: vec![0.0; len],
    };
    for bump in &spec.bumps {
        if !(bump.width > 0.0) {
            return Err(Error::Rejected(format!(
                "bump width must be positive, got {}",
                bump.width
            )));
        }
        if bump.eval(0.0).abs() > 1e-14 * bump.amplitude.abs() {
            return Err(Error::Rejected(format!(
                "bump centered at {} with width {} does not vanish at the inflow boundary",
                bump.center, bump.width
            )));
        }
        let target = match bump.component {
            Component::Phi => &mut pert.phi,
            Component::Psi => &mut pert.psi,
            Component::PhiBar => &mut pert.phi_bar,
            Component::PsiBar => &mut pert.psi_bar,
        };
        for (slot, &x) in target.iter_mut().zip(grid.x()).skip(1) {
            *slot += bump.eval(x);
        }
    }
    let (_, h1, _) = perturbation_norms(&pert, grid.dx());
    if let Some(goal) = spec.h1_target {
        if h1 == 0.0 {
            return Err(Error::Rejected("cannot rescale a zero perturbation".into()));
        }
        let s = goal / h1;
        for f in [
            &mut pert.phi,
            &mut pert.psi,
            &mut pert.phi_bar,
            &mut pert.psi_bar,
        ] {
            f.iter_mut().for_each(|v| *v *= s);
        }
    }
    let (_, h1, _) = perturbation_norms(&pert, grid.dx());
    if let Some(cap) = spec.max_h1 {
        if h1 > cap {
            return Err(Error::Rejected(format!(
                "perturbation H1 norm {h1:.3e} exceeds {cap:.3e}"
            )));
        }
    }

    let rho: Vec<f64> = profile
        .rho_t
        .iter()
        .zip(&pert.phi)
        .map(|(a, b)| a + b)
        .collect();
    let n: Vec<f64> = profile
        .n_t
        .iter()
        .zip(&pert.phi_bar)
        .map(|(a, b)| a + b)
        .collect();
    if let Some(i) = (0..len).find(|&i| !(rho[i] > 0.0 && n[i] > 0.0)) {
        return Err(Error::Rejected(format!(
            "perturbed density is not positive at x = {} (rho = {}, n = {})",
            grid.x()[i],
            rho[i],
            n[i]
        )));
    }
    let ghost = profile_increment(profile);
    let mut state = EvolutionState {
        u: profile
            .u_t
            .iter()
            .zip(&pert.psi)
            .map(|(a, b)| a + b)
            .collect(),
        v: profile
            .v_t
            .iter()
            .zip(&pert.psi_bar)
            .map(|(a, b)| a + b)
            .collect(),
        rho,
        n,
        grid,
        time: 0.0,
        ledger: MassLedger {
            initial: [0.0; 2],
            inflow: [0.0; 2],
            outflow: [0.0; 2],
        },
        outflow_ghost: ghost,
        viscous_balance: Some(Arc::new(viscous_balance(profile, ghost))),
    };
    state.ledger.initial = state.masses();
    Ok(state)
}

fn viscous_balance(profile: &StationaryProfile, ghost: [f64; 4]) -> [Vec<f64>; 2] {
    let dx = profile.grid.dx();
    [
        scheme::viscous_divergence(&profile.u_t, |_| 1.0, ghost[1], dx),
        scheme::viscous_divergence(
            &profile.v_t,
            scheme::density_face(&profile.n_t),
            ghost[3],
            dx,
        ),
    ]
}

/// Increment of the profile over one cell past the last node, second order
/// in `dx`; densities follow from flux constancy.
fn profile_increment(profile: &StationaryProfile) -> [f64; 4] {
    let last = profile.grid.len() - 1;
    let dx = profile.grid.dx();
    let step = |d: &[f64]| dx * (1.5 * d[last] - 0.5 * d[last - 1]);
    let (du, dv) = (step(&profile.u_x), step(&profile.v_x));
    let d_rho = -profile.rho_t[last] * du / (profile.u_t[last] + du);
    let d_n = -profile.n_t[last] * dv / (profile.v_t[last] + dv);
    [d_rho, du, d_n, dv]
}

/// `(ρ − ρ̃, u − ũ, n − ñ, v − ṽ)`.
pub fn perturbation(
    state: &EvolutionState,
    profile: &StationaryProfile,
) -> Result<PerturbationState> {
    if !state.grid.matches(&profile.grid) {
        return Err(Error::Usage(format!(
            "state grid ({} nodes, dx {}) differs from profile grid ({} nodes, dx {})",
            state.grid.len(),
            state.grid.dx(),
            profile.grid.len(),
            profile.grid.dx()
        )));
    }
    let diff = |a: &[f64], b: &[f64]| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| x - y).collect() };
    let mut p = PerturbationState {
        phi: diff(&state.rho, &profile.rho_t),
        psi: diff(&state.u, &profile.u_t),
        phi_bar: diff(&state.n, &profile.n_t),
        psi_bar: diff(&state.v, &profile.v_t),
    };
    p.psi[0] = 0.0;
    p.psi_bar[0] = 0.0;
    Ok(p)
}

/// Largest stable step for the current state.
pub fn stable_dt(state: &EvolutionState, params: &ModelParams, opts: &SchemeOptions) -> f64 {
    scheme::stable_dt(
        &state.rho,
        &state.u,
        &state.n,
        &state.v,
        params,
        opts,
        state.grid.dx(),
    )
}

/// Advance by exactly `dt`, halving into substeps when positivity is lost.
pub fn step(
    state: &EvolutionState,
    params: &ModelParams,
    opts: &SchemeOptions,
    dt: f64,
) -> Result<EvolutionState> {
    step_with_budget(state, params, opts, dt, opts.max_halvings)
}

fn step_with_budget(
    state: &EvolutionState,
    params: &ModelParams,
    opts: &SchemeOptions,
    dt: f64,
    budget: usize,
) -> Result<EvolutionState> {
    match scheme::advance(
        &state.conserved(),
        params,
        opts,
        &state.mesh(),
        dt,
        state.time,
    ) {
        Ok((c, fluxes)) => {
            let (u, v) = c.velocities();
            let mut ledger = state.ledger;
            for p in 0..2 {
                ledger.inflow[p] += fluxes.inflow[p];
                ledger.outflow[p] += fluxes.outflow[p];
            }
            Ok(EvolutionState {
                grid: state.grid.clone(),
                rho: c.rho,
                u,
                n: c.n,
                v,
                time: state.time + dt,
                ledger,
                outflow_ghost: state.outflow_ghost,
                viscous_balance: state.viscous_balance.clone(),
            })
        }
        Err(Error::StepFailure { t, reason }) => {
            if budget == 0 {
                return Err(Error::StepFailure {
                    t,
                    reason: format!("{reason}; retry budget exhausted"),
                });
            }
            let half = step_with_budget(state, params, opts, 0.5 * dt, budget - 1)?;
            let mut out = step_with_budget(&half, params, opts, 0.5 * dt, budget - 1)?;
            out.time = state.time + dt;
            Ok(out)
        }
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimedReport {
    pub t: f64,
    #[serde(flatten)]
    pub report: EnergyReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub series: Vec<TimedReport>,
    /// Worst relative mass drift over the reports, both phases.
    pub max_mass_drift: f64,
    pub steps: usize,
}

/// Advance `state` to `t_end`, recording an [`EnergyReport`] at `t = 0`, every
/// `report_every` and at `t_end`.
pub fn run(
    state: &mut EvolutionState,
    params: &ModelParams,
    profile: &StationaryProfile,
    opts: &SchemeOptions,
    t_end: f64,
    report_every: f64,
) -> Result<RunSummary> {
    if !(report_every > 0.0) || !(t_end >= state.time) {
        return Err(Error::Usage(format!(
            "need report_every > 0 and t_end >= t (got {report_every}, {t_end})"
        )));
    }
    let mut series = vec![TimedReport {
        t: state.time,
        report: energy(state, profile, params)?,
    }];
    let mut max_drift = 0.0f64;
    let mut steps = 0usize;
    let mut next_report = state.time + report_every;
    while state.time < t_end {
        let goal = next_report.min(t_end);
        let dt = stable_dt(state, params, opts).min(goal - state.time);
        *state = step(state, params, opts, dt)?;
        steps += 1;
        if goal - state.time <= 1e-12 * goal.abs().max(1.0) {
            state.time = goal;
            series.push(TimedReport {
                t: state.time,
                report: energy(state, profile, params)?,
            });
            max_drift = state.mass_drift().into_iter().fold(max_drift, f64::max);
            next_report += report_every;
        }
    }
    Ok(RunSummary {
        series,
        max_mass_drift: max_drift,
        steps,
    })
}
