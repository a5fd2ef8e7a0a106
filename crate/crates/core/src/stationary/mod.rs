//! Stationary boundary-layer profiles.
//!
//! The far-field linearization decides the construction. A supersonic far
//! field has a one-dimensional stable manifold, searched by backward shooting.
//! Subsonic and sonic far fields have a single unstable direction; the
//! profile on the stable (resp. center-stable) manifold is found by forward
//! marching with the unstable component removed by bisection.

pub mod field;
pub mod shooting;
pub mod spectrum;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{
    fit_algebraic_tail, fit_exponential_tail, fit_power_law, FitModel, FitResult,
};
use crate::error::{Error, Result};
use crate::grid::{derivative4, Grid};
use crate::model::{FarFieldData, ModelParams, Regime, RegimeLabel};

pub use field::StationaryField;
pub use shooting::{ShootingMethod, ShootingParams, TOL_BC};
pub use spectrum::{
    assemble_jacobian, center_manifold_coeff, cubic_roots, eigen_spectrum, CenterManifoldData,
    FarFieldJacobian, SpectrumReport,
};

use shooting::Orbit;

/// Relative tolerance on `|ũ(L) − u₊|` for exponentially decaying profiles.
pub const TAIL_TOL: f64 = 1e-8;
pub const DEFAULT_NODES: usize = 4096;

/// Output sampling. `length: None` samples the whole shooting interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default = "default_nodes")]
    pub nodes: usize,
    #[serde(default)]
    pub length: Option<f64>,
}

fn default_nodes() -> usize {
    DEFAULT_NODES
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            nodes: DEFAULT_NODES,
            length: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct StationaryProfile {
    pub grid: Grid,
    pub rho_t: Vec<f64>,
    pub u_t: Vec<f64>,
    pub n_t: Vec<f64>,
    pub v_t: Vec<f64>,
    /// `ũ − u₊`, carried separately so tails keep their relative precision.
    pub u_dev: Vec<f64>,
    pub v_dev: Vec<f64>,
    /// `ũ_x` and `ṽ_x` from the ODE right-hand side.
    pub u_x: Vec<f64>,
    pub v_x: Vec<f64>,
    pub regime: RegimeLabel,
    pub far: FarFieldData,
    pub shooting_params: ShootingParams,
    /// Max over the three equations of the scaled 4th-order finite-difference
    /// residual on a twice refined grid.
    pub residual_norm: f64,
    /// `|ũ(L) − u₊| / u₊` at the end of the output grid.
    pub tail_mismatch: f64,
}

impl StationaryProfile {
    pub fn length(&self) -> f64 {
        self.grid.length()
    }

    /// Max relative deviation of `ρ̃ũ` and `ñṽ` from the far-field fluxes.
    pub fn flux_error(&self) -> f64 {
        let f1 = self.far.rho_plus() * self.far.u_plus();
        let f2 = self.far.n_plus() * self.far.u_plus();
        let mut err = 0.0f64;
        for i in 0..self.grid.len() {
            err = err.max((self.rho_t[i] * self.u_t[i] - f1).abs() / f1);
            err = err.max((self.n_t[i] * self.v_t[i] - f2).abs() / f2);
        }
        err
    }

    pub fn boundary_mismatch(&self) -> f64 {
        let um = self.far.u_minus();
        (self.u_t[0] - um).abs().max((self.v_t[0] - um).abs())
    }
}

/// Shooting interval: `max(50, 12/m)` off the sonic line, `40/δ` on it.
pub fn shooting_length(spectrum: &SpectrumReport, regime: Regime, delta: f64) -> f64 {
    match regime {
        Regime::Sonic => 40.0 / delta,
        _ => {
            let m = spectrum.min_stable_rate().unwrap_or(1.0);
            (12.0 / m).max(50.0)
        }
    }
}

/// Construct the stationary profile for `far`.
///
/// `force` overrides the Mach classification when routing to a solver.
pub fn solve_stationary(
    params: &ModelParams,
    far: &FarFieldData,
    grid_spec: &GridSpec,
    force: Option<Regime>,
) -> Result<StationaryProfile> {
    let mut spectrum = eigen_spectrum(params, far)?;
    if let Some(tag) = force {
        spectrum.regime.tag = tag;
    }
    let regime = spectrum.regime;
    let field = StationaryField::new(params, far);
    let target = far.u_minus() - far.u_plus();

    let (orbit, shooting_params) = if target == 0.0 {
        let length = grid_spec
            .length
            .unwrap_or_else(|| shooting_length(&spectrum, Regime::Subsonic, 1.0));
        let params = ShootingParams {
            method: ShootingMethod::Trivial,
            amplitudes: Vec::new(),
            shooting_length: length,
            iterations: 0,
            restarts: 0,
            boundary_mismatch: 0.0,
        };
        (Orbit::constant(length), params)
    } else {
        let length = shooting_length(&spectrum, regime.tag, far.delta())
            .max(grid_spec.length.unwrap_or(0.0));
        match regime.tag {
            Regime::Supersonic => shooting::shoot_stable(&field, &spectrum, target, length)?,
            Regime::Subsonic => shooting::march_forward(&field, &spectrum, target, length, false)?,
            Regime::Sonic => shooting::march_forward(&field, &spectrum, target, length, true)?,
        }
    };

    let length = grid_spec.length.unwrap_or(orbit.length());
    let grid = Grid::uniform(length, grid_spec.nodes)?;
    sample(&field, far, regime, grid, &orbit, shooting_params)
}

fn sample(
    field: &StationaryField,
    far: &FarFieldData,
    regime: RegimeLabel,
    grid: Grid,
    orbit: &Orbit,
    shooting_params: ShootingParams,
) -> Result<StationaryProfile> {
    let n = grid.len();
    let up = far.u_plus();
    let mut out = StationaryProfile {
        rho_t: Vec::with_capacity(n),
        u_t: Vec::with_capacity(n),
        n_t: Vec::with_capacity(n),
        v_t: Vec::with_capacity(n),
        u_dev: Vec::with_capacity(n),
        v_dev: Vec::with_capacity(n),
        u_x: Vec::with_capacity(n),
        v_x: Vec::with_capacity(n),
        regime,
        far: *far,
        shooting_params,
        residual_norm: 0.0,
        tail_mismatch: 0.0,
        grid,
    };
    for &x in out.grid.x() {
        let y = eval_orbit(orbit, x)?;
        let d = field.rhs(x, &y)?;
        let (u, v) = (up + y[0], up + y[2]);
        let (rho, nn) = field.densities(u, v);
        out.u_dev.push(y[0]);
        out.v_dev.push(y[2]);
        out.u_t.push(u);
        out.v_t.push(v);
        out.rho_t.push(rho);
        out.n_t.push(nn);
        out.u_x.push(d[0]);
        out.v_x.push(d[2]);
    }
    out.shooting_params.boundary_mismatch = out.boundary_mismatch();
    out.tail_mismatch = out.u_dev.last().unwrap().abs() / up;
    out.residual_norm = residual_norm(field, orbit, out.grid.length(), 2 * out.grid.len() - 1)?;
    Ok(out)
}

fn eval_orbit(orbit: &Orbit, x: f64) -> Result<[f64; 3]> {
    orbit.eval(x).ok_or_else(|| {
        Error::Usage(format!(
            "x = {x} lies outside the computed orbit (length {})",
            orbit.length()
        ))
    })
}

/// Scaled residual of the first-order system, 4th-order differences of the
/// dense solution on `nodes` equispaced points.
fn residual_norm(field: &StationaryField, orbit: &Orbit, length: f64, nodes: usize) -> Result<f64> {
    let fine = Grid::uniform(length, nodes)?;
    let mut ys = [vec![0.0; nodes], vec![0.0; nodes], vec![0.0; nodes]];
    let mut rhs = [vec![0.0; nodes], vec![0.0; nodes], vec![0.0; nodes]];
    for (i, &x) in fine.x().iter().enumerate() {
        let y = eval_orbit(orbit, x)?;
        let f = field.rhs(x, &y)?;
        for k in 0..3 {
            ys[k][i] = y[k];
            rhs[k][i] = f[k];
        }
    }
    let mut worst = 0.0f64;
    for k in 0..3 {
        let scale = rhs[k].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            continue;
        }
        let d = derivative4(&ys[k], fine.dx());
        let r = d
            .iter()
            .zip(&rhs[k])
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        worst = worst.max(r / scale);
    }
    Ok(worst)
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayReport {
    pub regime: RegimeLabel,
    pub delta: f64,
    /// `δ = 0`: no tail to fit.
    pub trivial: bool,
    /// Fit of `|ũ−u₊| + |ṽ−u₊|` against `e^{−mx}`.
    pub exponential: Option<FitResult>,
    /// Fit of `1/|z₃|` (sonic) or `1/(|ũ−u₊| + |ṽ−u₊|)` against `x`.
    pub algebraic: Option<FitResult>,
    /// Algebraic fit of `|ũ−u₊|` itself; its log-log exponent is the `k = 0`
    /// decay exponent.
    pub velocity_tail: Option<FitResult>,
    pub selected: Option<FitModel>,
    /// `min |Re λ|` over the stable eigenvalues.
    pub expected_rate: Option<f64>,
    pub rate_relative_error: Option<f64>,
    /// Center-manifold coefficient `a` (sonic).
    pub expected_coefficient: Option<f64>,
    pub coefficient_relative_error: Option<f64>,
    /// Smallest `C` with `|ũ−u₊| + |ṽ−u₊| ≤ Cδe^{−mx}` (or `≤ Cδ/(1+δx)` when sonic).
    pub amplitude_constant: Option<f64>,
    /// Rate within 5% (exponential) or coefficient within 10% (sonic).
    pub passed: bool,
    pub warnings: Vec<String>,
}

pub fn decay_report(
    params: &ModelParams,
    profile: &StationaryProfile,
    spectrum: &SpectrumReport,
) -> Result<DecayReport> {
    let delta = profile.far.delta();
    let x = profile.grid.x();
    let mut report = DecayReport {
        regime: profile.regime,
        delta,
        trivial: delta == 0.0,
        exponential: None,
        algebraic: None,
        velocity_tail: None,
        selected: None,
        expected_rate: None,
        rate_relative_error: None,
        expected_coefficient: None,
        coefficient_relative_error: None,
        amplitude_constant: None,
        passed: false,
        warnings: Vec::new(),
    };
    if report.trivial {
        report
            .warnings
            .push("constant profile; decay rates undefined".into());
        return Ok(report);
    }
    let amplitude: Vec<f64> = profile
        .u_dev
        .iter()
        .zip(&profile.v_dev)
        .map(|(a, b)| a.abs() + b.abs())
        .collect();
    let exp_fit = fit_exponential_tail(x, &amplitude, None)?;

    if profile.regime.tag == Regime::Sonic {
        let center = spectrum::center_coefficients(params, &profile.far);
        let ic = spectrum.center_index();
        let l_c = spectrum.left_eigenvector(ic).map(|c| c.re);
        let z3: Vec<f64> = profile
            .u_dev
            .iter()
            .zip(&profile.u_x)
            .zip(&profile.v_dev)
            .map(|((u, w), v)| (l_c[0] * u + l_c[1] * w + l_c[2] * v).abs())
            .collect();
        let alg = fit_algebraic_tail(x, &z3, None)?;
        let u_abs: Vec<f64> = profile.u_dev.iter().map(|v| v.abs()).collect();
        let vel = fit_algebraic_tail(x, &u_abs, None)?;
        let err = (alg.rate_or_slope - center.a).abs() / center.a;
        report.coefficient_relative_error = Some(err);
        report.expected_coefficient = Some(center.a);
        report.amplitude_constant = Some(
            x.iter()
                .zip(&amplitude)
                .map(|(xi, y)| y * (1.0 + delta * xi) / delta)
                .fold(0.0, f64::max),
        );
        report.passed = err <= 0.10;
        report.selected = Some(if alg.r_squared >= exp_fit.r_squared {
            FitModel::Algebraic
        } else {
            FitModel::Exponential
        });
        report.warnings.extend(alg.warnings.iter().cloned());
        report.algebraic = Some(alg);
        report.velocity_tail = Some(vel);
    } else {
        let alg = fit_algebraic_tail(x, &amplitude, None)?;
        let m = spectrum
            .min_stable_rate()
            .ok_or_else(|| Error::Structural("no stable eigenvalue".into()))?;
        let err = (exp_fit.rate_or_slope - m).abs() / m;
        report.expected_rate = Some(m);
        report.rate_relative_error = Some(err);
        report.amplitude_constant = Some(
            x.iter()
                .zip(&amplitude)
                .map(|(xi, y)| y / (delta * (-m * xi).exp()))
                .fold(0.0, f64::max),
        );
        report.passed = err <= 0.05;
        report.selected = Some(if exp_fit.r_squared >= alg.r_squared {
            FitModel::Exponential
        } else {
            FitModel::Algebraic
        });
        report.algebraic = Some(alg);
    }
    report.warnings.extend(exp_fit.warnings.iter().cloned());
    report.exponential = Some(exp_fit);
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub delta: f64,
    pub ux0: Option<f64>,
    pub vx0: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    /// Log-log fit of `|ũ_x(0)|` against `δ` over the rows with `δ > 0`.
    pub exponent: Option<FitResult>,
    /// `max |ũ_x(0)|/δ` over the successful rows with `δ > 0`.
    pub max_ratio: Option<f64>,
}

/// Boundary slopes `|ũ_x(0)|`, `|ṽ_x(0)|` for `u₋ = u₊ − δ`, rows solved in
/// parallel and returned in input order.
pub fn boundary_slope_sweep(
    params: &ModelParams,
    base: &FarFieldData,
    deltas: &[f64],
    grid_spec: &GridSpec,
) -> Result<SweepReport> {
    if deltas.is_empty() {
        return Err(Error::Usage("empty delta list".into()));
    }
    let rows: Vec<SweepRow> = deltas
        .par_iter()
        .map(|&delta| {
            let solved = base
                .with_u_minus(base.u_plus() - delta)
                .and_then(|far| solve_stationary(params, &far, grid_spec, None));
            match solved {
                Ok(p) => SweepRow {
                    delta,
                    ux0: Some(p.u_x[0].abs()),
                    vx0: Some(p.v_x[0].abs()),
                    error: None,
                },
                Err(e) => SweepRow {
                    delta,
                    ux0: None,
                    vx0: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    let (ds, slopes): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter_map(|r| r.ux0.filter(|_| r.delta > 0.0).map(|s| (r.delta, s)))
        .unzip();
    let exponent = fit_power_law(&ds, &slopes).ok();
    let max_ratio = ds.iter().zip(&slopes).map(|(d, s)| s / d).reduce(f64::max);
    Ok(SweepReport {
        rows,
        exponent,
        max_ratio,
    })
}
