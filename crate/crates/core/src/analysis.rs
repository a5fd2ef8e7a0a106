//! Tail fits and empirical checks of the weighted Hardy-type inequalities.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Minimum number of samples a fit window must contain.
pub const MIN_FIT_POINTS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FitModel {
    Exponential,
    Algebraic,
    Power,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub model: FitModel,
    /// Decay rate (exponential), slope of `1/y` (algebraic) or exponent (power).
    pub rate_or_slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
    pub points: usize,
    /// Exponent `β` in `y ∝ (1 + δ_eff x)^β` with `δ_eff = slope/intercept`,
    /// algebraic fits only.
    pub loglog_exponent: Option<f64>,
    /// The data carry no measurable variation over the window.
    pub low_confidence: bool,
    pub warnings: Vec<String>,
}

struct Line {
    slope: f64,
    intercept: f64,
    r_squared: f64,
    flat: bool,
}

fn least_squares(x: &[f64], y: &[f64]) -> Line {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my) * (v - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    let flat = syy <= (f64::EPSILON * my.abs()).powi(2) * n;
    let r_squared = if flat || syy == 0.0 {
        1.0
    } else {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    };
    Line {
        slope,
        intercept,
        r_squared,
        flat,
    }
}

/// Default window: the trailing 60% of the range where `|y|` stays above
/// `1e3·ε·max|y|`. Returns the window and a warning when the floor trimmed it.
pub fn default_window(x: &[f64], y: &[f64]) -> Result<((f64, f64), Option<String>)> {
    if x.len() != y.len() || x.is_empty() {
        return Err(Error::InsufficientData {
            got: x.len().min(y.len()),
            need: MIN_FIT_POINTS,
        });
    }
    let peak = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let floor = 1e3 * f64::EPSILON * peak;
    let last = y
        .iter()
        .rposition(|v| v.abs() >= floor && v.abs() > 0.0)
        .unwrap_or(0);
    let x_hi = x[last];
    let x_lo = x[0] + 0.4 * (x_hi - x[0]);
    let warning = (last + 1 < x.len()).then(|| {
        format!(
            "fit window shrunk to x <= {x_hi:.6e} to stay above the numerical floor {floor:.3e}"
        )
    });
    Ok(((x_lo, x_hi), warning))
}

fn select(
    x: &[f64],
    y: &[f64],
    window: Option<(f64, f64)>,
) -> Result<(Vec<f64>, Vec<f64>, (f64, f64), Vec<String>)> {
    let mut warnings = Vec::new();
    let win = match window {
        Some(w) => w,
        None => {
            let (w, warn) = default_window(x, y)?;
            warnings.extend(warn);
            w
        }
    };
    let (xs, ys): (Vec<f64>, Vec<f64>) = x
        .iter()
        .zip(y)
        .filter(|(xi, _)| **xi >= win.0 && **xi <= win.1)
        .map(|(a, b)| (*a, *b))
        .unzip();
    if xs.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientData {
            got: xs.len(),
            need: MIN_FIT_POINTS,
        });
    }
    if let Some(bad) = ys.iter().find(|v| !(**v > 0.0)) {
        return Err(Error::Domain(format!(
            "tail fit needs positive data, found {bad}"
        )));
    }
    Ok((xs, ys, win, warnings))
}

/// Least-squares line through `(x, ln y)`; the rate is minus the slope.
pub fn fit_exponential_tail(x: &[f64], y: &[f64], window: Option<(f64, f64)>) -> Result<FitResult> {
    let (xs, ys, win, warnings) = select(x, y, window)?;
    let logs: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let line = least_squares(&xs, &logs);
    Ok(FitResult {
        model: FitModel::Exponential,
        rate_or_slope: -line.slope,
        intercept: line.intercept,
        r_squared: line.r_squared,
        window: win,
        points: xs.len(),
        loglog_exponent: None,
        low_confidence: line.flat,
        warnings,
    })
}

/// Least-squares line through `(x, 1/y)`, plus the exponent of
/// `y ∝ (1 + δ_eff x)^β` from a fit of `ln y` against `ln(1 + δ_eff x)`.
pub fn fit_algebraic_tail(x: &[f64], y: &[f64], window: Option<(f64, f64)>) -> Result<FitResult> {
    let (xs, ys, win, mut warnings) = select(x, y, window)?;
    let recip: Vec<f64> = ys.iter().map(|v| 1.0 / v).collect();
    let line = least_squares(&xs, &recip);

    let logs: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let abscissa: Vec<f64> = if line.intercept > 0.0 && line.slope > 0.0 {
        let d = line.slope / line.intercept;
        xs.iter().map(|v| (d * v).ln_1p()).collect()
    } else {
        warnings.push("reciprocal fit has no positive offset; exponent fitted against ln x".into());
        xs.iter().map(|v| v.max(f64::MIN_POSITIVE).ln()).collect()
    };
    let exponent = least_squares(&abscissa, &logs).slope;
    Ok(FitResult {
        model: FitModel::Algebraic,
        rate_or_slope: line.slope,
        intercept: line.intercept,
        r_squared: line.r_squared,
        window: win,
        points: xs.len(),
        loglog_exponent: Some(exponent),
        low_confidence: line.flat,
        warnings,
    })
}

/// Least-squares line through `(ln x, ln y)` over all points with `x, y > 0`.
pub fn fit_power_law(x: &[f64], y: &[f64]) -> Result<FitResult> {
    let (lx, ly): (Vec<f64>, Vec<f64>) = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0)
        .map(|(a, b)| (a.ln(), b.ln()))
        .unzip();
    if lx.len() < 2 {
        return Err(Error::InsufficientData {
            got: lx.len(),
            need: 2,
        });
    }
    let line = least_squares(&lx, &ly);
    let lo = lx.iter().cloned().fold(f64::INFINITY, f64::min).exp();
    let hi = lx.iter().cloned().fold(f64::NEG_INFINITY, f64::max).exp();
    Ok(FitResult {
        model: FitModel::Power,
        rate_or_slope: line.slope,
        intercept: line.intercept,
        r_squared: line.r_squared,
        window: (lo, hi),
        points: lx.len(),
        loglog_exponent: None,
        low_confidence: line.flat,
        warnings: Vec::new(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalitySide {
    pub lhs: f64,
    pub rhs: f64,
    pub constant: f64,
    /// `lhs / (constant · rhs)`; zero when both sides vanish.
    pub ratio: f64,
}

impl InequalitySide {
    fn new(lhs: f64, rhs: f64, constant: f64) -> Self {
        let ratio = if lhs == 0.0 {
            0.0
        } else {
            lhs / (constant * rhs)
        };
        Self {
            lhs,
            rhs,
            constant,
            ratio,
        }
    }

    pub fn holds(&self) -> bool {
        self.ratio <= 1.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityReport {
    /// `δ∫e^{−c₀x}|ψ|² ≤ C δ(|ψ(0)|² + ‖ψ_x‖²)`, `C = max(2/c₀, 2/c₀²)`.
    pub exponential: InequalitySide,
    /// `∫δʲ(1+δx)^{−j}|ψ|² ≤ C δ^{j−2}(|ψ(0)|² + ‖ψ_x‖²)`,
    /// `C = max(2δ/(j−1), 2/((j−1)(j−2)))`.
    pub algebraic: InequalitySide,
    pub j: f64,
    pub holds: bool,
}

const GAUSS5: [(f64, f64); 5] = [
    (0.0, 0.568_888_888_888_888_9),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
    (0.906_179_845_938_664, 0.236_926_885_056_189_1),
];

/// Weighted integral of `ψ_h²` for the piecewise-linear interpolant `ψ_h`,
/// five-point Gauss–Legendre per cell.
fn weighted_square(psi: &[f64], x: &[f64], weight: impl Fn(f64) -> f64) -> f64 {
    let mut total = 0.0;
    for i in 0..psi.len() - 1 {
        let (x0, x1) = (x[i], x[i + 1]);
        let h = x1 - x0;
        let mut cell = 0.0;
        for (node, w) in GAUSS5 {
            let t = 0.5 * (node + 1.0);
            let p = psi[i] + t * (psi[i + 1] - psi[i]);
            cell += w * weight(x0 + t * h) * p * p;
        }
        total += 0.5 * h * cell;
    }
    total
}

/// Both weighted inequalities for the piecewise-linear interpolant of `psi`.
///
/// The constants come from `|ψ(x)|² ≤ 2|ψ(0)|² + 2x‖ψ_x‖²`, which holds
/// exactly for the interpolant, so any reported violation is a bug.
pub fn weighted_inequality_check(
    psi: &[f64],
    grid: &Grid,
    c0: f64,
    delta: f64,
    j: f64,
) -> Result<InequalityReport> {
    if psi.len() != grid.len() {
        return Err(Error::Usage(format!(
            "psi has {} values on a {}-node grid",
            psi.len(),
            grid.len()
        )));
    }
    if !(c0 > 0.0 && delta > 0.0 && j > 2.0) {
        return Err(Error::Domain(format!(
            "need c0 > 0, delta > 0, j > 2 (got {c0}, {delta}, {j})"
        )));
    }
    let x = grid.x();
    let grad_sq: f64 = psi
        .windows(2)
        .zip(x.windows(2))
        .map(|(p, xx)| (p[1] - p[0]).powi(2) / (xx[1] - xx[0]))
        .sum();
    let base = psi[0] * psi[0] + grad_sq;

    let lhs_e = delta * weighted_square(psi, x, |s| (-c0 * s).exp());
    let c_e = (2.0 / c0).max(2.0 / (c0 * c0));
    let exponential = InequalitySide::new(lhs_e, delta * base, c_e);

    let lhs_a = weighted_square(psi, x, |s| (delta / (1.0 + delta * s)).powf(j));
    let c_a = (2.0 * delta / (j - 1.0)).max(2.0 / ((j - 1.0) * (j - 2.0)));
    let algebraic = InequalitySide::new(lhs_a, delta.powf(j - 2.0) * base, c_a);

    let holds = exponential.holds() && algebraic.holds();
    Ok(InequalityReport {
        exponential,
        algebraic,
        j,
        holds,
    })
}
