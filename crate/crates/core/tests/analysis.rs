use twophase_core::analysis::{
    fit_algebraic_tail, fit_exponential_tail, fit_power_law, weighted_inequality_check, FitModel,
};
use twophase_core::grid::Grid;
use twophase_core::stationary::{decay_report, eigen_spectrum, solve_stationary, GridSpec};
use twophase_core::{FarFieldData, ModelParams};

/// Composite Simpson with `n` (even) panels.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

#[test]
fn inequality_sides_match_closed_forms_for_x_exp() {
    let (c0, delta, j) = (1.0, 0.1, 3.0);
    let grid = Grid::uniform(40.0, 8001).unwrap();
    let psi: Vec<f64> = grid.x().iter().map(|x| x * (-x).exp()).collect();
    let r = weighted_inequality_check(&psi, &grid, c0, delta, j).unwrap();

    // δ∫x²e^{−3x} = 2δ/27 and ‖ψ_x‖² = ∫(1−x)²e^{−2x} = 1/4, ψ(0) = 0; the
    // piecewise-linear interpolant is off by O(dx²)
    let rel = |a: f64, b: f64| (a - b).abs() / b.abs();
    assert!(rel(r.exponential.lhs, 2.0 * delta / 27.0) < 1e-4);
    assert!(rel(r.exponential.rhs, delta / 4.0) < 1e-4);
    assert_eq!(r.exponential.constant, 2.0);
    assert!(rel(r.exponential.ratio, 4.0 / 27.0) < 1e-4);

    let lhs = simpson(
        |x| (delta / (1.0 + delta * x)).powf(j) * x * x * (-2.0 * x).exp(),
        0.0,
        40.0,
        20000,
    );
    assert!(rel(r.algebraic.lhs, lhs) < 1e-4);
    assert!(rel(r.algebraic.rhs, delta.powf(j - 2.0) / 4.0) < 1e-4);
    assert!(r.holds && r.algebraic.ratio < 1.0);
}

#[test]
fn inequality_rejects_bad_arguments() {
    let grid = Grid::uniform(10.0, 11).unwrap();
    let psi = vec![0.0; 11];
    assert!(weighted_inequality_check(&psi, &grid, 1.0, 0.1, 2.0).is_err());
    assert!(weighted_inequality_check(&psi, &grid, 0.0, 0.1, 3.0).is_err());
    assert!(weighted_inequality_check(&psi[..5], &grid, 1.0, 0.1, 3.0).is_err());
}

#[test]
fn power_law_recovers_exponent() {
    let x: Vec<f64> = (0..5).map(|k| 1e-4 * 10f64.powf(k as f64 / 2.0)).collect();
    let y: Vec<f64> = x.iter().map(|d| 0.7 * d.powf(1.25)).collect();
    let fit = fit_power_law(&x, &y).unwrap();
    assert_eq!(fit.model, FitModel::Power);
    assert!((fit.rate_or_slope - 1.25).abs() < 1e-12);
    assert!((fit.intercept - 0.7f64.ln()).abs() < 1e-10);
    assert!(fit_power_law(&[1.0], &[1.0]).is_err());
}

#[test]
fn fit_windows_stay_inside_the_data() {
    let x: Vec<f64> = (0..300).map(|i| i as f64 * 0.1).collect();
    let y: Vec<f64> = x
        .iter()
        .map(|v| (-0.3 * v).exp() * (1.0 + 0.2 * v.cos()))
        .collect();
    for fit in [
        fit_exponential_tail(&x, &y, None).unwrap(),
        fit_algebraic_tail(&x, &y, None).unwrap(),
    ] {
        assert!((0.0..=1.0).contains(&fit.r_squared));
        assert!(fit.window.0 >= x[0] && fit.window.1 <= x[x.len() - 1]);
        assert!(fit.window.0 < fit.window.1 && fit.points >= 8);
    }
}

#[test]
fn model_selection_agrees_with_the_regime() {
    let p = ModelParams::new(1.0, 1.0, 1.0, 1.0, 1.0).unwrap();
    for (u_plus, delta, expected) in [
        (0.5, 1e-3, FitModel::Exponential),
        (1.0, 1e-2, FitModel::Algebraic),
    ] {
        let far = FarFieldData::from_far_state(1.0, 1.0, u_plus, u_plus - delta).unwrap();
        let prof = solve_stationary(&p, &far, &GridSpec::default(), None).unwrap();
        let report = decay_report(&p, &prof, &eigen_spectrum(&p, &far).unwrap()).unwrap();
        assert_eq!(report.selected, Some(expected), "u+ = {u_plus}");
    }
}
