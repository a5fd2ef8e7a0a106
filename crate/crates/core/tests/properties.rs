use num_complex::Complex64;
use proptest::prelude::*;

use twophase_core::analysis::{
    fit_algebraic_tail, fit_exponential_tail, weighted_inequality_check,
};
use twophase_core::evolution::relative_entropy;
use twophase_core::grid::Grid;
use twophase_core::model::{
    classify, complete_far_field, mach_number, pressure, pressure_derivative,
};
use twophase_core::stationary::{assemble_jacobian, eigen_spectrum};
use twophase_core::{FarFieldData, ModelParams, Phase, Regime};

fn params() -> impl Strategy<Value = ModelParams> {
    (
        0.2..5.0f64,
        0.2..5.0f64,
        1.0..3.0f64,
        1.0..3.0f64,
        0.2..5.0f64,
    )
        .prop_map(|(a1, a2, g, al, mu)| ModelParams::new(a1, a2, g, al, mu).unwrap())
}

fn far_field() -> impl Strategy<Value = FarFieldData> {
    (0.2..5.0f64, 0.2..5.0f64, 0.1..4.0f64)
        .prop_map(|(r, n, u)| FarFieldData::from_far_state(r, n, u, 0.999 * u).unwrap())
}

/// Characteristic coefficients straight from the matrix entries.
fn invariants(j: &[[f64; 3]; 3]) -> (f64, f64, f64) {
    let trace = j[0][0] + j[1][1] + j[2][2];
    let minor = |a: usize, b: usize| j[a][a] * j[b][b] - j[a][b] * j[b][a];
    let minors = minor(0, 1) + minor(0, 2) + minor(1, 2);
    let det = j[0][0] * (j[1][1] * j[2][2] - j[1][2] * j[2][1])
        - j[0][1] * (j[1][0] * j[2][2] - j[1][2] * j[2][0])
        + j[0][2] * (j[1][0] * j[2][1] - j[1][1] * j[2][0]);
    (trace, minors, det)
}

/// Simpson on `[a, b]`, refined until two levels agree.
fn quad(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let mut n = 64;
    let mut prev = f64::NAN;
    loop {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        let cur = s * h / 3.0;
        if (cur - prev).abs() <= 1e-14 * cur.abs().max(1e-300) || n > 1 << 20 {
            return cur;
        }
        prev = cur;
        n *= 2;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn eigenvalues_reproduce_characteristic_coefficients(p in params(), f in far_field()) {
        let s = eigen_spectrum(&p, &f).unwrap();
        let (trace, minors, det) = invariants(&s.jacobian.entries);
        let scale = s.eigenvalues.iter().map(|l| l.norm()).fold(1.0, f64::max);
        let sum: Complex64 = s.eigenvalues.iter().sum();
        let prod: Complex64 = s.eigenvalues.iter().product();
        let l = s.eigenvalues;
        let pair = l[0] * l[1] + l[0] * l[2] + l[1] * l[2];
        prop_assert!((sum - trace).norm() <= 1e-9 * scale);
        prop_assert!((pair - minors).norm() <= 1e-9 * scale.powi(2));
        prop_assert!((prod - det).norm() <= 1e-9 * scale.powi(3));
        for (lam, r) in s.eigenvalues.iter().zip(&s.eigenvectors) {
            let j = &s.jacobian.entries;
            for row in 0..3 {
                let jr: Complex64 = (0..3).map(|c| r[c] * j[row][c]).sum();
                let norm = r.iter().map(|c| c.norm()).fold(0.0, f64::max);
                prop_assert!((jr - lam * r[row]).norm() <= 1e-9 * scale * norm);
            }
        }
    }

    #[test]
    fn sign_pattern_follows_mach(p in params(), f in far_field()) {
        let m = mach_number(&p, &f);
        prop_assume!((m - 1.0).abs() > 1e-3);
        let s = eigen_spectrum(&p, &f).unwrap();
        let pos = s.eigenvalues.iter().filter(|l| l.re > 0.0).count();
        let neg = s.eigenvalues.iter().filter(|l| l.re < 0.0).count();
        if m > 1.0 {
            prop_assert_eq!(s.regime.tag, Regime::Supersonic);
            prop_assert_eq!((pos, neg), (2, 1));
        } else {
            prop_assert_eq!(s.regime.tag, Regime::Subsonic);
            prop_assert_eq!((pos, neg), (1, 2));
        }
    }

    #[test]
    fn sonic_construction_has_one_zero_eigenvalue(p in params(), f in far_field()) {
        let Ok(a1) = p.sonic_a1(f.rho_plus(), f.n_plus(), f.u_plus()) else {
            return Ok(());
        };
        let sonic = p.with_a1(a1).unwrap();
        prop_assert_eq!(classify(&sonic, &f).tag, Regime::Sonic);
        let s = eigen_spectrum(&sonic, &f).unwrap();
        let scale = s.eigenvalues.iter().map(|l| l.norm()).fold(1e-300, f64::max);
        let ordered = s.table_order();
        prop_assert!(ordered[0].re > 0.0 && ordered[1].re < 0.0);
        prop_assert!(ordered[2].norm() <= 1e-7 * scale);
    }

    #[test]
    fn pressure_derivative_matches_central_difference(
        p in params(),
        rho in 0.05..20.0f64,
        phase in prop_oneof![Just(Phase::One), Just(Phase::Two)],
    ) {
        let h = 1e-6 * rho;
        let fd = (pressure(&p, phase, rho + h).unwrap() - pressure(&p, phase, rho - h).unwrap())
            / (2.0 * h);
        let exact = pressure_derivative(&p, phase, rho).unwrap();
        prop_assert!((fd - exact).abs() <= 1e-6 * exact.abs());
    }

    #[test]
    fn completed_far_field_conserves_both_fluxes(
        p in params(),
        rm in 0.1..10.0f64,
        nm in 0.1..10.0f64,
        um in 0.1..5.0f64,
        up in 0.1..5.0f64,
    ) {
        let f = complete_far_field(&p, rm, nm, um, up).unwrap();
        prop_assert!((f.rho_plus() * up - rm * um).abs() <= 4.0 * f64::EPSILON * rm * um);
        prop_assert!((f.n_plus() * up - nm * um).abs() <= 4.0 * f64::EPSILON * nm * um);
        prop_assert_eq!(f.delta(), (up - um).abs());
    }

    #[test]
    fn mach_density_scaling_is_invariant_only_for_isothermal_laws(
        a1 in 0.2..5.0f64,
        a2 in 0.2..5.0f64,
        g in 1.1..3.0f64,
        f in far_field(),
        lambda in prop_oneof![0.2..0.8f64, 1.25..5.0f64],
    ) {
        let scaled = FarFieldData::from_far_state(
            lambda * f.rho_plus(),
            lambda * f.n_plus(),
            f.u_plus(),
            f.u_minus(),
        )
        .unwrap();
        let iso = ModelParams::new(a1, a2, 1.0, 1.0, 1.0).unwrap();
        let m0 = mach_number(&iso, &f);
        prop_assert!((mach_number(&iso, &scaled) - m0).abs() <= 1e-14 * m0);
        let poly = ModelParams::new(a1, a2, g, g, 1.0).unwrap();
        let m1 = mach_number(&poly, &f);
        // both pressures share the exponent, so c² scales by exactly λ^{γ−1}
        let expected = m1 * lambda.powf(-(g - 1.0) / 2.0);
        prop_assert!((mach_number(&poly, &scaled) - expected).abs() <= 1e-12 * m1);
        prop_assert!((expected - m1).abs() > 1e-3 * m1);
    }

    #[test]
    fn relative_entropy_matches_quadrature(
        a in 0.2..5.0f64,
        g in 1.0..3.0f64,
        rho in 0.2..5.0f64,
        reference in 0.2..5.0f64,
    ) {
        let dp = |s: f64| a * s.powf(g) - a * reference.powf(g);
        let oracle = rho * quad(|s| dp(s) / (s * s), reference, rho);
        let phi = relative_entropy(a, g, rho, reference);
        prop_assert!(phi >= 0.0);
        prop_assert!((phi - oracle).abs() <= 1e-9 * oracle.abs().max(1e-12));
    }

    #[test]
    fn fits_are_scale_equivariant(rate in 0.1..3.0f64, delta in 0.005..0.2f64, scale in 1e-6..1e6f64) {
        let x: Vec<f64> = (0..400).map(|i| i as f64 * 0.05).collect();
        let e: Vec<f64> = x.iter().map(|v| (-rate * v).exp()).collect();
        let es: Vec<f64> = e.iter().map(|v| scale * v).collect();
        let f0 = fit_exponential_tail(&x, &e, None).unwrap();
        let f1 = fit_exponential_tail(&x, &es, None).unwrap();
        prop_assert!((f0.rate_or_slope - f1.rate_or_slope).abs() <= 1e-9 * rate);

        let a: Vec<f64> = x.iter().map(|v| delta / (1.0 + delta * v)).collect();
        let as_: Vec<f64> = a.iter().map(|v| scale * v).collect();
        let g0 = fit_algebraic_tail(&x, &a, None).unwrap();
        let g1 = fit_algebraic_tail(&x, &as_, None).unwrap();
        let (b0, b1) = (g0.loglog_exponent.unwrap(), g1.loglog_exponent.unwrap());
        prop_assert!((b0 - b1).abs() <= 1e-9);
        prop_assert!((b0 + 1.0).abs() <= 1e-6);
    }

    #[test]
    fn weighted_inequalities_never_fail(
        coeffs in proptest::collection::vec(-1.0..1.0f64, 1..6),
        decay in 0.05..2.0f64,
        c0 in 0.1..4.0f64,
        delta in 1e-3..0.5f64,
        j in 2.1..5.0f64,
    ) {
        let grid = Grid::uniform(60.0, 1201).unwrap();
        let psi: Vec<f64> = grid
            .x()
            .iter()
            .map(|&x| {
                let poly: f64 = coeffs.iter().enumerate().map(|(k, c)| c * x.powi(k as i32)).sum();
                poly * (-decay * x).exp()
            })
            .collect();
        let r = weighted_inequality_check(&psi, &grid, c0, delta, j).unwrap();
        prop_assert!(r.holds, "{r:?}");
    }
}

#[test]
fn jacobian_helpers_agree_with_entry_formulas() {
    let p = ModelParams::new(1.3, 0.7, 1.4, 1.8, 0.9).unwrap();
    let f = FarFieldData::from_far_state(1.2, 0.8, 0.6, 0.599).unwrap();
    let j = assemble_jacobian(&p, &f);
    let (trace, minors, det) = invariants(&j.entries);
    assert!((j.trace() - trace).abs() < 1e-14);
    assert!((j.minor_sum() - minors).abs() < 1e-14);
    assert!((j.det() - det).abs() < 1e-14);
}
