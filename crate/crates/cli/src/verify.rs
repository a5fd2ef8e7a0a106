//! Seeded property suite behind `twophase verify`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use twophase_core::analysis::weighted_inequality_check;
use twophase_core::grid::Grid;
use twophase_core::model::{mach_number, pressure, pressure_derivative};
use twophase_core::stationary::eigen_spectrum;
use twophase_core::{FarFieldData, ModelParams, Phase, Regime};

use crate::config::VerifyOptions;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub cases: usize,
    pub failures: usize,
    /// Largest observed error measure (relative residual or inequality ratio).
    pub worst: f64,
}

impl Check {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            cases: 0,
            failures: 0,
            worst: 0.0,
        }
    }

    fn record(&mut self, value: f64, ok: bool) {
        self.cases += 1;
        if !ok || !value.is_finite() {
            self.failures += 1;
        }
        if value.is_nan() || value > self.worst {
            self.worst = value;
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

/// Random valid model and far field, at least `0.01` away from the sonic line.
pub fn sample_case(rng: &mut impl Rng) -> (ModelParams, FarFieldData) {
    loop {
        let params = ModelParams::new(
            rng.gen_range(0.2..3.0),
            rng.gen_range(0.2..3.0),
            rng.gen_range(1.0..3.0),
            rng.gen_range(1.0..3.0),
            rng.gen_range(0.1..5.0),
        )
        .expect("sampled ranges are valid");
        let u_plus = rng.gen_range(0.1..4.0);
        let far = FarFieldData::from_far_state(
            rng.gen_range(0.2..3.0),
            rng.gen_range(0.2..3.0),
            u_plus,
            u_plus * rng.gen_range(0.5..1.0),
        )
        .expect("sampled ranges are valid");
        if (mach_number(&params, &far) - 1.0).abs() > 0.01 {
            return (params, far);
        }
    }
}

fn sign_pattern_holds(params: &ModelParams, far: &FarFieldData) -> bool {
    let Ok(spec) = eigen_spectrum(params, far) else {
        return false;
    };
    let (stable, unstable) = (spec.stable_indices().len(), spec.unstable_indices().len());
    match spec.regime.tag {
        Regime::Supersonic => stable == 1 && unstable == 2,
        Regime::Subsonic => stable == 2 && unstable == 1,
        Regime::Sonic => stable == 1 && unstable == 1,
    }
}

fn eigen_identities(check: &mut Check, params: &ModelParams, far: &FarFieldData) {
    let Ok(spec) = eigen_spectrum(params, far) else {
        check.record(f64::INFINITY, false);
        return;
    };
    let j = &spec.jacobian;
    let scale = spec
        .eigenvalues
        .iter()
        .map(|l| l.norm())
        .fold(0.0, f64::max);
    let errs = [
        (spec.sum() - j.trace()).norm() / scale.max(j.trace().abs()),
        (spec.pairwise() - j.minor_sum()).norm() / (scale * scale).max(j.minor_sum().abs()),
        (spec.product() - j.det()).norm() / (scale * scale * scale).max(j.det().abs()),
    ];
    let worst = errs.into_iter().fold(0.0, f64::max);
    check.record(worst, worst <= 1e-9);
}

pub fn run(opts: &VerifyOptions, seed: u64) -> VerifyReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut identities = Check::new("eigenvalue identities");
    let mut signs = Check::new("regime sign table");
    let mut slopes = Check::new("pressure derivative");
    let mut sonic = Check::new("sonic sign table");

    for _ in 0..opts.parameter_sets {
        let (params, far) = sample_case(&mut rng);
        eigen_identities(&mut identities, &params, &far);
        signs.record(0.0, sign_pattern_holds(&params, &far));

        for (phase, density) in [(Phase::One, far.rho_plus()), (Phase::Two, far.n_plus())] {
            let h = 1e-6 * density;
            let fd = (pressure(&params, phase, density + h).unwrap()
                - pressure(&params, phase, density - h).unwrap())
                / (2.0 * h);
            let exact = pressure_derivative(&params, phase, density).unwrap();
            let err = (fd - exact).abs() / exact;
            slopes.record(err, err <= 1e-6);
        }

        // move A1 onto the sonic line for the same far state when possible
        if let Ok(a1) = params.sonic_a1(far.rho_plus(), far.n_plus(), far.u_plus()) {
            let on_line = params.with_a1(a1).unwrap();
            sonic.record(0.0, sign_pattern_holds(&on_line, &far));
        }
    }

    let mut inequality = Check::new("weighted inequalities");
    for _ in 0..opts.inequality_functions {
        let (psi, grid) = random_function(&mut rng);
        let c0 = rng.gen_range(0.05..2.0);
        let delta = 10f64.powf(rng.gen_range(-4.0..-0.5));
        match weighted_inequality_check(&psi, &grid, c0, delta, 3.0) {
            Ok(r) => inequality.record(r.exponential.ratio.max(r.algebraic.ratio), r.holds),
            Err(_) => inequality.record(f64::INFINITY, false),
        }
    }

    VerifyReport {
        checks: vec![identities, signs, sonic, slopes, inequality],
    }
}

/// Random smooth function on a random uniform grid: a boundary value plus a
/// few Gaussian bumps and a damped oscillation.
pub fn random_function(rng: &mut impl Rng) -> (Vec<f64>, Grid) {
    let length = rng.gen_range(5.0..200.0);
    let nodes = rng.gen_range(64..2048);
    let grid = Grid::uniform(length, nodes).expect("positive length, enough nodes");
    let at_zero = rng.gen_range(-1.0..1.0);
    let bumps: Vec<(f64, f64, f64)> = (0..rng.gen_range(1..5))
        .map(|_| {
            (
                rng.gen_range(-2.0..2.0),
                rng.gen_range(0.0..length),
                rng.gen_range(0.2..length / 4.0),
            )
        })
        .collect();
    let (freq, decay) = (rng.gen_range(0.1..5.0), rng.gen_range(0.01..1.0));
    let psi = grid
        .x()
        .iter()
        .map(|&x| {
            let mut v = at_zero * (-decay * x).exp() * (freq * x).cos();
            for &(a, c, w) in &bumps {
                let s = (x - c) / w;
                v += a * (-s * s).exp();
            }
            v
        })
        .collect();
    (psi, grid)
}
