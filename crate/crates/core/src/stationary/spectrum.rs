//! Far-field Jacobian of the reduced stationary system and its spectrum.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{classify, FarFieldData, ModelParams, Regime, RegimeLabel};

/// Linearization of the stationary system at `(u₊, 0, u₊)` in the
/// deviation coordinates `(ũ − u₊, ũ_x, ṽ − u₊)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FarFieldJacobian {
    pub entries: [[f64; 3]; 3],
}

impl FarFieldJacobian {
    pub fn trace(&self) -> f64 {
        let m = &self.entries;
        m[0][0] + m[1][1] + m[2][2]
    }

    pub fn det(&self) -> f64 {
        let m = &self.entries;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Sum of the principal 2×2 minors (second characteristic coefficient).
    pub fn minor_sum(&self) -> f64 {
        let m = &self.entries;
        (m[0][0] * m[1][1] - m[0][1] * m[1][0])
            + (m[0][0] * m[2][2] - m[0][2] * m[2][0])
            + (m[1][1] * m[2][2] - m[1][2] * m[2][1])
    }

    pub fn apply(&self, y: &[f64; 3]) -> [f64; 3] {
        let m = &self.entries;
        [
            m[0][0] * y[0] + m[0][1] * y[1] + m[0][2] * y[2],
            m[1][0] * y[0] + m[1][1] * y[1] + m[1][2] * y[2],
            m[2][0] * y[0] + m[2][1] * y[1] + m[2][2] * y[2],
        ]
    }
}

pub fn assemble_jacobian(params: &ModelParams, far: &FarFieldData) -> FarFieldJacobian {
    let (rp, np, up, mu) = (far.rho_plus(), far.n_plus(), far.u_plus(), params.mu());
    let phase1 = rp * up * up - params.a1() * params.gamma() * rp.powf(params.gamma());
    let phase2 = np * up * up - params.a2() * params.alpha() * np.powf(params.alpha());
    FarFieldJacobian {
        entries: [
            [0.0, 1.0, 0.0],
            [np / mu, phase1 / (mu * up), -np / mu],
            [phase1 / (np * up), -mu / np, phase2 / (np * up)],
        ],
    }
}

/// Roots of `λ³ + c2 λ² + c1 λ + c0`.
///
/// Trigonometric form when all roots are real, Cardano otherwise; real roots
/// are then refined by Newton steps and a complex pair is recomputed from the
/// deflated quadratic.
pub fn cubic_roots(c2: f64, c1: f64, c0: f64) -> [Complex64; 3] {
    let shift = c2 / 3.0;
    let p = c1 - c2 * c2 / 3.0;
    let q = 2.0 * c2 * c2 * c2 / 27.0 - c2 * c1 / 3.0 + c0;
    let disc = (q / 2.0) * (q / 2.0) + (p / 3.0) * (p / 3.0) * (p / 3.0);
    let poly = |x: f64| ((x + c2) * x + c1) * x + c0;
    let dpoly = |x: f64| (3.0 * x + 2.0 * c2) * x + c1;
    let polish = |mut x: f64| {
        for _ in 0..4 {
            let d = dpoly(x);
            if d == 0.0 {
                break;
            }
            let next = x - poly(x) / d;
            if poly(next).abs() < poly(x).abs() {
                x = next;
            } else {
                break;
            }
        }
        x
    };

    if p == 0.0 && q == 0.0 {
        let r = polish(-shift);
        return [Complex64::new(r, 0.0); 3];
    }

    if disc <= 0.0 {
        let r = 2.0 * (-p / 3.0).sqrt();
        let arg = ((3.0 * q) / (2.0 * p) * (-3.0 / p).sqrt()).clamp(-1.0, 1.0);
        let phi = arg.acos() / 3.0;
        let two_pi_3 = 2.0 * std::f64::consts::PI / 3.0;
        let roots = [0.0, 1.0, 2.0].map(|k| polish(r * (phi - two_pi_3 * k).cos() - shift));
        roots.map(|x| Complex64::new(x, 0.0))
    } else {
        let sq = disc.sqrt();
        let a = -q.signum() * (q.abs() / 2.0 + sq).cbrt();
        let b = if a != 0.0 { -p / (3.0 * a) } else { 0.0 };
        let real = polish(a + b - shift);
        // deflate: (λ − r)(λ² + Bλ + C)
        let bq = c2 + real;
        let cq = if real.abs() > 1e-8 {
            -c0 / real
        } else {
            c1 + real * bq
        };
        let dq = bq * bq - 4.0 * cq;
        let pair = if dq < 0.0 {
            let re = -bq / 2.0;
            let im = (-dq).sqrt() / 2.0;
            [Complex64::new(re, im), Complex64::new(re, -im)]
        } else {
            // rounding pushed the pair onto the real axis
            let s = -0.5 * (bq + bq.signum() * dq.sqrt());
            let r1 = if s != 0.0 { cq / s } else { 0.0 };
            [Complex64::new(s, 0.0), Complex64::new(r1, 0.0)]
        };
        [Complex64::new(real, 0.0), pair[0], pair[1]]
    }
}

/// Spectrum of `J₊`, its eigenvectors and the Mach classification.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    pub jacobian: FarFieldJacobian,
    /// Ordered by descending real part.
    pub eigenvalues: [Complex64; 3],
    /// `r = (1, λ, −(μ/n₊)(λ² − J₂₂λ − n₊/μ))` for each eigenvalue.
    pub eigenvectors: [[Complex64; 3]; 3],
    pub regime: RegimeLabel,
    /// Relative residuals of (sum − trace, product − det, pairwise − minor sum).
    pub invariants_check: [f64; 3],
}

impl SpectrumReport {
    pub fn sum(&self) -> Complex64 {
        self.eigenvalues.iter().sum()
    }
    pub fn product(&self) -> Complex64 {
        self.eigenvalues.iter().product()
    }
    pub fn pairwise(&self) -> Complex64 {
        let l = &self.eigenvalues;
        l[0] * l[1] + l[0] * l[2] + l[1] * l[2]
    }

    fn zero_tol(&self) -> f64 {
        1e-6 * self
            .eigenvalues
            .iter()
            .map(|l| l.norm())
            .fold(1e-300, f64::max)
    }

    /// Indices of eigenvalues with negative real part (excluding a sonic zero).
    pub fn stable_indices(&self) -> Vec<usize> {
        let tol = if self.regime.tag == Regime::Sonic {
            self.zero_tol()
        } else {
            0.0
        };
        (0..3).filter(|&i| self.eigenvalues[i].re < -tol).collect()
    }

    pub fn unstable_indices(&self) -> Vec<usize> {
        let tol = if self.regime.tag == Regime::Sonic {
            self.zero_tol()
        } else {
            0.0
        };
        (0..3).filter(|&i| self.eigenvalues[i].re > tol).collect()
    }

    /// Index of the eigenvalue nearest zero (the center direction when sonic).
    pub fn center_index(&self) -> usize {
        (0..3)
            .min_by(|&a, &b| {
                self.eigenvalues[a]
                    .norm()
                    .total_cmp(&self.eigenvalues[b].norm())
            })
            .unwrap()
    }

    /// Slowest exponential rate of the stable directions.
    pub fn min_stable_rate(&self) -> Option<f64> {
        self.stable_indices()
            .iter()
            .map(|&i| -self.eigenvalues[i].re)
            .reduce(f64::min)
    }

    /// Eigenvalues relabeled the way the regime table lists them:
    /// supersonic `(Re>0, Re>0, <0)`, subsonic `(Re<0, Re<0, >0)`,
    /// sonic `(>0, <0, 0)`.
    pub fn table_order(&self) -> [Complex64; 3] {
        let l = self.eigenvalues;
        match self.regime.tag {
            Regime::Supersonic => l,
            Regime::Subsonic => [l[1], l[2], l[0]],
            Regime::Sonic => {
                let c = self.center_index();
                let others: Vec<usize> = (0..3).filter(|&i| i != c).collect();
                [l[others[0]], l[others[1]], l[c]]
            }
        }
    }

    /// Left eigenvector `ℓ` of eigenvalue `i`, scaled so that `ℓ·rᵢ = 1`.
    pub fn left_eigenvector(&self, i: usize) -> [Complex64; 3] {
        left_eigenvector(&self.jacobian, self.eigenvalues[i], &self.eigenvectors[i])
    }
}

fn cross(a: &[Complex64; 3], b: &[Complex64; 3]) -> [Complex64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn left_eigenvector(
    j: &FarFieldJacobian,
    lambda: Complex64,
    right: &[Complex64; 3],
) -> [Complex64; 3] {
    let col = |k: usize| {
        [0, 1, 2].map(|r| {
            let diag = if r == k {
                lambda
            } else {
                Complex64::new(0.0, 0.0)
            };
            Complex64::new(j.entries[r][k], 0.0) - diag
        })
    };
    let cols = [col(0), col(1), col(2)];
    let candidates = [
        cross(&cols[0], &cols[1]),
        cross(&cols[0], &cols[2]),
        cross(&cols[1], &cols[2]),
    ];
    let norm = |v: &[Complex64; 3]| v.iter().map(|c| c.norm_sqr()).sum::<f64>();
    let best = candidates
        .into_iter()
        .max_by(|a, b| norm(a).total_cmp(&norm(b)))
        .unwrap();
    let dot: Complex64 = best.iter().zip(right).map(|(a, b)| a * b).sum();
    best.map(|c| c / dot)
}

fn eigenvector(
    params: &ModelParams,
    far: &FarFieldData,
    j: &FarFieldJacobian,
    lambda: Complex64,
) -> [Complex64; 3] {
    let ratio = params.mu() / far.n_plus();
    let j22 = j.entries[1][1];
    let third = -ratio * (lambda * lambda - lambda * j22 - far.n_plus() / params.mu());
    [Complex64::new(1.0, 0.0), lambda, third]
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

/// Eigenvalues, eigenvectors and regime of the far-field linearization.
///
/// Fails with a structural error when the sign pattern of the eigenvalues
/// disagrees with the Mach classification.
pub fn eigen_spectrum(params: &ModelParams, far: &FarFieldData) -> Result<SpectrumReport> {
    let j = assemble_jacobian(params, far);
    let (tr, m2, det) = (j.trace(), j.minor_sum(), j.det());
    let mut eig = cubic_roots(-tr, m2, -det);
    eig.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
    let eigenvectors = eig.map(|l| eigenvector(params, far, &j, l));
    let regime = classify(params, far);
    let mut report = SpectrumReport {
        jacobian: j,
        eigenvalues: eig,
        eigenvectors,
        regime,
        invariants_check: [0.0; 3],
    };
    report.invariants_check = [
        rel(report.sum().re, tr) + report.sum().im.abs(),
        rel(report.product().re, det) + report.product().im.abs(),
        rel(report.pairwise().re, m2) + report.pairwise().im.abs(),
    ];
    check_sign_pattern(&report)?;
    Ok(report)
}

fn check_sign_pattern(s: &SpectrumReport) -> Result<()> {
    let l = &s.eigenvalues;
    let tol = s.zero_tol();
    let ok = match s.regime.tag {
        Regime::Supersonic => l[0].re > 0.0 && l[1].re > 0.0 && l[2].re < 0.0 && l[2].im == 0.0,
        Regime::Subsonic => l[0].re > 0.0 && l[0].im == 0.0 && l[1].re < 0.0 && l[2].re < 0.0,
        Regime::Sonic => {
            l.iter().all(|v| v.im == 0.0) && l[0].re > tol && l[1].re.abs() <= tol && l[2].re < -tol
        }
    };
    if ok {
        Ok(())
    } else {
        Err(Error::Structural(format!(
            "eigenvalues {:?} do not match the {} pattern (M+ = {})",
            l, s.regime.tag, s.regime.mach
        )))
    }
}

/// Quadratic coefficient of the reduced center dynamics `σ' = aσ² + O(σ³)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CenterManifoldData {
    pub a: f64,
    pub b: f64,
    /// Center coordinate of the inflow data, `u₋ − u₊` to leading order.
    pub sigma0: f64,
}

pub fn center_manifold_coeff(
    params: &ModelParams,
    far: &FarFieldData,
) -> Result<CenterManifoldData> {
    let regime = classify(params, far);
    if regime.tag != Regime::Sonic {
        return Err(Error::Usage(format!(
            "center manifold coefficient requested for a {} far field (M+ = {})",
            regime.tag, regime.mach
        )));
    }
    Ok(center_coefficients(params, far))
}

pub(crate) fn center_coefficients(params: &ModelParams, far: &FarFieldData) -> CenterManifoldData {
    let (rp, np, up, mu) = (far.rho_plus(), far.n_plus(), far.u_plus(), params.mu());
    let (a1, a2, g, al) = (params.a1(), params.a2(), params.gamma(), params.alpha());
    let b = rp * (up * up - a1 * g * rp.powf(g - 1.0)) / (up.abs() * ((mu + np) * np).sqrt());
    let num = a1 * g * (g + 1.0) * rp.powf(g) + a2 * al * (al + 1.0) * np.powf(al);
    let a = num / (2.0 * up * up * (mu + np) * (1.0 + b * b));
    CenterManifoldData {
        a,
        b,
        sigma0: far.u_minus() - far.u_plus(),
    }
}
