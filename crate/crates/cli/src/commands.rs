//! One function per subcommand. Each writes its artifacts into the output
//! directory and returns the line printed to stdout.

use serde::Serialize;
use twophase_core::evolution::{self, EnergyReport, RunSummary};
use twophase_core::model::sonic_stability_margin;
use twophase_core::stationary::{
    boundary_slope_sweep, center_manifold_coeff, decay_report, eigen_spectrum, solve_stationary,
    CenterManifoldData, DecayReport, ShootingParams, SpectrumReport, StationaryProfile, SweepRow,
};
use twophase_core::{FarFieldData, ModelParams, Regime};

use crate::config::{Loaded, Scenario};
use crate::error::{CliError, Result};
use crate::output::{float_cell, summary_line, text_cell, to_json, Csv, OutDir};
use crate::verify;

pub struct Context {
    pub loaded: Loaded,
    pub out: OutDir,
    pub seed: u64,
    pub force: Option<Regime>,
}

impl Context {
    fn model(&self) -> Result<(ModelParams, FarFieldData)> {
        Ok(self.loaded.config.model.build()?)
    }

    fn hash(&self) -> &str {
        &self.loaded.hash
    }

    fn profile(&self, params: &ModelParams, far: &FarFieldData) -> Result<StationaryProfile> {
        Ok(solve_stationary(
            params,
            far,
            &self.loaded.config.grid,
            self.force,
        )?)
    }
}

#[derive(Serialize)]
struct ClassifyOutput<'a> {
    config_hash: &'a str,
    spectrum: &'a SpectrumReport,
    center_manifold: Option<CenterManifoldData>,
    sonic_stability_margin: Option<f64>,
}

pub fn classify(ctx: &Context) -> Result<String> {
    ctx.loaded.expect_scenario(Scenario::Classify)?;
    let (params, far) = ctx.model()?;
    let spectrum = eigen_spectrum(&params, &far)?;
    let sonic = spectrum.regime.tag == Regime::Sonic;
    let report = ClassifyOutput {
        config_hash: ctx.hash(),
        spectrum: &spectrum,
        center_manifold: if sonic {
            Some(center_manifold_coeff(&params, &far)?)
        } else {
            None
        },
        sonic_stability_margin: sonic.then(|| sonic_stability_margin(&params, &far)),
    };
    ctx.out.write_json("spectrum.json", &report)?;
    Ok(to_json(&report))
}

fn profile_csv(profile: &StationaryProfile) -> String {
    let mut csv = Csv::new(&["x", "rho", "u", "n", "v"]);
    for (i, &x) in profile.grid.x().iter().enumerate() {
        csv.row(&[
            x,
            profile.rho_t[i],
            profile.u_t[i],
            profile.n_t[i],
            profile.v_t[i],
        ]);
    }
    csv.into_string()
}

#[derive(Serialize)]
struct StationaryOutput<'a> {
    config_hash: &'a str,
    shooting: &'a ShootingParams,
    boundary_mismatch: f64,
    flux_error: f64,
    residual_norm: f64,
    tail_mismatch: f64,
    decay: &'a DecayReport,
}

pub fn stationary(ctx: &Context) -> Result<String> {
    ctx.loaded.expect_scenario(Scenario::Stationary)?;
    let (params, far) = ctx.model()?;
    let profile = ctx.profile(&params, &far)?;
    let spectrum = eigen_spectrum(&params, &far)?;
    let decay = decay_report(&params, &profile, &spectrum)?;
    ctx.out.write("profile.csv", &profile_csv(&profile))?;
    ctx.out.write_json(
        "decay.json",
        &StationaryOutput {
            config_hash: ctx.hash(),
            shooting: &profile.shooting_params,
            boundary_mismatch: profile.boundary_mismatch(),
            flux_error: profile.flux_error(),
            residual_norm: profile.residual_norm,
            tail_mismatch: profile.tail_mismatch,
            decay: &decay,
        },
    )?;
    Ok(summary_line(&[
        ("regime", profile.regime.tag.to_string()),
        ("nodes", profile.grid.len().to_string()),
        ("length", format!("{:.6e}", profile.length())),
        (
            "boundary_mismatch",
            format!("{:.3e}", profile.boundary_mismatch()),
        ),
        (
            "selected",
            decay
                .selected
                .map_or("none".into(), |m| format!("{m:?}").to_lowercase()),
        ),
    ]))
}

#[derive(Serialize)]
struct EvolveOutput<'a> {
    config_hash: &'a str,
    t_end: f64,
    steps: usize,
    max_mass_drift: f64,
    initial: EnergyReport,
    last: EnergyReport,
}

pub fn evolve(ctx: &Context) -> Result<String> {
    ctx.loaded.expect_scenario(Scenario::Evolve)?;
    let cfg = &ctx.loaded.config;
    let t_end = cfg
        .t_end
        .ok_or_else(|| CliError::Config("evolve needs \"t_end\"".into()))?;
    let report_every = cfg.report_every.unwrap_or(t_end / 100.0);
    let (params, far) = ctx.model()?;
    let profile = ctx.profile(&params, &far)?;
    let mut state = evolution::init_state(&profile, &cfg.perturbation)?;
    let summary: RunSummary = evolution::run(
        &mut state,
        &params,
        &profile,
        &cfg.scheme,
        t_end,
        report_every,
    )?;

    let mut series = Csv::new(&["t", "e_total", "dissipation", "l2", "h1", "sup"]);
    for r in &summary.series {
        let e = &r.report;
        series.row(&[
            r.t,
            e.e_total,
            e.dissipation,
            e.l2_norm,
            e.h1_norm,
            e.sup_norm,
        ]);
    }
    ctx.out.write("timeseries.csv", &series.into_string())?;

    let mut snap = Csv::new(&["t", "x", "rho", "u", "n", "v"]);
    for (i, &x) in state.grid.x().iter().enumerate() {
        snap.row(&[
            state.time,
            x,
            state.rho[i],
            state.u[i],
            state.n[i],
            state.v[i],
        ]);
    }
    ctx.out.write("snapshot.csv", &snap.into_string())?;

    let first = summary.series.first().expect("run records t = 0").report;
    let last = summary.series.last().expect("run records t = 0").report;
    ctx.out.write_json(
        "summary.json",
        &EvolveOutput {
            config_hash: ctx.hash(),
            t_end,
            steps: summary.steps,
            max_mass_drift: summary.max_mass_drift,
            initial: first,
            last,
        },
    )?;
    Ok(summary_line(&[
        ("t_end", format!("{t_end}")),
        ("steps", summary.steps.to_string()),
        ("sup_initial", format!("{:.6e}", first.sup_norm)),
        ("sup_final", format!("{:.6e}", last.sup_norm)),
        ("mass_drift", format!("{:.3e}", summary.max_mass_drift)),
    ]))
}

#[derive(Serialize)]
struct SweepOutput<'a> {
    config_hash: &'a str,
    exponent: Option<f64>,
    r_squared: Option<f64>,
    max_ratio: Option<f64>,
    failed_rows: usize,
    rows: &'a [SweepRow],
}

pub fn sweep(ctx: &Context) -> Result<String> {
    ctx.loaded.expect_scenario(Scenario::Sweep)?;
    let deltas = ctx
        .loaded
        .config
        .deltas
        .as_deref()
        .filter(|d| !d.is_empty())
        .ok_or_else(|| CliError::Config("sweep needs a nonempty \"deltas\" list".into()))?;
    let (params, far) = ctx.model()?;
    let report = boundary_slope_sweep(&params, &far, deltas, &ctx.loaded.config.grid)?;

    let mut csv = Csv::new(&["delta", "ux0", "vx0", "error"]);
    for row in &report.rows {
        csv.raw_row(&[
            float_cell(Some(row.delta)),
            float_cell(row.ux0),
            float_cell(row.vx0),
            text_cell(row.error.as_deref()),
        ]);
    }
    ctx.out.write("sweep.csv", &csv.into_string())?;
    let failed = report.rows.iter().filter(|r| r.error.is_some()).count();
    ctx.out.write_json(
        "sweep.json",
        &SweepOutput {
            config_hash: ctx.hash(),
            exponent: report.exponent.as_ref().map(|f| f.rate_or_slope),
            r_squared: report.exponent.as_ref().map(|f| f.r_squared),
            max_ratio: report.max_ratio,
            failed_rows: failed,
            rows: &report.rows,
        },
    )?;
    if failed == report.rows.len() {
        return Err(CliError::SweepFailed);
    }
    Ok(summary_line(&[
        ("rows", report.rows.len().to_string()),
        ("failed", failed.to_string()),
        (
            "exponent",
            report
                .exponent
                .as_ref()
                .map_or("none".into(), |f| format!("{:.6}", f.rate_or_slope)),
        ),
    ]))
}

pub fn verify(ctx: &Context) -> Result<String> {
    ctx.loaded.expect_scenario(Scenario::Verify)?;
    let report = verify::run(&ctx.loaded.config.verify, ctx.seed);
    #[derive(Serialize)]
    struct Out<'a> {
        config_hash: &'a str,
        seed: u64,
        #[serde(flatten)]
        report: &'a verify::VerifyReport,
    }
    ctx.out.write_json(
        "verify.json",
        &Out {
            config_hash: ctx.hash(),
            seed: ctx.seed,
            report: &report,
        },
    )?;
    let lines: Vec<String> = report
        .checks
        .iter()
        .map(|c| {
            format!(
                "{} {} ({} cases, worst {:.3e})",
                if c.failures == 0 { "PASS" } else { "FAIL" },
                c.name,
                c.cases,
                c.worst
            )
        })
        .collect();
    let failed = report.checks.iter().filter(|c| c.failures > 0).count();
    if failed > 0 {
        eprintln!("{}", lines.join("\n"));
        return Err(CliError::VerifyFailed(failed));
    }
    Ok(lines.join("\n"))
}
