use std::path::Path;
use std::process::{Command, Output};

const SONIC: &str =
    r#""A1":1,"A2":1,"gamma":1,"alpha":1,"mu":1,"rho_minus":1,"n_minus":1,"u_minus":1,"u_plus":1"#;

fn model(rho_minus: f64, n_minus: f64, u_minus: f64, u_plus: f64) -> String {
    format!(
        r#""A1":1,"A2":1,"gamma":1,"alpha":1,"mu":1,"rho_minus":{rho_minus},"n_minus":{n_minus},"u_minus":{u_minus},"u_plus":{u_plus}"#
    )
}

/// Far state `ρ₊ = n₊ = 1` with inflow speed `u₊ − δ`.
fn far_model(u_plus: f64, delta: f64) -> String {
    let u_minus = u_plus - delta;
    let rho = u_plus / u_minus;
    model(rho, rho, u_minus, u_plus)
}

fn run(dir: &Path, sub: &str, config: &str, extra: &[&str]) -> Output {
    let cfg = dir.join(format!("{sub}.json"));
    std::fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_twophase"))
        .arg(sub)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .args(extra)
        .output()
        .unwrap()
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join("out").join(name)).unwrap()
}

#[test]
fn classify_sonic_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        "classify",
        &format!(r#"{{"schema":1,"model":{{{SONIC}}}}}"#),
        &[],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let json: serde_json::Value = serde_json::from_str(&read(dir.path(), "spectrum.json")).unwrap();
    assert_eq!(json["spectrum"]["regime"]["tag"], "Sonic");
    let eig: Vec<f64> = json["spectrum"]["eigenvalues"]
        .as_array()
        .unwrap()
        .iter()
        .map(|z| z[0].as_f64().unwrap())
        .collect();
    let expected = [2f64.sqrt(), 0.0, -(2f64.sqrt())];
    for (got, want) in eig.iter().zip(expected) {
        assert!((got - want).abs() < 1e-12, "{eig:?}");
    }
}

#[test]
fn classify_supersonic_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = format!(r#"{{"schema":1,"model":{{{}}}}}"#, far_model(2.0, 1e-3));
    let out = run(dir.path(), "classify", &cfg, &[]);
    assert!(out.status.success());
    let json: serde_json::Value = serde_json::from_str(&read(dir.path(), "spectrum.json")).unwrap();
    assert_eq!(json["spectrum"]["regime"]["tag"], "Supersonic");
}

#[test]
fn missing_key_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let broken = SONIC.replace(r#""mu":1,"#, "");
    let out = run(
        dir.path(),
        "classify",
        &format!(r#"{{"schema":1,"model":{{{broken}}}}}"#),
        &[],
    );
    assert_eq!(out.status.code(), Some(2));
    let unknown = format!(r#"{{"schema":1,"model":{{{SONIC}}},"colour":"red"}}"#);
    assert_eq!(
        run(dir.path(), "classify", &unknown, &[]).status.code(),
        Some(2)
    );
    let bad_flag = format!(r#"{{"schema":1,"model":{{{SONIC}}}}}"#);
    let out = run(
        dir.path(),
        "stationary",
        &bad_flag,
        &["--force-regime", "hypersonic"],
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn stationary_constant_state_has_constant_columns() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = format!(
        r#"{{"schema":1,"model":{{{}}},"grid":{{"nodes":65,"length":10}}}}"#,
        model(1.0, 1.0, 0.5, 0.5)
    );
    let out = run(dir.path(), "stationary", &cfg, &[]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = read(dir.path(), "profile.csv");
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("x,rho,u,n,v"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 65);
    for r in &rows {
        assert_eq!(&r[1..], &[1.0, 0.5, 1.0, 0.5]);
    }
}

#[test]
fn stationary_subsonic_selects_exponential_tail() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = format!(r#"{{"schema":1,"model":{{{}}}}}"#, far_model(0.5, 1e-3));
    let out = run(dir.path(), "stationary", &cfg, &[]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let json: serde_json::Value = serde_json::from_str(&read(dir.path(), "decay.json")).unwrap();
    assert_eq!(json["decay"]["selected"], "exponential");
    assert_eq!(json["config_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn stationary_supersonic_reports_no_profile() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = format!(r#"{{"schema":1,"model":{{{}}}}}"#, far_model(2.0, 1e-3));
    let out = run(dir.path(), "stationary", &cfg, &[]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn evolve_zero_perturbation_and_rejection() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = format!(
        r#"{{"schema":1,"model":{{{}}},"grid":{{"nodes":257,"length":20}},"t_end":0.5,"report_every":0.25}}"#,
        model(1.0, 1.0, 0.5, 0.5)
    );
    let out = run(dir.path(), "evolve", &cfg, &[]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let series = read(dir.path(), "timeseries.csv");
    assert_eq!(
        series.lines().next(),
        Some("t,e_total,dissipation,l2,h1,sup")
    );
    let last: Vec<f64> = series
        .lines()
        .last()
        .unwrap()
        .split(',')
        .map(|c| c.parse().unwrap())
        .collect();
    assert_eq!(last[0], 0.5);
    assert!(last[5] <= 1e-14);
    assert!(read(dir.path(), "snapshot.csv").starts_with("t,x,rho,u,n,v\n"));

    let oversized = cfg.replace(
        r#""t_end""#,
        r#""perturbation":{"bumps":[{"component":"psi","amplitude":0.5,"center":10,"width":1}],"max_h1":0.01},"t_end""#,
    );
    assert_eq!(
        run(dir.path(), "evolve", &oversized, &[]).status.code(),
        Some(2)
    );
    let missing_t = cfg.replace(r#","t_end":0.5,"report_every":0.25"#, "");
    assert_eq!(
        run(dir.path(), "evolve", &missing_t, &[]).status.code(),
        Some(2)
    );
}

#[test]
fn sweep_rows_and_failures() {
    let dir = tempfile::tempdir().unwrap();
    let base = far_model(0.5, 1e-3);
    let cfg = format!(
        r#"{{"schema":1,"model":{{{base}}},"grid":{{"nodes":257}},"deltas":[1e-3,5e-4,0]}}"#
    );
    let out = run(dir.path(), "sweep", &cfg, &[]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = read(dir.path(), "sweep.csv");
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows[0], "delta,ux0,vx0,error");
    assert!(rows[3].starts_with("0.0000000000000000e0,0.0000000000000000e0,"));
    let json: serde_json::Value = serde_json::from_str(&read(dir.path(), "sweep.json")).unwrap();
    let exponent = json["exponent"].as_f64().unwrap();
    assert!((exponent - 1.0).abs() < 0.05, "{exponent}");

    let supersonic = format!(
        r#"{{"schema":1,"model":{{{}}},"grid":{{"nodes":257}},"deltas":[1e-3,5e-4]}}"#,
        far_model(2.0, 1e-3)
    );
    assert_eq!(
        run(dir.path(), "sweep", &supersonic, &[]).status.code(),
        Some(3)
    );
}

#[test]
fn verify_is_deterministic_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = format!(
        r#"{{"schema":1,"model":{{{SONIC}}},"verify":{{"parameter_sets":50,"inequality_functions":10}}}}"#
    );
    let out = run(dir.path(), "verify", &cfg, &["--seed", "7"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let first = read(dir.path(), "verify.json");
    run(dir.path(), "verify", &cfg, &["--seed", "7"]);
    assert_eq!(first, read(dir.path(), "verify.json"));
    run(dir.path(), "verify", &cfg, &["--seed", "8"]);
    assert_ne!(first, read(dir.path(), "verify.json"));
}

#[test]
fn stationary_output_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = format!(
        r#"{{"schema":1,"model":{{{}}},"grid":{{"nodes":513}}}}"#,
        far_model(0.5, 1e-3)
    );
    run(dir.path(), "stationary", &cfg, &[]);
    let (a, b) = (
        read(dir.path(), "profile.csv"),
        read(dir.path(), "decay.json"),
    );
    run(dir.path(), "stationary", &cfg, &[]);
    assert_eq!(a, read(dir.path(), "profile.csv"));
    assert_eq!(b, read(dir.path(), "decay.json"));
}
