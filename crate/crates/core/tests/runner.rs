use std::path::Path;

use mfl_core::runner::fit::loglog_fit;
use mfl_core::runner::{parse_config, parse_config_with_overrides, run, sweep, ExperimentKind};

fn config(dir: &Path, body: &str) -> String {
    format!("output.dir = {}\n{body}", dir.display())
}

#[test]
fn minimal_config_takes_defaults() {
    let cfg = parse_config("experiment.kind = hartree\n").unwrap();
    assert_eq!(cfg.kind, ExperimentKind::Hartree);
    assert_eq!(cfg.solver.dt, 1e-3);
    assert_eq!(cfg.grid.points, 256);
    assert_eq!(cfg.grid.dim, 1);
}

#[test]
fn violations_carry_line_numbers() {
    let err = parse_config("experiment.kind = hartree\n# note\nscaling.beta = 1.3\ngrid.colour = red\n").unwrap_err();
    let beta = err.find("out of [0,1]").unwrap();
    assert_eq!(beta.line, 3);
    assert_eq!(err.find("unknown key").unwrap().line, 4);
    assert_eq!(err.violations.len(), 2);
}

#[test]
fn memory_guard_reports_bytes() {
    let err = parse_config("experiment.kind = manybody\ngrid.points = 64\nscaling.N = 5\n").unwrap_err();
    let v = err.find("memory guard").unwrap();
    // 16 · 64⁵ bytes.
    assert!(v.message.contains("17179869184"), "{}", v.message);
}

#[test]
fn empty_sweep_axis() {
    let err = parse_config("experiment.kind = manybody\nscaling.N =\n").unwrap_err();
    assert!(err.find("empty sweep axis").is_some());
    let mut cfg = parse_config("experiment.kind = manybody\ngrid.points = 16\ngrid.length = 6\nscaling.N = 2\n").unwrap();
    cfg.scaling.n.clear();
    assert!(sweep(&cfg).unwrap_err().to_string().contains("empty sweep axis"));
}

#[test]
fn overrides_apply_after_the_document() {
    let cfg = parse_config_with_overrides("solver.dt = 0.01\n", &["solver.dt=0.002".into(), "grid.points = 128".into()]).unwrap();
    assert_eq!(cfg.solver.dt, 0.002);
    assert_eq!(cfg.grid.points, 128);
    assert!(parse_config_with_overrides("", &["nonsense".into()]).is_err());
}

#[test]
fn runs_are_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let body = "experiment.kind = hartree\nsolver.t_end = 0.2\nsolver.record_every = 20\nseed = 7\n";
    let ra = run(&parse_config(&config(a.path(), body)).unwrap()).unwrap();
    let rb = run(&parse_config(&config(a.path(), body)).unwrap()).unwrap();
    let first = std::fs::read(&ra.summary_path).unwrap();
    assert_eq!(first, std::fs::read(&rb.summary_path).unwrap());
    // Same config in another directory differs only in the embedded path.
    let rc = run(&parse_config(&config(b.path(), body)).unwrap()).unwrap();
    assert_eq!(ra.summary["mass_drift"], rc.summary["mass_drift"]);
    for f in &ra.files {
        assert!(f.exists(), "{}", f.display());
    }
    assert!(ra.summary["mass_drift"].as_f64().unwrap() < 1e-12);
    assert!(ra.summary["config"]["solver"]["t_end"].as_f64() == Some(0.2));
}

#[test]
fn manybody_sweep_reports_a_slope() {
    let dir = tempfile::tempdir().unwrap();
    let body = "experiment.kind = manybody\ngrid.points = 16\ngrid.length = 6\npotential.amplitude = 2\npotential.radius = 1.5\nscaling.N = 2, 3, 4\nsolver.dt = 0.01\nsolver.t_end = 0.3\n";
    let cfg = parse_config(&config(dir.path(), body)).unwrap();
    let report = sweep(&cfg).unwrap();
    assert_eq!(report.points.len(), 3);
    let fit = report.fit.unwrap();
    assert!(fit.slope < 0.0);
    assert!(report.warnings.iter().any(|w| w.contains("calibrated")));
    let art = run(&cfg).unwrap();
    assert!(art.summary_path.ends_with("manybody_report.json"));
}

#[test]
fn fit_reads_csv() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("points.csv");
    std::fs::write(&data, "N,d\n1,3\n2,0.75\n4,0.1875\n8,0.046875\n").unwrap();
    let body = format!("experiment.kind = fit\nfit.input = {}\n", data.display());
    let report = sweep(&parse_config(&config(dir.path(), &body)).unwrap()).unwrap();
    let fit = report.fit.unwrap();
    assert!((fit.slope + 2.0).abs() < 1e-12 && fit.residual < 1e-12);
    assert!(report.reliable);
}

#[test]
fn loglog_examples() {
    let exact: Vec<(f64, f64)> = [1.0, 2.0, 4.0, 8.0].iter().map(|&x: &f64| (x, 3.0 * x.powi(-2))).collect();
    let f = loglog_fit(&exact).unwrap();
    assert!((f.slope + 2.0).abs() < 1e-12 && f.residual < 1e-12);
    assert!(loglog_fit(&[(1.0, 1.0)]).is_err());
    assert!(loglog_fit(&[(1.0, 1.0), (2.0, 0.0)]).is_err());
    let noise = [0.004, -0.007, 0.01, -0.002, 0.006, -0.01];
    let noisy: Vec<(f64, f64)> = noise.iter().enumerate().map(|(i, e)| {
        let x = 2f64.powi(i as i32);
        (x, (1.0 + e) / x)
    }).collect();
    let s = loglog_fit(&noisy).unwrap().slope;
    assert!((-1.05..=-0.95).contains(&s));
}

#[test]
fn decay_window_beyond_horizon_is_a_guard() {
    let dir = tempfile::tempdir().unwrap();
    let body = "experiment.kind = hartree\nsolver.t_end = 0.1\ndecay.window_start = 1\ndecay.window_end = 500\n";
    let err = run(&parse_config(&config(dir.path(), body)).unwrap()).unwrap_err();
    assert!(err.is_guard());
}
