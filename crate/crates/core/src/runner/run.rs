//! Experiment orchestration: build the objects a configuration describes, run
//! them, and emit CSV series, JSON summaries and checkpoints atomically.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::fock::{fock_error_scaling, FockScalingInput};
use crate::hartree::{decay_fit, wraparound_horizon, HartreeRun, Interaction};
use crate::manybody::{rate_fit, RateFitInput};
use crate::pairexc::{error_term_norms, PairRun, PairState};
use crate::potential::{Profile, ScaledPotential};
use crate::runner::config::{ExperimentConfig, ExperimentKind};
use crate::runner::output::{csv, write_atomic};
use crate::runner::report::{RateReport, ReportPoint};
use crate::spectral::{checkpoint, Field, Grid};
use crate::C64;

/// What a run left on disk, plus the summary it wrote.
#[derive(Clone, Debug)]
pub struct Artifacts {
    pub summary_path: PathBuf,
    pub files: Vec<PathBuf>,
    pub summary: serde_json::Value,
}

impl Artifacts {
    /// One-line JSON digest of the summary: its top-level scalars and the fit.
    pub fn digest(&self) -> String {
        let mut out = serde_json::Map::new();
        if let Some(obj) = self.summary.as_object() {
            for (k, v) in obj {
                if !(v.is_object() || v.is_array()) || k == "fit" {
                    out.insert(k.clone(), v.clone());
                }
            }
        }
        out.insert("summary".into(), json!(self.summary_path.display().to_string()));
        serde_json::Value::Object(out).to_string()
    }
}

fn out_path(cfg: &ExperimentConfig, stem: &str, ext: &str) -> PathBuf {
    cfg.output.dir.join(format!("{}{stem}.{ext}", cfg.output.prefix))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

fn grid_of(cfg: &ExperimentConfig) -> Result<Grid> {
    Grid::new(cfg.grid.dim, cfg.grid.points, cfg.grid.length)
}

/// The configured initial orbital; `center` and `momentum` act along the
/// first axis, and the result is scaled to `‖φ₀‖_{L²} = initial.norm`.
pub fn initial_field(cfg: &ExperimentConfig, grid: Grid) -> Result<Field> {
    let ic = &cfg.initial;
    let (w, c, p) = (ic.width, ic.center, ic.momentum);
    let shape = |x: [f64; 3]| -> f64 {
        let y = [x[0] - c, x[1], x[2]];
        match ic.kind.as_str() {
            "sech" => 1.0 / (y[0] / w).cosh() * (-(y[1] * y[1] + y[2] * y[2]) / (2.0 * w * w)).exp(),
            _ => (-(y[0] * y[0] + y[1] * y[1] + y[2] * y[2]) / (2.0 * w * w)).exp(),
        }
    };
    let phi = Field::from_fn(grid, |x| C64::from_polar(shape(x), p * x[0]));
    let l2 = phi.l2();
    if !(l2 > 0.0) {
        return Err(Error::Guard("initial datum vanishes on the grid".into()));
    }
    Ok(phi.scaled(C64::new(ic.norm / l2, 0.0)))
}

fn profile(cfg: &ExperimentConfig) -> Result<Profile> {
    cfg.potential.profile()
}

fn first_n(cfg: &ExperimentConfig) -> Result<usize> {
    cfg.scaling.n.first().copied().ok_or_else(|| Error::InvalidParameter("empty sweep axis".into()))
}

/// Run one configured experiment and write its artifacts.
pub fn run(cfg: &ExperimentConfig) -> Result<Artifacts> {
    match cfg.kind {
        ExperimentKind::Hartree | ExperimentKind::Nls => run_hartree(cfg),
        ExperimentKind::Pair => run_pair(cfg),
        ExperimentKind::Manybody | ExperimentKind::Fock | ExperimentKind::Sweep | ExperimentKind::Fit => {
            let report = sweep(cfg)?;
            let path = out_path(cfg, &format!("{}_report", cfg.kind.name()), "json");
            write_json(&path, &report)?;
            let csv_path = out_path(cfg, &format!("{}_points", cfg.kind.name()), "csv");
            let rows: Vec<Vec<f64>> = report.points.iter().map(|p| vec![p.x, p.y]).collect();
            write_atomic(&csv_path, csv(&[&report.parameter, &report.quantity], &rows).as_bytes())?;
            Ok(Artifacts {
                summary_path: path.clone(),
                files: vec![path, csv_path],
                summary: serde_json::to_value(&report)?,
            })
        }
    }
}

fn run_hartree(cfg: &ExperimentConfig) -> Result<Artifacts> {
    let grid = grid_of(cfg)?;
    let phi0 = initial_field(cfg, grid)?;
    let prof = profile(cfg)?;
    let n = first_n(cfg)?;
    let interaction = match cfg.kind {
        ExperimentKind::Nls => Interaction::Contact(prof.coupling_constant(grid.dim())),
        _ => Interaction::Potential(
            ScaledPotential::sample_scaled(prof, n, cfg.scaling.beta, grid).map_err(|e| e.labeled(format!("N={n}")))?,
        ),
    };
    let mut job = HartreeRun::new(interaction, phi0.clone(), cfg.solver.dt, cfg.solver.t_end);
    job.record_every = cfg.solver.record_every;
    let horizon = wraparound_horizon(&phi0);
    let window = match (cfg.decay.window_start, cfg.decay.window_end) {
        (Some(a), Some(b)) => {
            if b > horizon {
                return Err(Error::Guard(format!("decay window end {b} exceeds the wrap-around horizon {horizon:.3}")));
            }
            Some((a, b))
        }
        _ => None,
    };
    let traj = job.run()?;
    let name = cfg.kind.name();
    let rows: Vec<Vec<f64>> = traj
        .samples
        .iter()
        .map(|s| vec![s.t, s.mass, s.energy, s.linf, s.h_half, s.lap_density])
        .collect();
    let csv_path = out_path(cfg, &format!("{name}_series"), "csv");
    write_atomic(&csv_path, csv(&["t", "mass", "energy", "linf", "h_half", "lap_density"], &rows).as_bytes())?;
    let ck_path = out_path(cfg, &format!("{name}_final"), "mflb");
    checkpoint::save(&ck_path, &traj.final_state)?;

    let first = traj.samples[0];
    let mass_drift = traj.samples.iter().map(|s| (s.mass - first.mass).abs()).fold(0.0, f64::max);
    let energy_drift = traj
        .samples
        .iter()
        .map(|s| (s.energy - first.energy).abs() / first.energy.abs().max(1e-300))
        .fold(0.0, f64::max);
    let decay = match window {
        Some(w) => Some(decay_fit(&traj.linf_series(), w, Some(horizon))?),
        None => None,
    };
    let summary = json!({
        "kind": name,
        "steps": job.steps(),
        "mass_drift": mass_drift,
        "relative_energy_drift": energy_drift,
        "final": traj.samples.last(),
        "horizon": horizon,
        "decay": decay,
        "warnings": traj.warnings,
        "config": cfg,
    });
    let path = out_path(cfg, &format!("{name}_summary"), "json");
    write_json(&path, &summary)?;
    Ok(Artifacts { summary_path: path.clone(), files: vec![path, csv_path, ck_path], summary })
}

fn run_pair(cfg: &ExperimentConfig) -> Result<Artifacts> {
    let grid = grid_of(cfg)?;
    let phi0 = initial_field(cfg, grid)?;
    let n = first_n(cfg)?;
    let v = ScaledPotential::sample_scaled(profile(cfg)?, n, cfg.scaling.beta, grid).map_err(|e| e.labeled(format!("N={n}")))?;
    let job = PairRun {
        dt: cfg.solver.dt,
        t_end: cfg.solver.t_end,
        record_every: cfg.solver.record_every,
        tolerance: cfg.solver.tolerance,
        error_terms_n: Some(n),
    };
    let traj = job.run(PairState::new(phi0, v)?)?;
    let rows: Vec<Vec<f64>> = traj
        .samples
        .iter()
        .map(|s| {
            let e = s.errors.expect("error terms requested");
            vec![s.t, s.s2_l2, s.p2_l2, s.bog_residual, e.q1, e.qd6, e.c1, e.l3]
        })
        .collect();
    let csv_path = out_path(cfg, "pair_series", "csv");
    write_atomic(
        &csv_path,
        csv(&["t", "s2_l2", "p2_l2", "bog_residual", "q1", "qd6", "c1", "l3"], &rows).as_bytes(),
    )?;
    let max = |f: fn(&crate::pairexc::PairSample) -> f64| traj.samples.iter().map(f).fold(0.0, f64::max);
    let summary = json!({
        "kind": "pair",
        "N": n,
        "max_s2_l2": max(|s| s.s2_l2),
        "max_p2_l2": max(|s| s.p2_l2),
        "max_bog_residual": max(|s| s.bog_residual),
        "final": traj.samples.last(),
        "warnings": traj.warnings,
        "config": cfg,
    });
    let path = out_path(cfg, "pair_summary", "json");
    write_json(&path, &summary)?;
    Ok(Artifacts { summary_path: path.clone(), files: vec![path, csv_path], summary })
}

/// Fan the configured `N` list out over a bounded worker pool and aggregate
/// the results into a [`RateReport`].
pub fn sweep(cfg: &ExperimentConfig) -> Result<RateReport> {
    let target = match cfg.kind {
        ExperimentKind::Sweep => cfg.sweep.target,
        k => k,
    };
    if target == ExperimentKind::Fit {
        return fit_file(cfg);
    }
    if cfg.scaling.n.is_empty() {
        return Err(Error::InvalidParameter("empty sweep axis".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.sweep.workers.max(1))
        .build()
        .map_err(|e| Error::InvalidParameter(format!("cannot build worker pool: {e}")))?;
    pool.install(|| match target {
        ExperimentKind::Manybody => sweep_manybody(cfg),
        ExperimentKind::Fock => sweep_fock(cfg),
        ExperimentKind::Pair => sweep_pair(cfg),
        _ => sweep_hartree(cfg),
    })
}

fn sweep_manybody(cfg: &ExperimentConfig) -> Result<RateReport> {
    let grid = Grid::line(cfg.grid.points, cfg.grid.length)?;
    let fit = rate_fit(&RateFitInput {
        grid,
        profile: profile(cfg)?,
        beta: cfg.scaling.beta,
        lambda: cfg.pickl.lambda,
        n_list: cfg.scaling.n.clone(),
        t: cfg.solver.t_end,
        dt: cfg.solver.dt,
        phi0: initial_field(cfg, grid)?,
        memory_cap: cfg.manybody.memory_cap,
        c_v: cfg.pickl.c_v,
    })?;
    let mut warnings = Vec::new();
    if !fit.bound_holds {
        warnings.push(format!("measured alpha exceeds the Pickl bound with C_v = {:.4e}", fit.c_v));
    }
    if fit.calibrated {
        warnings.push(format!("C_v = {:.4e} calibrated at N = {}", fit.c_v, fit.points[0].n));
    }
    let points = fit.points.iter().map(|p| ReportPoint { x: p.n as f64, y: p.trace_distance }).collect();
    RateReport::assemble("manybody", "N", "trace_distance", points, warnings, serde_json::to_value(&fit)?, cfg)
}

fn sweep_fock(cfg: &ExperimentConfig) -> Result<RateReport> {
    let grid = Grid::line(cfg.fock.modes, cfg.grid.length)?;
    let every = cfg.solver.record_every as f64 * cfg.solver.dt;
    let count = (cfg.solver.t_end / every).round().max(1.0) as usize;
    let times: Vec<f64> = (1..=count).map(|i| i as f64 * every).collect();
    let res = fock_error_scaling(&FockScalingInput {
        profile: profile(cfg)?,
        beta: cfg.scaling.beta,
        phi0: initial_field(cfg, grid)?,
        n_max: cfg.fock.n_max,
        leakage_threshold: cfg.fock.leakage_threshold,
        n_list: cfg.scaling.n.clone(),
        times,
        dt: cfg.solver.dt,
    })?;
    let mut warnings = Vec::new();
    for p in res.points.iter().filter(|p| p.ill_conditioned) {
        warnings.push(format!("half-angle recovery ill-conditioned at N={}", p.n));
    }
    let details: Vec<serde_json::Value> = res
        .points
        .iter()
        .map(|p| {
            json!({
                "N": p.n,
                "dim_fock": p.dim_fock,
                "leakage": p.leakage,
                "distance": p.final_distance(),
                "times": p.times,
                "distances": p.distances,
            })
        })
        .collect();
    let points = res.points.iter().map(|p| ReportPoint { x: p.n as f64, y: p.final_distance() }).collect();
    let details = json!({ "points": details, "slope": res.slope.map(|f| f.slope) });
    RateReport::assemble("fock", "N", "fock_distance", points, warnings, details, cfg)
}

fn sweep_pair(cfg: &ExperimentConfig) -> Result<RateReport> {
    let grid = grid_of(cfg)?;
    let phi0 = initial_field(cfg, grid)?;
    let prof = profile(cfg)?;
    let job = PairRun {
        dt: cfg.solver.dt,
        t_end: cfg.solver.t_end,
        record_every: usize::MAX,
        tolerance: cfg.solver.tolerance,
        error_terms_n: None,
    };
    let rows: Vec<(usize, crate::pairexc::ErrorTerms)> = cfg
        .scaling
        .n
        .par_iter()
        .map(|&n| {
            let label = |e: Error| e.labeled(format!("N={n}"));
            let v = ScaledPotential::sample_scaled(prof, n, cfg.scaling.beta, grid).map_err(label)?;
            let traj = job.run(PairState::new(phi0.clone(), v)?).map_err(label)?;
            Ok((n, error_term_norms(&traj.final_state, n).map_err(label)?))
        })
        .collect::<Result<_>>()?;
    let mut warnings = Vec::new();
    if rows.iter().any(|r| r.1.ill_conditioned) {
        warnings.push("half-angle recovery ill-conditioned for some N".into());
    }
    let points = rows.iter().map(|(n, e)| ReportPoint { x: *n as f64, y: e.q1 }).collect();
    let details: Vec<serde_json::Value> =
        rows.iter().map(|(n, e)| json!({ "N": n, "q1": e.q1, "qd6": e.qd6, "c1": e.c1, "l3": e.l3 })).collect();
    RateReport::assemble("pair", "N", "q1", points, warnings, json!(details), cfg)
}

fn sweep_hartree(cfg: &ExperimentConfig) -> Result<RateReport> {
    let grid = grid_of(cfg)?;
    let phi0 = initial_field(cfg, grid)?;
    let prof = profile(cfg)?;
    let steps = (cfg.solver.t_end / cfg.solver.dt).round() as usize;
    let nls = crate::hartree::evolve(&phi0, &Interaction::Contact(prof.coupling_constant(grid.dim())), cfg.solver.dt, steps)?;
    let rows: Vec<(usize, f64)> = cfg
        .scaling
        .n
        .par_iter()
        .map(|&n| {
            let label = |e: Error| e.labeled(format!("N={n}"));
            let v = ScaledPotential::sample_scaled(prof, n, cfg.scaling.beta, grid).map_err(label)?;
            let phi = crate::hartree::evolve(&phi0, &Interaction::Potential(v), cfg.solver.dt, steps).map_err(label)?;
            Ok((n, phi.l2_distance(&nls)?))
        })
        .collect::<Result<_>>()?;
    let points = rows.iter().map(|&(n, d)| ReportPoint { x: n as f64, y: d }).collect();
    RateReport::assemble("hartree", "N", "distance_to_nls", points, Vec::new(), json!(rows), cfg)
}

/// Fit the first two numeric columns of a CSV file (header lines skipped).
fn fit_file(cfg: &ExperimentConfig) -> Result<RateReport> {
    let path = cfg.fit.input.as_ref().ok_or_else(|| Error::InvalidParameter("fit experiments need fit.input".into()))?;
    let text = std::fs::read_to_string(path)?;
    let mut points = Vec::new();
    for line in text.lines() {
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        if cols.len() < 2 {
            continue;
        }
        if let (Ok(x), Ok(y)) = (cols[0].parse::<f64>(), cols[1].parse::<f64>()) {
            points.push(ReportPoint { x, y });
        }
    }
    if points.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "{} holds {} numeric rows; a fit needs at least 2",
            path.display(),
            points.len()
        )));
    }
    if let Some(p) = points.iter().find(|p| !(p.x > 0.0 && p.y > 0.0)) {
        return Err(Error::InvalidParameter(format!("log-log fit requires strictly positive data, got ({}, {})", p.x, p.y)));
    }
    RateReport::assemble("fit", "x", "y", points, Vec::new(), serde_json::Value::Null, cfg)
}
