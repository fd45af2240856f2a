//! Line-oriented experiment configuration.
//!
//! ```text
//! # comment
//! experiment.kind = hartree
//! grid.points = 512
//! scaling.N = 2, 3, 4
//! ```
//!
//! Every violation (unknown key, bad value, failed guard) is collected with
//! its line number; nothing is launched unless the whole file is valid.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::potential::{Profile, Sign};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Hartree,
    Nls,
    Pair,
    Manybody,
    Fock,
    Sweep,
    Fit,
}

impl ExperimentKind {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "hartree" => Self::Hartree,
            "nls" => Self::Nls,
            "pair" => Self::Pair,
            "manybody" => Self::Manybody,
            "fock" => Self::Fock,
            "sweep" => Self::Sweep,
            "fit" => Self::Fit,
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Hartree => "hartree",
            Self::Nls => "nls",
            Self::Pair => "pair",
            Self::Manybody => "manybody",
            Self::Fock => "fock",
            Self::Sweep => "sweep",
            Self::Fit => "fit",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub dim: usize,
    pub points: usize,
    pub length: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialConfig {
    pub kind: String,
    pub amplitude: f64,
    pub radius: f64,
    pub sign: Sign,
}

impl PotentialConfig {
    pub fn profile(&self) -> crate::error::Result<Profile> {
        match self.kind.as_str() {
            "zero" => Ok(Profile::Zero),
            _ => Profile::bump(self.amplitude, self.radius, self.sign),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingConfig {
    #[serde(rename = "N")]
    pub n: Vec<usize>,
    pub beta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub dt: f64,
    pub t_end: f64,
    pub record_every: usize,
    pub tolerance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitialConfig {
    /// `gaussian` or `sech`.
    pub kind: String,
    pub width: f64,
    /// L² norm of the initial datum.
    pub norm: f64,
    pub center: f64,
    pub momentum: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub prefix: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayConfig {
    pub window_start: Option<f64>,
    pub window_end: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FockConfig {
    pub modes: usize,
    pub n_max: usize,
    pub leakage_threshold: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManybodyConfig {
    pub memory_cap: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PicklConfig {
    pub lambda: f64,
    /// Fixed constant for the bound; calibrated at the smallest N when absent.
    pub c_v: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub target: ExperimentKind,
    pub workers: usize,
    pub max_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub input: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub grid: GridConfig,
    pub potential: PotentialConfig,
    pub scaling: ScalingConfig,
    pub solver: SolverConfig,
    pub initial: InitialConfig,
    pub output: OutputConfig,
    pub decay: DecayConfig,
    pub fock: FockConfig,
    pub manybody: ManybodyConfig,
    pub pickl: PicklConfig,
    pub sweep: SweepConfig,
    pub fit: FitConfig,
    pub seed: u64,
}

pub const DEFAULT_MEMORY_CAP: u64 = 1 << 30;

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            kind: ExperimentKind::Hartree,
            grid: GridConfig { dim: 1, points: 256, length: 40.0 },
            potential: PotentialConfig {
                kind: "bump".into(),
                amplitude: 1.0,
                radius: 1.0,
                sign: Sign::Attractive,
            },
            scaling: ScalingConfig { n: vec![1], beta: 0.0 },
            solver: SolverConfig { dt: 1e-3, t_end: 1.0, record_every: 10, tolerance: 1e-5 },
            initial: InitialConfig {
                kind: "gaussian".into(),
                width: 1.0,
                norm: 1.0,
                center: 0.0,
                momentum: 0.0,
            },
            output: OutputConfig { dir: "out".into(), prefix: String::new() },
            decay: DecayConfig { window_start: None, window_end: None },
            fock: FockConfig { modes: 6, n_max: 12, leakage_threshold: 1e-3 },
            manybody: ManybodyConfig { memory_cap: DEFAULT_MEMORY_CAP },
            pickl: PicklConfig { lambda: 1.0, c_v: None },
            sweep: SweepConfig { target: ExperimentKind::Manybody, workers: 2, max_residual: 0.1 },
            fit: FitConfig { input: None },
            seed: 0,
        }
    }
}

/// One problem found in a configuration; line 0 means "defaults / global".
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigViolation {
    pub line: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigErrors {
    pub violations: Vec<ConfigViolation>,
}

impl ConfigErrors {
    /// The first violation whose message contains `needle`.
    pub fn find(&self, needle: &str) -> Option<&ConfigViolation> {
        self.violations.iter().find(|v| v.message.contains(needle))
    }

    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .violations
            .iter()
            .map(|v| {
                if v.line == 0 {
                    v.message.clone()
                } else {
                    format!("line {}: {}", v.line, v.message)
                }
            })
            .collect();
        write!(f, "invalid configuration: {}", parts.join("; "))
    }
}

impl std::error::Error for ConfigErrors {}

struct Parser {
    cfg: ExperimentConfig,
    errors: Vec<ConfigViolation>,
    lines: BTreeMap<String, usize>,
}

fn parse_f64(v: &str) -> Result<f64, String> {
    match v.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(format!("expected a finite number, got '{v}'")),
    }
}

fn parse_usize(v: &str) -> Result<usize, String> {
    v.parse::<usize>()
        .map_err(|_| format!("expected a non-negative integer, got '{v}'"))
}

fn parse_u64(v: &str) -> Result<u64, String> {
    v.parse::<u64>()
        .map_err(|_| format!("expected a non-negative integer, got '{v}'"))
}

fn parse_list(v: &str) -> Result<Vec<usize>, String> {
    if v.trim().is_empty() {
        return Ok(Vec::new());
    }
    v.split(',').map(|s| parse_usize(s.trim())).collect()
}

impl Parser {
    fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let c = &mut self.cfg;
        match key {
            "experiment.kind" => {
                c.kind = ExperimentKind::parse(value)
                    .ok_or_else(|| format!("unknown experiment kind '{value}'"))?
            }
            "grid.dim" => c.grid.dim = parse_usize(value)?,
            "grid.points" => c.grid.points = parse_usize(value)?,
            "grid.length" => c.grid.length = parse_f64(value)?,
            "potential.kind" => match value {
                "bump" | "zero" => c.potential.kind = value.into(),
                _ => return Err(format!("unknown potential kind '{value}' (bump | zero)")),
            },
            "potential.amplitude" => c.potential.amplitude = parse_f64(value)?,
            "potential.radius" => c.potential.radius = parse_f64(value)?,
            "potential.sign" => {
                c.potential.sign = match value {
                    "attractive" => Sign::Attractive,
                    "repulsive" => Sign::Repulsive,
                    _ => return Err(format!("unknown sign '{value}' (attractive | repulsive)")),
                }
            }
            "scaling.N" => c.scaling.n = parse_list(value)?,
            "scaling.beta" => c.scaling.beta = parse_f64(value)?,
            "solver.dt" => c.solver.dt = parse_f64(value)?,
            "solver.t_end" => c.solver.t_end = parse_f64(value)?,
            "solver.record_every" => c.solver.record_every = parse_usize(value)?,
            "solver.tolerance" => c.solver.tolerance = parse_f64(value)?,
            "initial.kind" => match value {
                "gaussian" | "sech" => c.initial.kind = value.into(),
                _ => return Err(format!("unknown initial kind '{value}' (gaussian | sech)")),
            },
            "initial.width" => c.initial.width = parse_f64(value)?,
            "initial.norm" => c.initial.norm = parse_f64(value)?,
            "initial.center" => c.initial.center = parse_f64(value)?,
            "initial.momentum" => c.initial.momentum = parse_f64(value)?,
            "output.dir" => c.output.dir = value.into(),
            "output.prefix" => c.output.prefix = value.into(),
            "decay.window_start" => c.decay.window_start = Some(parse_f64(value)?),
            "decay.window_end" => c.decay.window_end = Some(parse_f64(value)?),
            "fock.modes" => c.fock.modes = parse_usize(value)?,
            "fock.n_max" => c.fock.n_max = parse_usize(value)?,
            "fock.leakage_threshold" => c.fock.leakage_threshold = parse_f64(value)?,
            "manybody.memory_cap" => c.manybody.memory_cap = parse_u64(value)?,
            "pickl.lambda" => c.pickl.lambda = parse_f64(value)?,
            "pickl.c_v" => c.pickl.c_v = Some(parse_f64(value)?),
            "sweep.target" => {
                c.sweep.target = ExperimentKind::parse(value)
                    .filter(|k| matches!(k, ExperimentKind::Manybody | ExperimentKind::Fock | ExperimentKind::Hartree | ExperimentKind::Pair))
                    .ok_or_else(|| format!("sweep target must be manybody, fock, hartree or pair, got '{value}'"))?
            }
            "sweep.workers" => c.sweep.workers = parse_usize(value)?,
            "sweep.max_residual" => c.sweep.max_residual = parse_f64(value)?,
            "fit.input" => c.fit.input = Some(value.into()),
            "seed" => c.seed = parse_u64(value)?,
            _ => return Err(format!("unknown key '{key}'")),
        }
        Ok(())
    }

    fn line_of(&self, key: &str) -> usize {
        self.lines.get(key).copied().unwrap_or(0)
    }

    fn guard(&mut self, ok: bool, key: &str, message: impl Into<String>) {
        if !ok {
            let line = self.line_of(key);
            self.errors.push(ConfigViolation { line, message: message.into() });
        }
    }

    fn validate(&mut self) {
        let c = self.cfg.clone();
        self.guard((1..=3).contains(&c.grid.dim), "grid.dim", format!("grid.dim must be 1, 2 or 3, got {}", c.grid.dim));
        self.guard(
            c.grid.points >= 2 && c.grid.points % 2 == 0,
            "grid.points",
            format!("grid.points must be even and at least 2, got {}", c.grid.points),
        );
        self.guard(c.grid.length > 0.0, "grid.length", format!("grid.length must be positive, got {}", c.grid.length));
        self.guard(
            (0.0..=1.0).contains(&c.scaling.beta),
            "scaling.beta",
            format!("scaling.beta = {} is out of [0,1]", c.scaling.beta),
        );
        self.guard(!c.scaling.n.is_empty(), "scaling.N", "empty sweep axis");
        self.guard(c.scaling.n.iter().all(|&n| n >= 1), "scaling.N", "scaling.N entries must be at least 1");
        self.guard(c.solver.dt > 0.0, "solver.dt", format!("solver.dt must be positive, got {}", c.solver.dt));
        self.guard(c.solver.t_end >= 0.0, "solver.t_end", format!("solver.t_end must be non-negative, got {}", c.solver.t_end));
        self.guard(c.solver.record_every >= 1, "solver.record_every", "solver.record_every must be at least 1");
        self.guard(c.solver.tolerance > 0.0, "solver.tolerance", "solver.tolerance must be positive");
        self.guard(c.initial.width > 0.0, "initial.width", "initial.width must be positive");
        self.guard(c.initial.norm > 0.0, "initial.norm", "initial.norm must be positive");
        self.guard(
            c.potential.kind == "zero" || (c.potential.amplitude >= 0.0 && c.potential.radius > 0.0),
            "potential.radius",
            "bump potentials need amplitude >= 0 and radius > 0",
        );
        self.guard(
            c.pickl.lambda > 0.0 && c.pickl.lambda <= 1.0,
            "pickl.lambda",
            format!("pickl.lambda must lie in (0,1], got {}", c.pickl.lambda),
        );
        self.guard(c.sweep.workers >= 1, "sweep.workers", "sweep.workers must be at least 1");

        let target = if c.kind == ExperimentKind::Sweep { c.sweep.target } else { c.kind };
        if matches!(target, ExperimentKind::Pair | ExperimentKind::Manybody | ExperimentKind::Fock) {
            self.guard(c.grid.dim == 1, "grid.dim", format!("{} experiments are one-dimensional", target.name()));
        }
        if target == ExperimentKind::Manybody {
            self.guard(
                c.scaling.n.iter().all(|&n| (2..=5).contains(&n)),
                "scaling.N",
                "manybody runs need 2 <= N <= 5",
            );
            if let Some(&nmax) = c.scaling.n.iter().max() {
                let bytes = crate::manybody::state_bytes(c.grid.points, nmax);
                self.guard(
                    bytes.is_some_and(|b| b <= c.manybody.memory_cap),
                    "grid.points",
                    format!(
                        "memory guard: a manybody state with M={} and N={nmax} needs {} bytes (16·M^N), cap is {}",
                        c.grid.points,
                        bytes.map_or("more than 2^64".to_string(), |b| b.to_string()),
                        c.manybody.memory_cap
                    ),
                );
            }
        }
        if target == ExperimentKind::Fock {
            self.guard(
                (2..=12).contains(&c.fock.modes) && c.fock.modes % 2 == 0,
                "fock.modes",
                format!("fock.modes must be even and in [2,12], got {}", c.fock.modes),
            );
            self.guard(
                (1..=16).contains(&c.fock.n_max),
                "fock.n_max",
                format!("fock.n_max must be in [1,16], got {}", c.fock.n_max),
            );
        }
        if c.kind == ExperimentKind::Fit {
            self.guard(c.fit.input.is_some(), "fit.input", "fit experiments need fit.input");
        }
        if let (Some(a), Some(b)) = (c.decay.window_start, c.decay.window_end) {
            self.guard(a > 0.0 && b > a, "decay.window_end", "decay window must satisfy 0 < start < end");
        }
    }
}

/// Parse and validate a configuration document.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigErrors> {
    parse_config_with_overrides(text, &[])
}

/// As [`parse_config`], then apply `key=value` overrides (reported as lines
/// after the end of the document).
pub fn parse_config_with_overrides(text: &str, overrides: &[String]) -> Result<ExperimentConfig, ConfigErrors> {
    let mut p = Parser {
        cfg: ExperimentConfig::default(),
        errors: Vec::new(),
        lines: BTreeMap::new(),
    };
    let doc_lines = text.lines().count();
    let all = text
        .lines()
        .map(str::to_string)
        .chain(overrides.iter().cloned())
        .enumerate();
    for (i, raw) in all {
        let lineno = i + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => &raw[..],
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            p.errors.push(ConfigViolation {
                line: lineno,
                message: format!("expected 'key = value', got '{line}'"),
            });
            continue;
        };
        let (key, value) = (key.trim(), value.trim());
        if lineno <= doc_lines {
            if let Some(prev) = p.lines.get(key) {
                p.errors.push(ConfigViolation {
                    line: lineno,
                    message: format!("duplicate key '{key}' (first set on line {prev})"),
                });
                continue;
            }
        }
        match p.set(key, value) {
            Ok(()) => {
                p.lines.insert(key.to_string(), lineno);
            }
            Err(message) => p.errors.push(ConfigViolation { line: lineno, message }),
        }
    }
    p.validate();
    if p.errors.is_empty() {
        Ok(p.cfg)
    } else {
        Err(ConfigErrors { violations: p.errors })
    }
}
