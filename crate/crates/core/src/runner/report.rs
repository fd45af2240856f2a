//! Aggregated sweep results.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::runner::config::ExperimentConfig;
use crate::runner::fit::{is_reliable, loglog_fit, LogLogFit};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportPoint {
    pub x: f64,
    pub y: f64,
}

/// Per-point scalars of a sweep, the fitted power law and every warning met.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub target: String,
    /// Name of the swept parameter (`N`, or `x` for external data).
    pub parameter: String,
    /// Name of the fitted quantity.
    pub quantity: String,
    pub points: Vec<ReportPoint>,
    pub fit: Option<LogLogFit>,
    /// False with fewer than three points or a residual above the threshold.
    pub reliable: bool,
    pub warnings: Vec<String>,
    /// Target-specific per-point data.
    pub details: serde_json::Value,
    pub config: ExperimentConfig,
}

impl RateReport {
    /// Fit `points` (skipping the fit when any value is non-positive) and
    /// judge reliability against `max_residual`.
    pub fn assemble(
        target: &str,
        parameter: &str,
        quantity: &str,
        points: Vec<ReportPoint>,
        mut warnings: Vec<String>,
        details: serde_json::Value,
        config: &ExperimentConfig,
    ) -> Result<Self> {
        let pts: Vec<(f64, f64)> = points.iter().map(|p| (p.x, p.y)).collect();
        let fit = if pts.len() >= 2 && pts.iter().all(|&(x, y)| x > 0.0 && y > 0.0) {
            Some(loglog_fit(&pts)?)
        } else {
            warnings.push(format!("no fit: {quantity} needs at least two strictly positive points"));
            None
        };
        let reliable = fit.is_some_and(|f| is_reliable(&f, pts.len(), config.sweep.max_residual));
        if fit.is_some() && !reliable {
            warnings.push("slope unreliable: too few points or residual above sweep.max_residual".into());
        }
        Ok(RateReport {
            target: target.into(),
            parameter: parameter.into(),
            quantity: quantity.into(),
            points,
            fit,
            reliable,
            warnings,
            details,
            config: config.clone(),
        })
    }
}
