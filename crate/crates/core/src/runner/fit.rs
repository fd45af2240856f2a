//! Power-law fits on log–log axes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of `log y` about the fitted line.
    pub residual: f64,
}

/// Least squares `log y = slope·log x + intercept`.
pub fn loglog_fit(points: &[(f64, f64)]) -> Result<LogLogFit> {
    if points.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "a log-log fit needs at least 2 points, got {}",
            points.len()
        )));
    }
    if let Some(&(x, y)) = points.iter().find(|&&(x, y)| !(x > 0.0 && y > 0.0)) {
        return Err(Error::InvalidParameter(format!(
            "log-log fit requires strictly positive data, got ({x}, {y})"
        )));
    }
    let n = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("log-log fit needs distinct x values".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (y - slope * x - intercept).powi(2))
        .sum();
    Ok(LogLogFit {
        slope,
        intercept,
        residual: (ss / n).sqrt(),
    })
}

/// Minimum number of points before a slope is reported as reliable.
pub const MIN_RELIABLE_POINTS: usize = 3;

/// A slope is trusted only with enough points and a small residual.
pub fn is_reliable(fit: &LogLogFit, points: usize, max_residual: f64) -> bool {
    points >= MIN_RELIABLE_POINTS && fit.residual <= max_residual
}
