//! Operator hyperbolic functions of a pair-excitation kernel.
//!
//! `sh(k) = k + k∘k̄∘k/3! + …` and `ch(k) = δ + k̄∘k/2! + …`, summed until the
//! next term is negligible.

use crate::error::{Error, Result};
use crate::spectral::Kernel;
use crate::C64;

pub const DEFAULT_SERIES_TOL: f64 = 1e-12;
pub const MAX_SERIES_TERMS: usize = 40;

/// Partial sum of `sh(k)`.
pub fn sh_series(k: &Kernel, tol: f64) -> Result<Kernel> {
    let kk = k.conj().compose(k)?;
    let mut term = k.clone();
    let mut sum = k.clone();
    for n in 1..MAX_SERIES_TERMS {
        if term.l2() < tol {
            return Ok(sum);
        }
        let f = 1.0 / ((2 * n) * (2 * n + 1)) as f64;
        term = term.compose(&kk)?.scaled(C64::new(f, 0.0));
        sum.axpy(C64::new(1.0, 0.0), &term)?;
    }
    if term.l2() < tol {
        return Ok(sum);
    }
    Err(Error::SeriesDiverged {
        terms: MAX_SERIES_TERMS,
        last_norm: term.l2(),
    })
}

/// Partial sum of `ch(k) - δ`.
pub fn ch_series(k: &Kernel, tol: f64) -> Result<Kernel> {
    let kk = k.conj().compose(k)?;
    let mut term = kk.scaled(C64::new(0.5, 0.0));
    let mut sum = term.clone();
    for n in 2..=MAX_SERIES_TERMS {
        if term.l2() < tol {
            return Ok(sum);
        }
        let f = 1.0 / ((2 * n - 1) * (2 * n)) as f64;
        term = term.compose(&kk)?.scaled(C64::new(f, 0.0));
        sum.axpy(C64::new(1.0, 0.0), &term)?;
    }
    if term.l2() < tol {
        return Ok(sum);
    }
    Err(Error::SeriesDiverged {
        terms: MAX_SERIES_TERMS,
        last_norm: term.l2(),
    })
}

/// `‖2p + p∘p − s̄∘s‖`, the defect of `ch∘ch − s̄h∘sh = δ` written for
/// `ch = δ + p`, `sh = s`.
pub fn hyperbolic_residual(s: &Kernel, p: &Kernel) -> Result<f64> {
    let mut r = p.scaled(C64::new(2.0, 0.0));
    r.axpy(C64::new(1.0, 0.0), &p.compose(p)?)?;
    r.axpy(C64::new(-1.0, 0.0), &s.conj().compose(s)?)?;
    Ok(r.l2())
}
