//! Lanczos propagation `v ↦ e^{-itA} v` for Hermitian `A`.

use crate::error::{Error, Result};
use crate::C64;

pub const DEFAULT_KRYLOV_TOL: f64 = 1e-10;
const MAX_BASIS: usize = 40;
const MAX_SUBSTEPS: usize = 100_000;

#[derive(Clone, Copy, Debug, Default)]
pub struct KrylovStats {
    pub substeps: usize,
    pub matvecs: usize,
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// First column of `e^{-isT}` for the symmetric tridiagonal `T`, by
/// scaling and squaring a Taylor series. Unlike an eigendecomposition this
/// keeps tiny trailing entries accurate, which the step-size control needs.
fn tridiag_exp_first_column(alpha: &[f64], beta: &[f64], s: f64) -> Vec<C64> {
    let m = alpha.len();
    let zero = C64::new(0.0, 0.0);
    let mut a = vec![zero; m * m];
    for i in 0..m {
        a[i * m + i] = C64::new(0.0, -s * alpha[i]);
        if i + 1 < m {
            a[i * m + i + 1] = C64::new(0.0, -s * beta[i]);
            a[(i + 1) * m + i] = C64::new(0.0, -s * beta[i]);
        }
    }
    let norm1 = (0..m).map(|j| (0..m).map(|i| a[i * m + j].norm()).sum::<f64>()).fold(0.0, f64::max);
    let squarings = if norm1 > 0.5 { (norm1 / 0.5).log2().ceil() as i32 } else { 0 };
    let scale = 0.5f64.powi(squarings);
    a.iter_mut().for_each(|z| *z *= scale);
    let matmul = |x: &[C64], y: &[C64]| {
        let mut out = vec![zero; m * m];
        for i in 0..m {
            for k in 0..m {
                let xik = x[i * m + k];
                if xik == zero {
                    continue;
                }
                for j in 0..m {
                    out[i * m + j] += xik * y[k * m + j];
                }
            }
        }
        out
    };
    let mut e = vec![zero; m * m];
    let mut term = vec![zero; m * m];
    for i in 0..m {
        e[i * m + i] = C64::new(1.0, 0.0);
        term[i * m + i] = C64::new(1.0, 0.0);
    }
    for k in 1..=24 {
        term = matmul(&term, &a);
        term.iter_mut().for_each(|z| *z /= k as f64);
        e.iter_mut().zip(&term).for_each(|(x, y)| *x += y);
    }
    for _ in 0..squarings {
        e = matmul(&e, &e);
    }
    (0..m).map(|i| e[i * m]).collect()
}

/// Compute `e^{-itA} v` where `apply(x, y)` writes `y = A x`.
///
/// The time interval is split adaptively so that the a-posteriori Lanczos
/// error estimate stays below `tol` over the whole interval.
pub fn expm_hermitian(
    apply: impl Fn(&[C64], &mut [C64]),
    v: &[C64],
    t: f64,
    tol: f64,
) -> Result<(Vec<C64>, KrylovStats)> {
    let n = v.len();
    let mut stats = KrylovStats::default();
    let mut w = v.to_vec();
    if t == 0.0 || n == 0 {
        return Ok((w, stats));
    }
    let total = t.abs();
    let sign = t.signum();
    let mut done = 0.0;
    let mut tau = total;

    while done < total * (1.0 - 1e-15) {
        let beta0 = norm(&w);
        if beta0 == 0.0 {
            break;
        }
        // Lanczos with full reorthogonalization.
        let mut basis: Vec<Vec<C64>> = vec![w.iter().map(|x| x / beta0).collect()];
        let mut alpha = Vec::new();
        let mut beta = Vec::new();
        let mut y = vec![C64::new(0.0, 0.0); n];
        let mut breakdown = false;
        for j in 0..MAX_BASIS.min(n) {
            apply(&basis[j], &mut y);
            stats.matvecs += 1;
            let a = dot(&basis[j], &y).re;
            alpha.push(a);
            for q in &basis {
                let c = dot(q, &y);
                y.iter_mut().zip(q).for_each(|(yi, qi)| *yi -= c * qi);
            }
            let b = norm(&y);
            beta.push(b);
            if b < 1e-13 * (a.abs() + 1.0) {
                breakdown = true;
                break;
            }
            if j + 1 < MAX_BASIS.min(n) {
                basis.push(y.iter().map(|x| x / b).collect());
            }
        }
        let m = alpha.len();
        let coeffs = |s: f64| tridiag_exp_first_column(&alpha, &beta, s);
        tau = tau.min(total - done);
        let mut c = coeffs(sign * tau);
        if !breakdown {
            let mut halvings = 0;
            loop {
                let err = beta[m - 1] * c[m - 1].norm() * beta0;
                if err <= tol * tau / total {
                    break;
                }
                tau *= 0.5;
                halvings += 1;
                if halvings > 60 {
                    return Err(Error::Numerical("Krylov step size underflow".into()));
                }
                c = coeffs(sign * tau);
            }
        }
        let mut next = vec![C64::new(0.0, 0.0); n];
        for (q, ci) in basis.iter().zip(&c) {
            let f = ci * beta0;
            next.iter_mut().zip(q).for_each(|(x, qi)| *x += f * qi);
        }
        w = next;
        done += tau;
        stats.substeps += 1;
        if stats.substeps > MAX_SUBSTEPS {
            return Err(Error::Numerical("Krylov propagation exceeded substep budget".into()));
        }
        // Let the step grow again after a successful cheap step.
        tau *= 2.0;
    }
    Ok((w, stats))
}
