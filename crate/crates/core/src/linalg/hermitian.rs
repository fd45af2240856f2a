//! Cyclic Jacobi eigensolver for dense complex Hermitian matrices.

use crate::error::{Error, Result};
use crate::C64;

const MAX_SWEEPS: usize = 100;
pub const JACOBI_TOL: f64 = 1e-12;

/// Eigen-decomposition `A = V diag(λ) V*`, eigenvalues ascending.
///
/// `vectors` is row-major `n×n`; column `j` holds the eigenvector of `values[j]`.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<C64>,
    n: usize,
}

impl HermitianEigen {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn vector(&self, j: usize) -> Vec<C64> {
        (0..self.n).map(|i| self.vectors[i * self.n + j]).collect()
    }

    /// `V diag(f(λ)) V*`.
    pub fn apply_fn(&self, f: impl Fn(f64) -> C64) -> Vec<C64> {
        let n = self.n;
        let fl: Vec<C64> = self.values.iter().map(|&l| f(l)).collect();
        let mut out = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for k in 0..n {
                let vik = self.vectors[i * n + k] * fl[k];
                if vik == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out[i * n + j] += vik * self.vectors[j * n + k].conj();
                }
            }
        }
        out
    }

    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    pub fn abs_sum(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum()
    }
}

fn off_norm(a: &[C64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[i * n + j].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Diagonalize a Hermitian matrix given row-major. Only Hermitian input is
/// meaningful; the strictly lower triangle is taken as the conjugate of the upper.
pub fn eigh(matrix: &[C64], n: usize) -> Result<HermitianEigen> {
    if matrix.len() != n * n {
        return Err(Error::InvalidParameter(format!(
            "matrix has {} entries, expected {}",
            matrix.len(),
            n * n
        )));
    }
    let mut a = vec![C64::new(0.0, 0.0); n * n];
    for i in 0..n {
        a[i * n + i] = C64::new(matrix[i * n + i].re, 0.0);
        for j in i + 1..n {
            let v = 0.5 * (matrix[i * n + j] + matrix[j * n + i].conj());
            a[i * n + j] = v;
            a[j * n + i] = v.conj();
        }
    }
    let mut v = vec![C64::new(0.0, 0.0); n * n];
    for i in 0..n {
        v[i * n + i] = C64::new(1.0, 0.0);
    }
    let scale = a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    let target = JACOBI_TOL * scale.max(1.0);

    let mut converged = off_norm(&a, n) <= target;
    let mut sweep = 0;
    while !converged {
        if sweep == MAX_SWEEPS {
            return Err(Error::Numerical(format!(
                "Jacobi eigensolver did not converge in {MAX_SWEEPS} sweeps (off-diagonal {:.3e})",
                off_norm(&a, n)
            )));
        }
        sweep += 1;
        for p in 0..n {
            for q in p + 1..n {
                let g = a[p * n + q];
                let gabs = g.norm();
                if gabs <= f64::MIN_POSITIVE || gabs < 1e-300 {
                    continue;
                }
                let app = a[p * n + p].re;
                let aqq = a[q * n + q].re;
                // Skip entries that are negligible against the diagonal.
                if sweep > 4 && gabs < 1e-18 * (app.abs() + aqq.abs()) {
                    a[p * n + q] = C64::new(0.0, 0.0);
                    a[q * n + p] = C64::new(0.0, 0.0);
                    continue;
                }
                let ph = g / gabs; // e^{iθ}
                let tau = (aqq - app) / (2.0 * gabs);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let sph = s * ph.conj(); // s e^{-iθ}
                // A ← A U on columns p, q.
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - sph * akq;
                    a[k * n + q] = s * akp + c * ph.conj() * akq;
                }
                // A ← U* A on rows p, q.
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - sph.conj() * aqk;
                    a[q * n + k] = s * apk + c * ph * aqk;
                }
                a[p * n + q] = C64::new(0.0, 0.0);
                a[q * n + p] = C64::new(0.0, 0.0);
                a[p * n + p].im = 0.0;
                a[q * n + q].im = 0.0;
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - sph * vkq;
                    v[k * n + q] = s * vkp + c * ph.conj() * vkq;
                }
            }
        }
        converged = off_norm(&a, n) <= target;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].re.total_cmp(&a[j * n + j].re));
    let values = order.iter().map(|&i| a[i * n + i].re).collect();
    let mut vectors = vec![C64::new(0.0, 0.0); n * n];
    for (new, &old) in order.iter().enumerate() {
        for k in 0..n {
            vectors[k * n + new] = v[k * n + old];
        }
    }
    Ok(HermitianEigen { values, vectors, n })
}
