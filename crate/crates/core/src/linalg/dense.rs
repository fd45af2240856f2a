//! Dense complex LU with partial pivoting.

use crate::error::{Error, Result};
use crate::C64;

#[derive(Clone, Debug)]
pub struct Lu {
    n: usize,
    lu: Vec<C64>,
    perm: Vec<usize>,
}

impl Lu {
    /// Factor a row-major `n×n` matrix.
    pub fn factor(mut a: Vec<C64>, n: usize) -> Result<Lu> {
        if a.len() != n * n {
            return Err(Error::InvalidParameter("LU input is not square".into()));
        }
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (piv, pmax) = (k..n)
                .map(|i| (i, a[i * n + k].norm()))
                .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if pmax == 0.0 {
                return Err(Error::Numerical("singular matrix in LU".into()));
            }
            if piv != k {
                for j in 0..n {
                    a.swap(k * n + j, piv * n + j);
                }
                perm.swap(k, piv);
            }
            let inv = 1.0 / a[k * n + k];
            let (top, bottom) = a.split_at_mut((k + 1) * n);
            let pivot_row = &top[k * n..(k + 1) * n];
            for row in bottom.chunks_mut(n) {
                let f = row[k] * inv;
                row[k] = f;
                if f == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in k + 1..n {
                    row[j] -= f * pivot_row[j];
                }
            }
        }
        Ok(Lu { n, lu: a, perm })
    }

    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        let n = self.n;
        let mut x: Vec<C64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s / self.lu[i * n + i];
        }
        x
    }
}

/// Row-major dense matrix–vector product.
pub fn matvec(a: &[C64], x: &[C64]) -> Vec<C64> {
    let n = x.len();
    a.chunks(n)
        .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_system() {
        let a = vec![
            C64::new(2.0, 1.0),
            C64::new(0.0, 1.0),
            C64::new(1.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(1.0, 0.0),
            C64::new(3.0, 0.0),
            C64::new(4.0, 0.0),
            C64::new(0.0, -1.0),
            C64::new(1.0, 1.0),
        ];
        let x = vec![C64::new(1.0, 0.0), C64::new(-2.0, 0.5), C64::new(0.0, 3.0)];
        let b = matvec(&a, &x);
        let lu = Lu::factor(a, 3).unwrap();
        let y = lu.solve(&b);
        for (u, v) in x.iter().zip(&y) {
            assert!((u - v).norm() < 1e-12);
        }
    }
}
