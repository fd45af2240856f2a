//! Compressed sparse row matrices over `C64`.

use rayon::prelude::*;

use crate::C64;

#[derive(Clone, Debug, PartialEq)]
pub struct Csr {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    data: Vec<C64>,
}

impl Csr {
    /// Assemble from `(row, col, value)` triplets; duplicates are summed and
    /// exact zeros dropped.
    pub fn from_triplets(rows: usize, cols: usize, mut trip: Vec<(usize, usize, C64)>) -> Csr {
        trip.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut indptr = vec![0usize; rows + 1];
        let mut indices = Vec::with_capacity(trip.len());
        let mut data: Vec<C64> = Vec::with_capacity(trip.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in trip {
            debug_assert!(r < rows && c < cols);
            if last == Some((r, c)) {
                *data.last_mut().unwrap() += v;
            } else {
                indices.push(c);
                data.push(v);
                indptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..rows {
            indptr[r + 1] += indptr[r];
        }
        Csr { rows, cols, indptr, indices, data }.pruned()
    }

    pub fn identity(n: usize) -> Csr {
        Csr::from_diagonal(&vec![C64::new(1.0, 0.0); n])
    }

    pub fn from_diagonal(d: &[C64]) -> Csr {
        Csr::from_triplets(d.len(), d.len(), d.iter().enumerate().map(|(i, &v)| (i, i, v)).collect())
    }

    fn pruned(self) -> Csr {
        if self.data.iter().all(|v| *v != C64::new(0.0, 0.0)) {
            return self;
        }
        let mut trip = Vec::with_capacity(self.nnz());
        for r in 0..self.rows {
            for k in self.indptr[r]..self.indptr[r + 1] {
                if self.data[k] != C64::new(0.0, 0.0) {
                    trip.push((r, self.indices[k], self.data[k]));
                }
            }
        }
        let mut indptr = vec![0usize; self.rows + 1];
        for &(r, _, _) in &trip {
            indptr[r + 1] += 1;
        }
        for r in 0..self.rows {
            indptr[r + 1] += indptr[r];
        }
        Csr {
            rows: self.rows,
            cols: self.cols,
            indptr,
            indices: trip.iter().map(|t| t.1).collect(),
            data: trip.iter().map(|t| t.2).collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.rows).flat_map(move |r| {
            (self.indptr[r]..self.indptr[r + 1]).map(move |k| (r, self.indices[k], self.data[k]))
        })
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        let lo = self.indptr[r];
        let hi = self.indptr[r + 1];
        match self.indices[lo..hi].binary_search(&c) {
            Ok(k) => self.data[lo + k],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::new(0.0, 0.0); self.rows];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[C64], y: &mut [C64]) {
        debug_assert_eq!(x.len(), self.cols);
        let row = |r: usize| -> C64 {
            (self.indptr[r]..self.indptr[r + 1])
                .map(|k| self.data[k] * x[self.indices[k]])
                .sum()
        };
        if self.nnz() > 1 << 16 {
            y.par_iter_mut().enumerate().for_each(|(r, out)| *out = row(r));
        } else {
            y.iter_mut().enumerate().for_each(|(r, out)| *out = row(r));
        }
    }

    pub fn adjoint(&self) -> Csr {
        Csr::from_triplets(
            self.cols,
            self.rows,
            self.triplets().map(|(r, c, v)| (c, r, v.conj())).collect(),
        )
    }

    pub fn scaled(&self, s: C64) -> Csr {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|v| *v *= s);
        out.pruned()
    }

    pub fn add(&self, other: &Csr) -> Csr {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Csr::from_triplets(self.rows, self.cols, self.triplets().chain(other.triplets()).collect())
    }

    pub fn sub(&self, other: &Csr) -> Csr {
        self.add(&other.scaled(C64::new(-1.0, 0.0)))
    }

    /// Sparse product `self · other`.
    pub fn mul(&self, other: &Csr) -> Csr {
        assert_eq!(self.cols, other.rows);
        let mut trip = Vec::new();
        for r in 0..self.rows {
            for k in self.indptr[r]..self.indptr[r + 1] {
                let (mid, a) = (self.indices[k], self.data[k]);
                for l in other.indptr[mid]..other.indptr[mid + 1] {
                    trip.push((r, other.indices[l], a * other.data[l]));
                }
            }
        }
        Csr::from_triplets(self.rows, other.cols, trip)
    }

    pub fn commutator(&self, other: &Csr) -> Csr {
        self.mul(other).sub(&other.mul(self))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Keep only entries whose row and column both satisfy `keep`.
    pub fn restrict(&self, keep: impl Fn(usize) -> bool) -> Csr {
        Csr::from_triplets(
            self.rows,
            self.cols,
            self.triplets().filter(|&(r, c, _)| keep(r) && keep(c)).collect(),
        )
    }

    pub fn to_dense(&self) -> Vec<C64> {
        let mut d = vec![C64::new(0.0, 0.0); self.rows * self.cols];
        for (r, c, v) in self.triplets() {
            d[r * self.cols + c] += v;
        }
        d
    }

    /// `max |A - A*|`.
    pub fn hermiticity_defect(&self) -> f64 {
        self.sub(&self.adjoint()).max_abs()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_matches_dense() {
        let a = Csr::from_triplets(
            2,
            3,
            vec![(0, 0, C64::new(1.0, 0.0)), (0, 2, C64::new(0.0, 2.0)), (1, 1, C64::new(3.0, 0.0))],
        );
        let b = Csr::from_triplets(
            3,
            2,
            vec![(0, 1, C64::new(1.0, 1.0)), (2, 0, C64::new(1.0, 0.0)), (1, 0, C64::new(2.0, 0.0))],
        );
        let p = a.mul(&b).to_dense();
        assert_eq!(p[0], C64::new(0.0, 2.0));
        assert_eq!(p[1], C64::new(1.0, 1.0));
        assert_eq!(p[2], C64::new(6.0, 0.0));
        assert_eq!(p[3], C64::new(0.0, 0.0));
    }

    #[test]
    fn duplicates_are_summed() {
        let a = Csr::from_triplets(1, 1, vec![(0, 0, C64::new(1.0, 0.0)), (0, 0, C64::new(2.0, 0.0))]);
        assert_eq!(a.get(0, 0), C64::new(3.0, 0.0));
        assert_eq!(a.nnz(), 1);
    }
}
