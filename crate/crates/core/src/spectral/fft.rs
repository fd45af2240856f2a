//! Unnormalized complex FFTs along axes of row-major hypercubic tensors.
//!
//! The same routine serves one-particle fields (`dim` axes) and many-body
//! tensors (`N` axes). Strided axes are handled by gathering a block of lines
//! into a contiguous scratch buffer, which keeps the inner FFT cache friendly.

use std::cell::RefCell;
use std::sync::Arc;

use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::C64;

const LINES_PER_BATCH: usize = 64;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(m: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(m)
        } else {
            p.plan_fft_forward(m)
        }
    })
}

/// Transform `data` (shape `m^naxes`, last axis fastest) along one axis.
pub(crate) fn transform_axis(data: &mut [C64], m: usize, naxes: usize, axis: usize, inverse: bool) {
    debug_assert_eq!(data.len(), m.pow(naxes as u32));
    debug_assert!(axis < naxes);
    let fft = plan(m, inverse);
    let stride = m.pow((naxes - 1 - axis) as u32);

    if stride == 1 {
        let scratch_len = fft.get_inplace_scratch_len();
        // Contiguous rows: hand big row batches to workers.
        let rows_per_task = (1 << 16) / m.max(1) + 1;
        data.par_chunks_mut(rows_per_task * m).for_each(|chunk| {
            let mut scratch = vec![C64::new(0.0, 0.0); scratch_len];
            fft.process_with_scratch(chunk, &mut scratch);
        });
        return;
    }

    let block = m * stride;
    let process_block = |blk: &mut [C64]| {
        let mut buf = vec![C64::new(0.0, 0.0); LINES_PER_BATCH * m];
        let mut scratch = vec![C64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        let mut inner = 0;
        while inner < stride {
            let lines = LINES_PER_BATCH.min(stride - inner);
            for j in 0..m {
                let row = &blk[j * stride + inner..j * stride + inner + lines];
                for (l, &v) in row.iter().enumerate() {
                    buf[l * m + j] = v;
                }
            }
            fft.process_with_scratch(&mut buf[..lines * m], &mut scratch);
            for j in 0..m {
                let row = &mut blk[j * stride + inner..j * stride + inner + lines];
                for (l, v) in row.iter_mut().enumerate() {
                    *v = buf[l * m + j];
                }
            }
            inner += lines;
        }
    };
    if data.len() / block > 1 {
        data.par_chunks_mut(block).for_each(process_block);
    } else {
        process_block(data);
    }
}

/// Transform along every axis.
pub(crate) fn transform_all(data: &mut [C64], m: usize, naxes: usize, inverse: bool) {
    for axis in 0..naxes {
        transform_axis(data, m, naxes, axis, inverse);
    }
}

/// Multiply by a separable symbol `Π_a w[idx_a]` (same table on each axis).
pub(crate) fn multiply_separable(data: &mut [C64], m: usize, naxes: usize, w: &[C64]) {
    debug_assert_eq!(w.len(), m);
    if naxes == 1 {
        data.iter_mut().zip(w).for_each(|(d, &f)| *d *= f);
        return;
    }
    // Outer axes contribute a common factor to each contiguous row.
    let rows = data.len() / m;
    data.par_chunks_mut(m * 64).enumerate().for_each(|(c, chunk)| {
        for (r, row) in chunk.chunks_mut(m).enumerate() {
            let mut idx = c * 64 + r;
            debug_assert!(idx < rows);
            let mut factor = C64::new(1.0, 0.0);
            for _ in 1..naxes {
                factor *= w[idx % m];
                idx /= m;
            }
            for (d, &f) in row.iter_mut().zip(w) {
                *d *= factor * f;
            }
        }
    });
}
