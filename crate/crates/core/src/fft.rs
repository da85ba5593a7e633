//! Multi-axis FFT helpers over row-major arrays of shape `[N; dims]`.

use std::sync::Arc;

use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};

/// Forward and inverse plans for one transform length.
#[derive(Clone)]
pub(crate) struct Plans {
    pub len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Plans {
    pub fn new(len: usize) -> Self {
        let mut planner = FftPlanner::new();
        Plans {
            len,
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
        }
    }

    fn plan(&self, inverse: bool) -> &Arc<dyn Fft<f64>> {
        if inverse {
            &self.inverse
        } else {
            &self.forward
        }
    }

    /// Unnormalized transform of a single contiguous line (or several back to back).
    pub fn line(&self, buf: &mut [C64], inverse: bool) {
        self.plan(inverse).process(buf);
    }

    /// Unnormalized transform along `axis` of a `[len; dims]` array.
    pub fn axis(&self, data: &mut [C64], dims: usize, axis: usize, inverse: bool) {
        let n = self.len;
        debug_assert_eq!(data.len(), n.pow(dims as u32));
        let stride = n.pow((dims - 1 - axis) as u32);
        if stride == 1 {
            self.plan(inverse).process(data);
            return;
        }
        let outer = n.pow(axis as u32);
        let mut buf = vec![C64::new(0.0, 0.0); n];
        for o in 0..outer {
            let base = o * n * stride;
            for inner in 0..stride {
                for (t, b) in buf.iter_mut().enumerate() {
                    *b = data[base + t * stride + inner];
                }
                self.plan(inverse).process(&mut buf);
                for (t, b) in buf.iter().enumerate() {
                    data[base + t * stride + inner] = *b;
                }
            }
        }
    }

    /// Unnormalized transform over every axis of a `[len; dims]` array.
    pub fn all_axes(&self, data: &mut [C64], dims: usize, inverse: bool) {
        for axis in 0..dims {
            self.axis(data, dims, axis, inverse);
        }
    }
}

/// Signed DFT frequency index for bin `k` of an `n`-point transform, in `[-n/2, n/2)`.
pub(crate) fn signed_index(k: usize, n: usize) -> i64 {
    if k < n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

/// Decompose a flat row-major index into per-axis indices.
pub(crate) fn unravel(mut flat: usize, n: usize, dims: usize, out: &mut [usize]) {
    for d in (0..dims).rev() {
        out[d] = flat % n;
        flat /= n;
    }
}


/// `(-1)^k` for a signed integer.
pub(crate) fn alt_sign(k: i64) -> f64 {
    if k.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}
