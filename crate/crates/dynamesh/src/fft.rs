//! Minimal 3D FFT on cubical grids, used by the spectral Poisson solver.
//!
//! Data layout matches [`crate::grid`]: `index = (i*n + j)*n + k` with `k`
//! contiguous. Each pass rotates the array so the transformed axis becomes
//! contiguous; three rotations restore the original layout. Lines are
//! independent, so parallelizing over them cannot change the output bits.

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

pub(crate) struct Fft3 {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Fft3 {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    /// In-place forward 3D FFT (unnormalized).
    pub fn forward(&self, data: &mut Vec<Complex<f64>>) {
        self.transform(data, &self.forward);
    }

    /// In-place inverse 3D FFT, normalized by `1/n^3`.
    pub fn inverse(&self, data: &mut Vec<Complex<f64>>) {
        self.transform(data, &self.inverse);
        let scale = 1.0 / (self.n * self.n * self.n) as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }

    fn transform(&self, data: &mut Vec<Complex<f64>>, fft: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        assert_eq!(data.len(), n * n * n);
        let mut scratch = vec![Complex::default(); n * n * n];
        for _ in 0..3 {
            data.par_chunks_mut(n).for_each(|line| fft.process(line));
            // Rotate axes: (i, j, k) -> (k, i, j).
            scratch
                .par_chunks_mut(n)
                .enumerate()
                .for_each(|(row, out)| {
                    let k = row / n;
                    let i = row % n;
                    for (j, slot) in out.iter_mut().enumerate() {
                        *slot = data[(i * n + j) * n + k];
                    }
                });
            std::mem::swap(data, &mut scratch);
        }
    }
}

/// Signed integer frequency for DFT bin `k` of an `n`-point transform.
pub(crate) fn signed_frequency(k: usize, n: usize) -> f64 {
    if k <= n / 2 {
        k as f64
    } else {
        k as f64 - n as f64
    }
}
