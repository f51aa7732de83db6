//! Square 2-D FFTs between truncated spectra and collocation grids.
//!
//! Grids produced by [`Fft2::to_grid`] are stored y-major (`buf[j2 * n + j1]`),
//! which is the layout [`Fft2::from_grid`] consumes. Pointwise products do not
//! care about the layout; callers exporting physical fields transpose once.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::lattice::Lattice;

pub struct Fft2 {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
}

impl std::fmt::Debug for Fft2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft2").field("n", &self.n).finish()
    }
}

impl Fft2 {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        Fft2 { n, forward, inverse, scratch: vec![Complex64::new(0.0, 0.0); len] }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn new_buffer(&self) -> Vec<Complex64> {
        vec![Complex64::new(0.0, 0.0); self.n * self.n]
    }

    #[inline]
    fn wrap(&self, k: i64) -> usize {
        k.rem_euclid(self.n as i64) as usize
    }

    /// Synthesize `sum_k c_k exp(2 pi i k . j / n)` on the grid (y-major).
    pub fn to_grid(&mut self, lat: &Lattice, spec: &[Complex64], buf: &mut [Complex64]) {
        let n = self.n;
        debug_assert!(n > 2 * lat.k);
        debug_assert_eq!(buf.len(), n * n);
        buf.fill(Complex64::new(0.0, 0.0));
        let kk = lat.k as i64;
        let side = lat.side();
        for k1 in -kk..=kk {
            let row = self.wrap(k1) * n;
            let src = &spec[((k1 + kk) as usize) * side..((k1 + kk) as usize + 1) * side];
            for (c, k2) in src.iter().zip(-kk..=kk) {
                buf[row + self.wrap(k2)] = *c;
            }
        }
        for k1 in -kk..=kk {
            let row = self.wrap(k1) * n;
            self.inverse
                .process_with_scratch(&mut buf[row..row + n], &mut self.scratch);
        }
        transpose_square(buf, n);
        self.inverse.process_with_scratch(buf, &mut self.scratch);
    }

    /// Analyse a y-major grid into the retained coefficients, normalized so that
    /// `from_grid(to_grid(c)) == c`. The grid buffer is overwritten.
    pub fn from_grid(&mut self, lat: &Lattice, buf: &mut [Complex64], spec: &mut [Complex64]) {
        let n = self.n;
        debug_assert_eq!(buf.len(), n * n);
        self.forward.process_with_scratch(buf, &mut self.scratch);
        transpose_square(buf, n);
        let kk = lat.k as i64;
        let side = lat.side();
        let norm = 1.0 / (n * n) as f64;
        for k1 in -kk..=kk {
            let row = self.wrap(k1) * n;
            self.forward
                .process_with_scratch(&mut buf[row..row + n], &mut self.scratch);
            let dst = &mut spec[((k1 + kk) as usize) * side..((k1 + kk) as usize + 1) * side];
            for (d, k2) in dst.iter_mut().zip(-kk..=kk) {
                *d = buf[row + self.wrap(k2)] * norm;
            }
        }
    }
}

fn transpose_square(buf: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            buf.swap(i * n + j, j * n + i);
        }
    }
}
