//! Truncated Fourier lattice on the doubly periodic square `[-L/2, L/2]^2`.
//!
//! Retained modes are the integer pairs `k = (k1, k2)` with `|k1| <= K` and
//! `|k2| <= K`. Coefficients are stored in row-major k-order: `k1` is the slow
//! index, `k2` the fast one, both running from `-K` to `K`.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    /// Domain period.
    #[serde(rename = "L")]
    pub l: f64,
    /// Truncation order.
    #[serde(rename = "K")]
    pub k: usize,
    /// Collocation points per direction.
    #[serde(rename = "N")]
    pub n: usize,
}

/// Build the default lattice for period `l` and truncation `k` (`N = 3K`).
pub fn wavenumber_lattice(l: f64, k: i64) -> Result<Lattice> {
    if k < 1 {
        return Err(Error::InvalidLattice(format!("K must be >= 1, got {k}")));
    }
    Lattice::with_points(l, k as usize, 3 * k as usize)
}

impl Lattice {
    pub fn new(l: f64, k: usize) -> Result<Self> {
        wavenumber_lattice(l, k as i64)
    }

    pub fn with_points(l: f64, k: usize, n: usize) -> Result<Self> {
        if !(l >= 1.0) || !l.is_finite() {
            return Err(Error::InvalidLattice(format!("L must be finite and >= 1, got {l}")));
        }
        if k < 1 {
            return Err(Error::InvalidLattice(format!("K must be >= 1, got {k}")));
        }
        if n < 3 * k {
            return Err(Error::InsufficientResolution { n, required: 3 * k });
        }
        Ok(Lattice { l, k, n })
    }

    /// Number of retained indices per direction, `2K + 1`.
    #[inline]
    pub fn side(&self) -> usize {
        2 * self.k + 1
    }

    /// Total number of stored coefficients, including the (zero) mean.
    #[inline]
    pub fn len(&self) -> usize {
        self.side() * self.side()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Storage offset of mode `(k1, k2)`.
    #[inline]
    pub fn index(&self, k1: i64, k2: i64) -> usize {
        let kk = self.k as i64;
        debug_assert!(k1.abs() <= kk && k2.abs() <= kk);
        ((k1 + kk) as usize) * self.side() + (k2 + kk) as usize
    }

    /// Inverse of [`Lattice::index`].
    #[inline]
    pub fn mode(&self, idx: usize) -> (i64, i64) {
        let kk = self.k as i64;
        let s = self.side();
        ((idx / s) as i64 - kk, (idx % s) as i64 - kk)
    }

    /// Offset of `-k` given the offset of `k`.
    #[inline]
    pub fn conjugate_index(&self, idx: usize) -> usize {
        self.len() - 1 - idx
    }

    /// Offset of `(k1, -k2)` given the offset of `(k1, k2)`.
    #[inline]
    pub fn reflect_y_index(&self, idx: usize) -> usize {
        let s = self.side();
        let (row, col) = (idx / s, idx % s);
        row * s + (s - 1 - col)
    }

    #[inline]
    pub fn zero_index(&self) -> usize {
        self.len() / 2
    }

    #[inline]
    pub fn contains(&self, k1: i64, k2: i64) -> bool {
        let kk = self.k as i64;
        k1.abs() <= kk && k2.abs() <= kk
    }

    /// Fundamental physical wavenumber `2 pi / L`.
    #[inline]
    pub fn dk(&self) -> f64 {
        2.0 * PI / self.l
    }

    /// Physical wavevector `2 pi k / L`.
    #[inline]
    pub fn wavevector(&self, k1: i64, k2: i64) -> (f64, f64) {
        (self.dk() * k1 as f64, self.dk() * k2 as f64)
    }

    /// `mu = (2 pi |k| / L)^2`, the eigenvalue of `A = -Laplacian` on mode `k`.
    #[inline]
    pub fn laplacian_eigenvalue(&self, k1: i64, k2: i64) -> f64 {
        let dk = self.dk();
        dk * dk * (k1 * k1 + k2 * k2) as f64
    }

    /// Grid spacing of the collocation grid.
    #[inline]
    pub fn spacing(&self) -> f64 {
        self.l / self.n as f64
    }

    /// Physical coordinates `-L/2 + j L / N` of the collocation grid.
    pub fn grid_coordinates(&self) -> Vec<f64> {
        (0..self.n).map(|j| -0.5 * self.l + j as f64 * self.spacing()).collect()
    }

    /// Transform size used for quadratic products.
    ///
    /// Products of two retained fields reach `|k_i| = 2K`; aliasing back onto a
    /// retained mode is avoided only when the grid has more than `3K` points, so
    /// the product grid is the smallest 5-smooth size `>= max(N, 3K + 1)`.
    pub fn dealias_points(&self) -> usize {
        smooth_size(self.n.max(3 * self.k + 1))
    }

    /// Iterator over `(offset, k1, k2)` of every retained nonzero mode.
    pub fn modes(&self) -> impl Iterator<Item = (usize, i64, i64)> + '_ {
        let zero = self.zero_index();
        (0..self.len()).filter(move |&i| i != zero).map(move |i| {
            let (k1, k2) = self.mode(i);
            (i, k1, k2)
        })
    }
}

/// Smallest integer `>= n` whose prime factors are all in {2, 3, 5}.
pub fn smooth_size(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut r = m;
        for p in [2, 3, 5] {
            while r % p == 0 {
                r /= p;
            }
        }
        if r == 1 {
            return m;
        }
        m += 1;
    }
}
