//! Real, zero-mean, periodic scalar fields stored by their truncated Fourier
//! coefficients.
//!
//! Physical integrals carry the Lebesgue measure of the square of side `L`, so
//! Parseval reads `||u||^2 = L^2 sum_k |u_k|^2`. Every norm and inner product in
//! this crate uses that normalization; [`SpectralField::parseval_factor`]
//! returns the `L^2` factor.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::Fft2;
use crate::lattice::Lattice;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    lattice: Lattice,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(lattice: Lattice) -> Self {
        SpectralField { lattice, coeffs: vec![ZERO; lattice.len()] }
    }

    /// Wrap raw coefficients in row-major k-order.
    ///
    /// The input is made exactly Hermitian by averaging each pair `(k, -k)` and
    /// its mean coefficient is set to zero.
    pub fn from_coeffs(lattice: Lattice, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != lattice.len() {
            return Err(Error::InvalidLattice(format!(
                "expected {} coefficients, got {}",
                lattice.len(),
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::param("coeffs", "non-finite coefficient"));
        }
        let mut f = SpectralField { lattice, coeffs };
        f.symmetrize();
        Ok(f)
    }

    /// Field with coefficients `f(k1, k2)`, symmetrized as in [`Self::from_coeffs`].
    pub fn from_fn(lattice: Lattice, mut f: impl FnMut(i64, i64) -> Complex64) -> Self {
        let coeffs = (0..lattice.len())
            .map(|i| {
                let (k1, k2) = lattice.mode(i);
                f(k1, k2)
            })
            .collect();
        let mut out = SpectralField { lattice, coeffs };
        out.symmetrize();
        out
    }

    /// Real field `c e^{ik.x} + conj(c) e^{-ik.x}`.
    pub fn single_mode(lattice: Lattice, k1: i64, k2: i64, c: Complex64) -> Self {
        let mut f = SpectralField::zeros(lattice);
        if (k1, k2) != (0, 0) {
            let i = lattice.index(k1, k2);
            f.coeffs[i] = c;
            f.coeffs[lattice.conjugate_index(i)] = c.conj();
        }
        f
    }

    pub(crate) fn from_raw(lattice: Lattice, coeffs: Vec<Complex64>) -> Self {
        debug_assert_eq!(coeffs.len(), lattice.len());
        SpectralField { lattice, coeffs }
    }

    #[inline]
    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    #[inline]
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    #[inline]
    pub(crate) fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    #[inline]
    pub fn coeff(&self, k1: i64, k2: i64) -> Complex64 {
        self.coeffs[self.lattice.index(k1, k2)]
    }

    #[inline]
    pub fn parseval_factor(&self) -> f64 {
        self.lattice.l * self.lattice.l
    }

    /// Average each conjugate pair so that `u_{-k} = conj(u_k)` holds bitwise,
    /// and clear the mean.
    pub fn symmetrize(&mut self) {
        let len = self.coeffs.len();
        for i in 0..len / 2 {
            let j = len - 1 - i;
            let avg = (self.coeffs[i] + self.coeffs[j].conj()) * 0.5;
            self.coeffs[i] = avg;
            self.coeffs[j] = avg.conj();
        }
        self.coeffs[len / 2] = ZERO;
    }

    /// Largest violation of `u_{-k} = conj(u_k)` and of `u_0 = 0`.
    pub fn hermitian_defect(&self) -> f64 {
        let len = self.coeffs.len();
        let pairs = (0..len / 2)
            .map(|i| (self.coeffs[i] - self.coeffs[len - 1 - i].conj()).norm())
            .fold(0.0, f64::max);
        pairs.max(self.coeffs[len / 2].norm())
    }

    pub fn same_lattice(&self, other: &SpectralField) -> Result<()> {
        if self.lattice == other.lattice {
            Ok(())
        } else {
            Err(Error::LatticeMismatch)
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// `A^{s/2} u`: multiply each coefficient by `(2 pi |k| / L)^s`.
    pub fn apply_fractional_power(&self, s: f64) -> SpectralField {
        let lat = self.lattice;
        let mut out = self.clone();
        for (i, k1, k2) in lat.modes() {
            out.coeffs[i] *= lat.laplacian_eigenvalue(k1, k2).powf(0.5 * s);
        }
        out
    }

    /// `||A^{s/2} u||`, i.e. `(L^2 sum_k (2 pi |k|/L)^{2s} |u_k|^2)^{1/2}`.
    pub fn sobolev_norm(&self, s: f64) -> f64 {
        self.sobolev_norm_sq(s).sqrt()
    }

    pub fn sobolev_norm_sq(&self, s: f64) -> f64 {
        let lat = self.lattice;
        let sum: f64 = lat
            .modes()
            .map(|(i, k1, k2)| lat.laplacian_eigenvalue(k1, k2).powf(s) * self.coeffs[i].norm_sqr())
            .sum();
        self.parseval_factor() * sum
    }

    pub fn l2_norm_sq(&self) -> f64 {
        self.parseval_factor() * self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }

    /// `(u, v) = integral of u v` over the domain.
    pub fn inner(&self, other: &SpectralField) -> f64 {
        debug_assert_eq!(self.lattice, other.lattice);
        let s: f64 = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.re * b.re + a.im * b.im)
            .sum();
        self.parseval_factor() * s
    }

    pub fn dx(&self) -> SpectralField {
        self.map_modes(|k1, _| Complex64::new(0.0, self.lattice.dk() * k1 as f64))
    }

    pub fn dy(&self) -> SpectralField {
        self.map_modes(|_, k2| Complex64::new(0.0, self.lattice.dk() * k2 as f64))
    }

    fn map_modes(&self, symbol: impl Fn(i64, i64) -> Complex64) -> SpectralField {
        let lat = self.lattice;
        let mut out = self.clone();
        for (i, k1, k2) in lat.modes() {
            out.coeffs[i] *= symbol(k1, k2);
        }
        out
    }

    /// Enforce `u(x, -y) = -u(x, y)`, i.e. `u_{(k1,-k2)} = -u_{(k1,k2)}`.
    ///
    /// The projection is idempotent bitwise: a second application reproduces the
    /// first result exactly.
    pub fn project_odd_y(&self) -> SpectralField {
        let lat = self.lattice;
        let mut out = self.clone();
        for i in 0..lat.len() {
            let r = lat.reflect_y_index(i);
            out.coeffs[i] = (self.coeffs[i] - self.coeffs[r]) * 0.5;
        }
        out
    }

    /// Squared L^2 norm of the part that is even in `y`.
    pub fn even_y_norm_sq(&self) -> f64 {
        let lat = self.lattice;
        let s: f64 = (0..lat.len())
            .map(|i| ((self.coeffs[i] + self.coeffs[lat.reflect_y_index(i)]) * 0.5).norm_sqr())
            .sum();
        self.parseval_factor() * s
    }

    /// `||even part|| / ||u||`, zero for the zero field.
    pub fn odd_residual(&self) -> f64 {
        let total = self.l2_norm_sq();
        if total == 0.0 {
            0.0
        } else {
            (self.even_y_norm_sq() / total).sqrt()
        }
    }

    /// Physical values on the `N x N` collocation grid at `(-L/2 + i h, -L/2 + j h)`,
    /// returned row-major with `x` as the slow index.
    pub fn to_grid(&self) -> Vec<f64> {
        let lat = self.lattice;
        let n = lat.n;
        let mut fft = Fft2::new(n);
        // Shift the origin to the corner -L/2: factor exp(-i pi (k1 + k2)).
        let shifted: Vec<Complex64> = (0..lat.len())
            .map(|i| {
                let (k1, k2) = lat.mode(i);
                if (k1 + k2).rem_euclid(2) == 0 {
                    self.coeffs[i]
                } else {
                    -self.coeffs[i]
                }
            })
            .collect();
        let mut buf = fft.new_buffer();
        fft.to_grid(&lat, &shifted, &mut buf);
        let mut out = vec![0.0; n * n];
        for j2 in 0..n {
            for j1 in 0..n {
                out[j1 * n + j2] = buf[j2 * n + j1].re;
            }
        }
        out
    }
}

impl Add for &SpectralField {
    type Output = SpectralField;
    fn add(self, rhs: &SpectralField) -> SpectralField {
        assert_eq!(self.lattice, rhs.lattice, "lattice mismatch");
        let coeffs = self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect();
        SpectralField::from_raw(self.lattice, coeffs)
    }
}

impl Sub for &SpectralField {
    type Output = SpectralField;
    fn sub(self, rhs: &SpectralField) -> SpectralField {
        assert_eq!(self.lattice, rhs.lattice, "lattice mismatch");
        let coeffs = self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a - b).collect();
        SpectralField::from_raw(self.lattice, coeffs)
    }
}

impl Mul<f64> for &SpectralField {
    type Output = SpectralField;
    fn mul(self, rhs: f64) -> SpectralField {
        let coeffs = self.coeffs.iter().map(|a| a * rhs).collect();
        SpectralField::from_raw(self.lattice, coeffs)
    }
}

impl Neg for &SpectralField {
    type Output = SpectralField;
    fn neg(self) -> SpectralField {
        self * -1.0
    }
}

impl AddAssign<&SpectralField> for SpectralField {
    fn add_assign(&mut self, rhs: &SpectralField) {
        assert_eq!(self.lattice, rhs.lattice, "lattice mismatch");
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a += b;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn lat(l: f64, k: usize) -> Lattice {
        Lattice::new(l, k).unwrap()
    }

    fn random_field(lat: Lattice, seed: u64) -> SpectralField {
        let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let mut next = move || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        SpectralField::from_fn(lat, |_, _| Complex64::new(next(), next()))
    }

    #[test]
    fn zero_power_is_identity_and_powers_invert() {
        let u = random_field(lat(3.0, 5), 7);
        assert_eq!(u.apply_fractional_power(0.0), u);
        let back = u.apply_fractional_power(2.0).apply_fractional_power(-2.0);
        for (a, b) in back.coeffs().iter().zip(u.coeffs()) {
            assert!((a - b).norm() <= 1e-14 * b.norm().max(1e-300));
        }
    }

    #[test]
    fn unit_mode_unchanged_by_laplacian_at_two_pi() {
        let u = SpectralField::single_mode(lat(2.0 * PI, 3), 1, 0, Complex64::new(0.3, 0.2));
        let v = u.apply_fractional_power(2.0);
        assert!((v.coeff(1, 0) - u.coeff(1, 0)).norm() < 1e-15);
    }

    #[test]
    fn cosine_norm_matches_grid_quadrature() {
        let l = 2.0 * PI;
        let lat = lat(l, 4);
        let u = SpectralField::single_mode(lat, 1, 0, Complex64::new(0.5, 0.0));
        // Quadrature of cos^2 x on the collocation grid, independent of the FFT path.
        let h = lat.spacing();
        let xs = lat.grid_coordinates();
        let quad: f64 = xs
            .iter()
            .flat_map(|&x| xs.iter().map(move |_| x.cos().powi(2) * h * h))
            .sum();
        assert!((quad - 2.0 * PI * PI).abs() < 1e-12);
        for s in [0.0, 0.5, 1.0, 3.0] {
            assert!((u.sobolev_norm_sq(s) - 2.0 * PI * PI).abs() < 1e-12);
        }
        let grid = u.to_grid();
        for (i, &x) in xs.iter().enumerate() {
            assert!((grid[i * lat.n] - x.cos()).abs() < 1e-14);
        }
    }

    #[test]
    fn sobolev_chaining() {
        let u = random_field(lat(4.0, 6), 3);
        let a = u.sobolev_norm(1.0);
        let b = u.apply_fractional_power(1.0).sobolev_norm(0.0);
        assert!((a - b).abs() <= 1e-12 * a);
        assert_eq!(SpectralField::zeros(lat(4.0, 6)).sobolev_norm(1.3), 0.0);
    }

    #[test]
    fn odd_projection() {
        let la = lat(5.0, 4);
        let sine = SpectralField::single_mode(la, 0, 1, Complex64::new(0.0, -0.5));
        assert_eq!(sine.project_odd_y(), sine);
        let cosine = SpectralField::single_mode(la, 0, 1, Complex64::new(0.5, 0.0));
        assert_eq!(cosine.project_odd_y().max_abs(), 0.0);
        let u = random_field(la, 11);
        let once = u.project_odd_y();
        assert_eq!(once.project_odd_y(), once);
        assert_eq!(once.hermitian_defect(), 0.0);
        assert_eq!(once.odd_residual(), 0.0);
        for k1 in -4..=4 {
            assert_eq!(once.coeff(k1, 0).norm(), 0.0);
        }
    }

    #[test]
    fn symmetrize_is_exact() {
        let u = random_field(lat(2.0, 3), 5);
        assert_eq!(u.hermitian_defect(), 0.0);
        assert!(u.to_grid().iter().all(|v| v.is_finite()));
    }
}
