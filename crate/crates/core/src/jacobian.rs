//! Pseudo-spectral Jacobian `J(psi, q) = psi_x q_y - psi_y q_x` with exact
//! removal of aliased triads.
//!
//! Gradients are synthesized as complex fields `psi_x + i psi_y` and
//! `q_x + i q_y`, so that `J = Im(conj(grad psi) grad q)` costs two inverse
//! transforms. Two real products are analysed with a single forward transform.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::Fft2;
use crate::field::SpectralField;
use crate::lattice::Lattice;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug)]
pub struct DealiasedJacobian {
    lattice: Lattice,
    fft: Fft2,
    grad_a: Vec<Complex64>,
    grad_b: Vec<Complex64>,
    product: Vec<f64>,
    product_first: Vec<f64>,
    spec_a: Vec<Complex64>,
    spec_b: Vec<Complex64>,
}

impl DealiasedJacobian {
    pub fn new(lattice: Lattice) -> Result<Self> {
        if lattice.n < 3 * lattice.k {
            return Err(Error::InsufficientResolution { n: lattice.n, required: 3 * lattice.k });
        }
        let fft = Fft2::new(lattice.dealias_points());
        let grid = fft.new_buffer();
        Ok(DealiasedJacobian {
            lattice,
            grad_a: grid.clone(),
            grad_b: grid,
            product: vec![0.0; fft.size() * fft.size()],
            product_first: vec![0.0; fft.size() * fft.size()],
            spec_a: vec![ZERO; lattice.len()],
            spec_b: vec![ZERO; lattice.len()],
            fft,
        })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn grid_points(&self) -> usize {
        self.fft.size()
    }

    /// `J(psi, q)` for a single pair.
    pub fn apply(&mut self, psi: &SpectralField, q: &SpectralField) -> Result<SpectralField> {
        self.check(psi)?;
        self.check(q)?;
        self.layer_product(psi.coeffs(), q.coeffs());
        let mut out = vec![ZERO; self.lattice.len()];
        let mut unused = vec![ZERO; self.lattice.len()];
        for (g, p) in self.grad_a.iter_mut().zip(&self.product) {
            *g = Complex64::new(*p, 0.0);
        }
        self.analyse_pair(&mut out, &mut unused);
        Ok(SpectralField::from_raw(self.lattice, out))
    }

    /// `J(psi1, q1)` and `J(psi2, q2)` written into `out1`, `out2`.
    ///
    /// Returns the largest pointwise speed `|grad psi_i|` seen on the product grid.
    pub(crate) fn apply_layers(
        &mut self,
        psi1: &[Complex64],
        q1: &[Complex64],
        psi2: &[Complex64],
        q2: &[Complex64],
        out1: &mut [Complex64],
        out2: &mut [Complex64],
    ) -> f64 {
        let s1 = self.layer_product(psi1, q1);
        std::mem::swap(&mut self.product, &mut self.product_first);
        let s2 = self.layer_product(psi2, q2);
        for ((g, a), b) in self.grad_a.iter_mut().zip(&self.product_first).zip(&self.product) {
            *g = Complex64::new(*a, *b);
        }
        self.analyse_pair(out1, out2);
        s1.max(s2)
    }

    fn check(&self, f: &SpectralField) -> Result<()> {
        if *f.lattice() == self.lattice {
            Ok(())
        } else {
            Err(Error::LatticeMismatch)
        }
    }

    /// Grid values of `J(psi, q)` into `self.product`; returns `max |grad psi|`.
    fn layer_product(&mut self, psi: &[Complex64], q: &[Complex64]) -> f64 {
        let lat = self.lattice;
        gradient_symbol(&lat, psi, &mut self.spec_a);
        gradient_symbol(&lat, q, &mut self.spec_b);
        self.fft.to_grid(&lat, &self.spec_a, &mut self.grad_a);
        self.fft.to_grid(&lat, &self.spec_b, &mut self.grad_b);
        let mut speed_sq: f64 = 0.0;
        for ((p, a), b) in self.product.iter_mut().zip(&self.grad_a).zip(&self.grad_b) {
            // Im(conj(a) b) = a.re b.im - a.im b.re
            *p = a.re * b.im - a.im * b.re;
            speed_sq = speed_sq.max(a.norm_sqr());
        }
        speed_sq.sqrt()
    }

    /// Split the packed real pair in `grad_a` into two Hermitian spectra.
    fn analyse_pair(&mut self, out1: &mut [Complex64], out2: &mut [Complex64]) {
        let lat = self.lattice;
        self.fft.from_grid(&lat, &mut self.grad_a, &mut self.spec_a);
        let len = lat.len();
        for i in 0..len {
            let z = self.spec_a[i];
            let zc = self.spec_a[len - 1 - i].conj();
            out1[i] = (z + zc) * 0.5;
            let d = (z - zc) * 0.5;
            out2[i] = Complex64::new(d.im, -d.re);
        }
        out1[len / 2] = ZERO;
        out2[len / 2] = ZERO;
    }
}

/// Spectrum of `u_x + i u_y`: multiply by `i k_x - k_y`.
fn gradient_symbol(lat: &Lattice, u: &[Complex64], out: &mut [Complex64]) {
    let dk = lat.dk();
    let side = lat.side();
    let kk = lat.k as i64;
    for (i, (o, c)) in out.iter_mut().zip(u).enumerate() {
        let kx = dk * ((i / side) as i64 - kk) as f64;
        let ky = dk * ((i % side) as i64 - kk) as f64;
        *o = *c * Complex64::new(-ky, kx);
    }
}

/// `J(psi, q)` on the lattice shared by both fields.
pub fn jacobian(psi: &SpectralField, q: &SpectralField) -> Result<SpectralField> {
    psi.same_lattice(q)?;
    DealiasedJacobian::new(*psi.lattice())?.apply(psi, q)
}
