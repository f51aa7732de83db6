//! Zonal background profile `psi_bar(y)` used to shift the layer-1 streamfunction.
//!
//! `psi_bar'(y) = -2 sum_{k=1}^{M} cos(2 pi k y / L)`, integrated term by term with
//! zero mean: `psi_bar(y) = -(L / pi) sum_{k=1}^{M} sin(2 pi k y / L) / k`.
//! The mode count `M` is the smallest integer with
//! `C L^{2m-4} (1 + L^4)^{1/2} M^{5/2-m} < nu / 4`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::inversion::pv_from_streamfunction;
use crate::lattice::Lattice;

/// Largest mode count represented exactly as an `f64`.
pub const MAX_MODES: u64 = 1 << 53;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BackgroundShift {
    #[serde(rename = "M")]
    pub modes: u64,
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "L")]
    pub l: f64,
    pub m: f64,
    pub nu: f64,
}

fn mode_condition_lhs(c: f64, l: f64, m: f64, modes: f64) -> f64 {
    c * l.powf(2.0 * m - 4.0) * (1.0 + l.powi(4)).sqrt() * modes.powf(2.5 - m)
}

/// Smallest `M >= 1` with `C L^{2m-4} (1+L^4)^{1/2} M^{5/2-m} < nu/4`.
pub fn choose_m(c: f64, l: f64, m: f64, nu: f64) -> Result<u64> {
    if !(m > 2.5) {
        return Err(Error::param("m", format!("background shift needs m > 5/2, got {m}")));
    }
    if !(nu > 0.0) {
        return Err(Error::param("nu", "background shift needs nu > 0"));
    }
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::param("C", "must be positive and finite"));
    }
    let holds = |n: u64| mode_condition_lhs(c, l, m, n as f64) < 0.25 * nu;
    // Solve the equality in logs, then settle the integer by direct tests.
    let log_root = ((4.0 * c / nu).ln() + (2.0 * m - 4.0) * l.ln() + 0.5 * (1.0 + l.powi(4)).ln())
        / (m - 2.5);
    if log_root > (MAX_MODES as f64).ln() {
        return Err(Error::param(
            "M",
            format!("required mode count exp({log_root:.3}) exceeds 2^53"),
        ));
    }
    let mut n = log_root.exp().floor().max(1.0) as u64;
    while n > 1 && holds(n - 1) {
        n -= 1;
    }
    while !holds(n) {
        n += 1;
        if n > MAX_MODES {
            return Err(Error::param("M", "required mode count exceeds 2^53"));
        }
    }
    Ok(n)
}

pub fn build_background(l: f64, m: f64, nu: f64, c: f64) -> Result<BackgroundShift> {
    let modes = choose_m(c, l, m, nu)?;
    Ok(BackgroundShift { modes, c, l, m, nu })
}

impl BackgroundShift {
    /// `||A_y^{s/2} psi_bar||^2 = L^4/(2 pi^2) (2 pi / L)^{2s} sum_k k^{2s-2}`.
    pub fn norm_sq(&self, s: f64) -> f64 {
        let l = self.l;
        l.powi(4) / (2.0 * PI * PI) * (2.0 * PI / l).powf(2.0 * s) * power_sum(self.modes, 2.0 * s - 2.0)
    }

    /// `gamma_bar = kappa_T ||psi_bar||^2 + 2 nu ||A_y^{m/2} psi_bar||^2`.
    pub fn gamma_bar(&self, kappa_t: f64) -> f64 {
        kappa_t * self.norm_sq(0.0) + 2.0 * self.nu * self.norm_sq(self.m)
    }

    /// Whether every mode of `psi_bar` is retained by `lattice`.
    pub fn fits(&self, lattice: &Lattice) -> bool {
        self.modes <= lattice.k as u64
    }

    /// `psi_bar` on `lattice`; all `M` modes must be retained.
    pub fn psi_bar(&self, lattice: Lattice) -> Result<SpectralField> {
        if !self.fits(&lattice) {
            return Err(Error::InvalidLattice(format!(
                "background needs M = {} modes but K = {}",
                self.modes, lattice.k
            )));
        }
        if lattice.l != self.l {
            return Err(Error::LatticeMismatch);
        }
        let mut f = SpectralField::zeros(lattice);
        let l = self.l;
        for k in 1..=self.modes as i64 {
            // -(L/pi)(1/k) sin = (i L / (2 pi k)) e^{i..} + c.c.
            let c = Complex64::new(0.0, l / (2.0 * PI * k as f64));
            f += &SpectralField::single_mode(lattice, 0, k, c);
        }
        Ok(f)
    }

    /// `q_bar = -A_y psi_bar - psi_bar / 2`.
    pub fn q_bar(&self, lattice: Lattice) -> Result<SpectralField> {
        let psi = self.psi_bar(lattice)?;
        let zero = SpectralField::zeros(lattice);
        Ok(pv_from_streamfunction(&psi, &zero)?.0)
    }
}

/// `sum_{k=1}^{n} k^p` for real `p`; Euler-Maclaurin tail for large `n`.
pub fn power_sum(n: u64, p: f64) -> f64 {
    const DIRECT: u64 = 2_000;
    if n <= DIRECT {
        return (1..=n).rev().map(|k| (k as f64).powf(p)).sum();
    }
    let head: f64 = (1..=DIRECT).rev().map(|k| (k as f64).powf(p)).sum();
    let a = DIRECT as f64 + 1.0;
    let b = n as f64;
    let f = |x: f64| x.powf(p);
    let d1 = |x: f64| p * x.powf(p - 1.0);
    let d3 = |x: f64| p * (p - 1.0) * (p - 2.0) * x.powf(p - 3.0);
    let integral = if (p + 1.0).abs() < 1e-15 {
        (b / a).ln()
    } else {
        (b.powf(p + 1.0) - a.powf(p + 1.0)) / (p + 1.0)
    };
    head + integral + 0.5 * (f(a) + f(b)) + (d1(b) - d1(a)) / 12.0 - (d3(b) - d3(a)) / 720.0
}
