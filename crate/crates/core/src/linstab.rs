//! Linear stability of the rest state: per-wavenumber 2x2 blocks `M_k` acting on
//! `(q1_k, q2_k)`, their eigenvalues, and dense growth-rate scans.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::inversion::coefficients_from_mu;
use crate::mat2::Mat2;
use crate::params::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearBlock {
    pub k: (i64, i64),
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
    pub alpha_k: f64,
    pub gamma_k: f64,
    pub trace: Complex64,
    pub det_re: f64,
    pub disc_re: f64,
}

impl LinearBlock {
    pub fn matrix(&self) -> Mat2 {
        Mat2::new(self.a, self.b, self.c, self.d)
    }

    /// Full complex determinant `a d - b c`.
    pub fn det(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }

    /// Complex discriminant `tr^2 - 4 det`.
    pub fn discriminant(&self) -> Complex64 {
        self.trace * self.trace - 4.0 * self.det()
    }

    /// Eigenvalues ordered by real part, largest last.
    pub fn eigenvalues(&self) -> [Complex64; 2] {
        self.matrix().eigenvalues()
    }

    /// Unit eigenvector `(q1, q2)` of the eigenvalue with the largest real part.
    pub fn leading_eigenvector(&self) -> (Complex64, Complex64) {
        self.matrix().eigenvector(self.eigenvalues()[1])
    }
}

/// Matrix entries for mode `k` with `mu = (2 pi |k|/L)^2` and `w = 2 pi k1 / L`.
pub(crate) fn block_entries(w: f64, mu: f64, p: &ModelParams) -> Mat2 {
    let (alpha, gamma) = coefficients_from_mu(mu);
    let visc = p.nu * mu.powf(p.m);
    let thermal = 0.5 * p.kappa_t * (alpha - gamma);
    let i = Complex64::i();
    let a = -i * w * (1.0 - (p.beta + 0.5) * alpha) - thermal - visc * alpha;
    let b = i * w * (p.beta + 0.5) * gamma + thermal - visc * gamma;
    let c = i * w * (p.beta - 0.5) * gamma + thermal - p.kappa_m * mu * gamma - visc * gamma;
    let d = i * w * (p.beta - 0.5) * alpha - thermal - p.kappa_m * mu * alpha - visc * alpha;
    Mat2::new(a, b, c, d)
}

pub fn linear_block(k: (i64, i64), p: &ModelParams) -> Result<LinearBlock> {
    if k == (0, 0) {
        return Err(Error::ZeroWavenumber);
    }
    let dk = 2.0 * std::f64::consts::PI / p.l;
    let mu = dk * dk * (k.0 * k.0 + k.1 * k.1) as f64;
    let w = dk * k.0 as f64;
    let (alpha_k, gamma_k) = coefficients_from_mu(mu);
    let m = block_entries(w, mu, p);
    let trace = m.a + m.d;
    let det = m.a * m.d - m.c * m.b;
    Ok(LinearBlock {
        k,
        a: m.a,
        b: m.b,
        c: m.c,
        d: m.d,
        alpha_k,
        gamma_k,
        trace,
        det_re: det.re,
        disc_re: (trace * trace - 4.0 * det).re,
    })
}

/// `max Re(lambda)` over the two eigenvalues of `M_k`.
pub fn growth_rate(k: (i64, i64), p: &ModelParams) -> Result<f64> {
    Ok(linear_block(k, p)?.eigenvalues()[1].re)
}

/// Inviscid discriminant `w^2 gamma^2 ((1 - 4 beta^2) - (2 mu^2 - 1)^2)`.
pub fn discriminant_closed_form(k: (i64, i64), p: &ModelParams) -> Result<f64> {
    if !p.is_inviscid() {
        return Err(Error::NotInviscid);
    }
    if k == (0, 0) {
        return Err(Error::ZeroWavenumber);
    }
    let dk = 2.0 * std::f64::consts::PI / p.l;
    let mu = dk * dk * (k.0 * k.0 + k.1 * k.1) as f64;
    let w = dk * k.0 as f64;
    let (_, gamma) = coefficients_from_mu(mu);
    let s = 2.0 * mu * mu - 1.0;
    Ok(w * w * gamma * gamma * ((1.0 - 4.0 * p.beta * p.beta) - s * s))
}

/// Inviscid growth rate from the closed-form discriminant, `sqrt(max(disc, 0)) / 2`.
pub fn growth_rate_closed_form(k: (i64, i64), p: &ModelParams) -> Result<f64> {
    Ok(0.5 * discriminant_closed_form(k, p)?.max(0.0).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanEntry {
    pub k1: i64,
    pub k2: i64,
    pub re_lambda_max: f64,
    pub im_lambda_max: f64,
    pub disc_re: f64,
    pub alpha_k: f64,
    pub gamma_k: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstabilityScan {
    /// One entry per retained nonzero mode in row-major k-order.
    pub entries: Vec<ScanEntry>,
    pub k_star: (i64, i64),
    pub sigma_star: f64,
}

impl InstabilityScan {
    pub fn rate(&self, k1: i64, k2: i64) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| e.k1 == k1 && e.k2 == k2)
            .map(|e| e.re_lambda_max)
    }

    pub fn is_unstable(&self) -> bool {
        self.sigma_star > 0.0
    }
}

/// Growth rates of every mode with `|k1|, |k2| <= K`, plus the argmax.
///
/// Ties are broken towards the first mode in scan order with `k1 >= 0`.
pub fn instability_scan(p: &ModelParams, kmax: usize) -> Result<InstabilityScan> {
    if kmax < 1 {
        return Err(Error::InvalidLattice("K must be >= 1".into()));
    }
    let kk = kmax as i64;
    let mut entries = Vec::with_capacity((2 * kmax + 1).pow(2) - 1);
    let mut best: Option<(f64, (i64, i64))> = None;
    for k1 in -kk..=kk {
        for k2 in -kk..=kk {
            if (k1, k2) == (0, 0) {
                continue;
            }
            let blk = linear_block((k1, k2), p)?;
            let lam = blk.eigenvalues()[1];
            entries.push(ScanEntry {
                k1,
                k2,
                re_lambda_max: lam.re,
                im_lambda_max: lam.im,
                disc_re: blk.disc_re,
                alpha_k: blk.alpha_k,
                gamma_k: blk.gamma_k,
            });
            let better = match best {
                None => true,
                Some((s, (b1, _))) => lam.re > s || (lam.re == s && b1 < 0 && k1 >= 0),
            };
            if better {
                best = Some((lam.re, (k1, k2)));
            }
        }
    }
    let (sigma_star, k_star) = best.expect("lattice has nonzero modes");
    Ok(InstabilityScan { entries, k_star, sigma_star })
}
