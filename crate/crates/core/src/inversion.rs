//! Coupled potential-vorticity inversion.
//!
//! Per mode, `q1 = -mu psi1 - (psi1 - psi2)/2` and `q2 = -mu psi2 + (psi1 - psi2)/2`
//! with `mu = (2 pi |k| / L)^2`. The inverse is
//! `psi1 = -alpha q1 - gamma q2`, `psi2 = -gamma q1 - alpha q2`.

use crate::error::{Error, Result};
use crate::field::SpectralField;

/// `(alpha_k, gamma_k)` for mode `k` on a domain of period `l`.
pub fn inversion_coefficients(k: (i64, i64), l: f64) -> Result<(f64, f64)> {
    if k == (0, 0) {
        return Err(Error::ZeroWavenumber);
    }
    let dk = 2.0 * std::f64::consts::PI / l;
    let mu = dk * dk * (k.0 * k.0 + k.1 * k.1) as f64;
    Ok(coefficients_from_mu(mu))
}

#[inline]
pub(crate) fn coefficients_from_mu(mu: f64) -> (f64, f64) {
    let denom = mu * mu + mu;
    ((mu + 0.5) / denom, 0.5 / denom)
}

/// Streamfunctions `(psi1, psi2)` from potential vorticities `(q1, q2)`.
pub fn invert_pv(q1: &SpectralField, q2: &SpectralField) -> Result<(SpectralField, SpectralField)> {
    q1.same_lattice(q2)?;
    let lat = *q1.lattice();
    let mut psi1 = SpectralField::zeros(lat);
    let mut psi2 = SpectralField::zeros(lat);
    {
        let (a, b) = (q1.coeffs(), q2.coeffs());
        let p1 = psi1.coeffs_mut();
        for (i, k1, k2) in lat.modes() {
            let (alpha, gamma) = coefficients_from_mu(lat.laplacian_eigenvalue(k1, k2));
            p1[i] = -(a[i] * alpha + b[i] * gamma);
        }
        let p2 = psi2.coeffs_mut();
        for (i, k1, k2) in lat.modes() {
            let (alpha, gamma) = coefficients_from_mu(lat.laplacian_eigenvalue(k1, k2));
            p2[i] = -(a[i] * gamma + b[i] * alpha);
        }
    }
    Ok((psi1, psi2))
}

/// Potential vorticities from streamfunctions: the elliptic forward map.
pub fn pv_from_streamfunction(
    psi1: &SpectralField,
    psi2: &SpectralField,
) -> Result<(SpectralField, SpectralField)> {
    psi1.same_lattice(psi2)?;
    let lat = *psi1.lattice();
    let mut q1 = SpectralField::zeros(lat);
    let mut q2 = SpectralField::zeros(lat);
    let (a, b) = (psi1.coeffs(), psi2.coeffs());
    for (i, k1, k2) in lat.modes() {
        let mu = lat.laplacian_eigenvalue(k1, k2);
        let hat = (a[i] - b[i]) * 0.5;
        q1.coeffs_mut()[i] = -a[i] * mu - hat;
        q2.coeffs_mut()[i] = -b[i] * mu + hat;
    }
    Ok((q1, q2))
}
