//! Constants of the absorbing-ball and attractor-dimension estimates.
//!
//! Every unspecified absolute constant is the caller-supplied `C`; `C_lt` enters
//! only `C7 = C_lt |kappa_M^2 / (4 kappa_T) - kappa_M|`. Quantities that cannot
//! be evaluated for the given parameters are `None` and explained in `flags`.

use serde::{Deserialize, Serialize};

use crate::background::build_background;
use crate::error::{Error, Result};
use crate::params::ModelParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsLedger {
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "C_lt")]
    pub c_lt: f64,
    #[serde(rename = "C1")]
    pub c1: f64,
    #[serde(rename = "C2")]
    pub c2: f64,
    #[serde(rename = "C3")]
    pub c3: f64,
    #[serde(rename = "C4")]
    pub c4: f64,
    #[serde(rename = "C5")]
    pub c5: f64,
    #[serde(rename = "C6")]
    pub c6: f64,
    #[serde(rename = "C7")]
    pub c7: Option<f64>,
    #[serde(rename = "M")]
    pub m_modes: Option<u64>,
    /// `||psi_bar||^2`.
    pub psi_bar_norm_sq: Option<f64>,
    /// `||A^{1/2} psi_bar||^2`.
    pub psi_bar_h1_norm_sq: Option<f64>,
    pub gamma_bar: Option<f64>,
    pub rho_sq: Option<f64>,
    pub zeta: Option<f64>,
    /// Bracketed expression whose `m`-th root brackets `d`.
    #[serde(rename = "B")]
    pub b: Option<f64>,
    pub d: Option<u64>,
    pub fractal_dimension_bound: Option<u64>,
    pub flags: Vec<String>,
}

/// Evaluate every constant for `p` with absolute constant `c` and Lieb-Thirring
/// constant `c_lt`.
pub fn constants_ledger(p: &ModelParams, c: f64, c_lt: f64) -> Result<ConstantsLedger> {
    p.validate_for_bounds()?;
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::param("C", format!("must be positive and finite, got {c}")));
    }
    if !(c_lt > 0.0) || !c_lt.is_finite() {
        return Err(Error::param("C_lt", format!("must be positive and finite, got {c_lt}")));
    }
    let (l, m, nu) = (p.l, p.m, p.nu);
    let l4 = 1.0 + l.powi(4);
    let mixed = (0.5 * p.kappa_m - 2.0 * p.kappa_t).abs();
    let mut flags = Vec::new();

    let c1 = c * l4 * l.powf(2.0 * m - 4.0) / nu;
    let c2 = (p.beta.abs() + 1.0).powi(2).max(mixed);
    let c3 = p.kappa_t.min(nu / (c * l.powf(2.0 * (m - 1.0))));
    let c4 = (nu / (c * l4 * l.powf(2.0 * (m - 1.0)))).min(nu / (c * l.powf(2.0 * m)));
    let c5 = (p.beta * p.beta + 1.0)
        + c * l4 * l4 * l.powf(2.0 * (m - 3.0)) / nu
        + c * l.powf(2.0 * m) * mixed;
    let c6 = c3.min(c4);
    if c3 == 0.0 {
        flags.push("kappa_T = 0 gives C3 = C6 = 0: absorbing radius and zeta are not computable".into());
    }
    let c7 = if p.kappa_t > 0.0 {
        Some(c_lt * (p.kappa_m * p.kappa_m / (4.0 * p.kappa_t) - p.kappa_m).abs())
    } else if p.kappa_m == 0.0 {
        flags.push("kappa_T = kappa_M = 0: C7 taken as 0 (limit along kappa_M = 0)".into());
        Some(0.0)
    } else {
        flags.push("kappa_T = 0 with kappa_M > 0: C7 is unbounded".into());
        None
    };

    let (m_modes, psi0, psi1, gamma_bar) = match build_background(l, m, nu, c) {
        Ok(bg) => {
            let g = bg.gamma_bar(p.kappa_t);
            (Some(bg.modes), Some(bg.norm_sq(0.0)), Some(bg.norm_sq(1.0)), Some(g))
        }
        Err(e) => {
            flags.push(format!("background mode count not computable: {e}"));
            (None, None, None, None)
        }
    };
    let rho_sq = match gamma_bar {
        Some(g) if c6 > 0.0 => Some(2.0 * g * c5 / (c6 * c6)),
        _ => None,
    };
    let zeta = match (gamma_bar, psi1) {
        (Some(g), Some(h)) if c6 > 0.0 => Some(zeta_formula(p, c, c5, c6, h, g)),
        _ => None,
    };
    let mut ledger = ConstantsLedger {
        c,
        c_lt,
        c1,
        c2,
        c3,
        c4,
        c5,
        c6,
        c7,
        m_modes,
        psi_bar_norm_sq: psi0,
        psi_bar_h1_norm_sq: psi1,
        gamma_bar,
        rho_sq,
        zeta,
        b: None,
        d: None,
        fractal_dimension_bound: None,
        flags,
    };
    if let (Some(z), Some(_)) = (zeta, c7) {
        let dim = dimension_bound(p, &ledger, z);
        ledger.b = Some(dim.b);
        ledger.d = Some(dim.d);
        ledger.fractal_dimension_bound = Some(dim.fractal);
        if dim.b.powf(1.0 / m) >= EXACT_ROOT_LIMIT {
            ledger.flags.push("B^(1/m) exceeds 2^53: d is a rounded floating-point ceiling".into());
        }
    } else {
        ledger.flags.push("dimension bound not computable".into());
    }
    Ok(ledger)
}

fn zeta_formula(p: &ModelParams, c: f64, c5: f64, c6: f64, psi_h1: f64, gamma_bar: f64) -> f64 {
    let l = p.l;
    c * c5 * (1.0 + l.powi(4)) * l.powf(2.0 * (p.m - 2.0)) / p.nu * (psi_h1 + gamma_bar / c6)
}

/// `zeta = C C5 (1+L^4) L^{2(m-2)} / nu (||A^{1/2} psi_bar||^2 + gamma_bar / C6)`.
pub fn zeta_bound(p: &ModelParams, ledger: &ConstantsLedger) -> Option<f64> {
    if ledger.c6 <= 0.0 {
        return None;
    }
    Some(zeta_formula(p, ledger.c, ledger.c5, ledger.c6, ledger.psi_bar_h1_norm_sq?, ledger.gamma_bar?))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionBound {
    pub b: f64,
    /// Hausdorff dimension bound, `max(1, ceil(B^{1/m}))`.
    pub d: u64,
    /// Fractal dimension bound `2 d`.
    pub fractal: u64,
}

/// `B = (1+L^4) C7^2 L^{4m} / (C nu^2) + C (1+L^4)^{3/2} L^{4m-4} (zeta + L^2 (|beta|+1)^2) / nu^2`.
///
/// A missing `C7` is treated as zero.
pub fn dimension_bound(p: &ModelParams, ledger: &ConstantsLedger, zeta: f64) -> DimensionBound {
    let (l, m, nu, c) = (p.l, p.m, p.nu, ledger.c);
    let l4 = 1.0 + l.powi(4);
    let c7 = ledger.c7.unwrap_or(0.0);
    let b = l4 * c7 * c7 * l.powf(4.0 * m) / (c * nu * nu)
        + c * l4.powf(1.5) * l.powf(4.0 * m - 4.0) * (zeta + l * l * (p.beta.abs() + 1.0).powi(2))
            / (nu * nu);
    let d = bracket_integer(b, m);
    DimensionBound { b, d, fractal: d.saturating_mul(2) }
}

/// Largest `B^{1/m}` for which `d` is an exactly representable integer.
pub const EXACT_ROOT_LIMIT: f64 = 9_007_199_254_740_992.0;

/// Smallest integer `d >= 1` with `b^{1/m} <= d`.
///
/// Beyond [`EXACT_ROOT_LIMIT`] the ceiling is returned as computed in floating
/// point (saturating at `u64::MAX`).
pub fn bracket_integer(b: f64, m: f64) -> u64 {
    if !(b > 0.0) {
        return 1;
    }
    let root = b.powf(1.0 / m);
    if root >= EXACT_ROOT_LIMIT {
        return root.ceil() as u64;
    }
    let mut d = root.ceil().max(1.0) as u64;
    // Guard against an off-by-one from rounding in powf.
    while d > 1 && ((d - 1) as f64) >= root {
        d -= 1;
    }
    while (d as f64) < root {
        d += 1;
    }
    d
}

/// `E(t) <= E(0) e^{-C6 t} + gamma_bar / C6 (1 - e^{-C6 t})`.
pub fn energy_bound(ledger: &ConstantsLedger, e0: f64, t: f64) -> Option<f64> {
    let (c6, g) = (ledger.c6, ledger.gamma_bar?);
    if c6 <= 0.0 {
        return None;
    }
    let e = (-c6 * t).exp();
    Some(e0 * e + g / c6 * (1.0 - e))
}

/// `W(0) e^{-C6 t} + C5 (E(0) t e^{-C6 t} + 2 gamma_bar / C6^2 (1 - e^{-C6 t} - C6 t e^{-C6 t}))`,
/// the upper bound for `sum ||q_i||^2` at time `t`.
pub fn enstrophy_bound(ledger: &ConstantsLedger, w0: f64, e0: f64, t: f64) -> Option<f64> {
    let (c5, c6, g) = (ledger.c5, ledger.c6, ledger.gamma_bar?);
    if c6 <= 0.0 {
        return None;
    }
    let e = (-c6 * t).exp();
    Some(w0 * e + c5 * (e0 * t * e + 2.0 * g / (c6 * c6) * (1.0 - e - c6 * t * e)))
}
