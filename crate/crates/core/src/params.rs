use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Nondimensional parameters of the forced two-layer system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub beta: f64,
    #[serde(rename = "kappa_T")]
    pub kappa_t: f64,
    #[serde(rename = "kappa_M")]
    pub kappa_m: f64,
    pub nu: f64,
    /// Order of the hyperviscous operator `nu A^m`.
    pub m: f64,
    #[serde(rename = "L")]
    pub l: f64,
}

impl ModelParams {
    pub fn inviscid(beta: f64, l: f64) -> Self {
        ModelParams { beta, kappa_t: 0.0, kappa_m: 0.0, nu: 0.0, m: 3.0, l }
    }

    /// Domain period with `(2 pi / L)^4 = target`.
    pub fn period_for_quartic(target: f64) -> f64 {
        2.0 * std::f64::consts::PI / target.powf(0.25)
    }

    pub fn is_inviscid(&self) -> bool {
        self.nu == 0.0 && self.kappa_t == 0.0 && self.kappa_m == 0.0
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("beta", self.beta),
            ("kappa_T", self.kappa_t),
            ("kappa_M", self.kappa_m),
            ("nu", self.nu),
            ("m", self.m),
            ("L", self.l),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(Error::param(name, "must be finite"));
            }
        }
        if self.l < 1.0 {
            return Err(Error::param("L", format!("must be >= 1, got {}", self.l)));
        }
        if self.m <= 0.0 {
            return Err(Error::param("m", format!("must be > 0, got {}", self.m)));
        }
        for (name, v) in [("kappa_T", self.kappa_t), ("kappa_M", self.kappa_m), ("nu", self.nu)] {
            if v < 0.0 {
                return Err(Error::param(name, format!("must be >= 0, got {v}")));
            }
        }
        Ok(())
    }

    /// Extra requirement of the absorbing-ball and dimension estimates.
    pub fn validate_for_bounds(&self) -> Result<()> {
        self.validate()?;
        if self.m <= 2.5 {
            return Err(Error::param("m", format!("must exceed 5/2 for the bounds, got {}", self.m)));
        }
        if self.nu <= 0.0 {
            return Err(Error::param("nu", "must be > 0 for the bounds"));
        }
        Ok(())
    }
}
