//! Energy functionals, budget residuals and zonal-mean profiles.
//!
//! With `psi_hat = (psi1 - psi2)/2`:
//!
//! * `E = ||A^{1/2} Psi1||^2 + ||A^{1/2} psi2||^2 + 2 ||Psi_hat||^2`, where
//!   `Psi1 = psi1 - psi_bar` when a background shift is supplied;
//! * `W = sum ||q_i||^2 + sum ||A^{1/2} psi_i||^2 + 2 ||psi_hat||^2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::jacobian::DealiasedJacobian;
use crate::params::ModelParams;
use crate::state::LayerState;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    #[serde(rename = "E")]
    pub e: f64,
    #[serde(rename = "W")]
    pub w: f64,
    pub ke1: f64,
    pub ke2: f64,
    pub enstrophy1: f64,
    pub enstrophy2: f64,
    pub baroclinic: f64,
    pub h1_q: f64,
    pub cfl: f64,
    pub dt: f64,
    pub odd_residual: f64,
    pub budget_residual: f64,
}

pub const CSV_HEADER: &str =
    "t,E,W,ke1,ke2,enstrophy1,enstrophy2,baroclinic,h1_q,cfl,dt,odd_residual,budget_residual";

impl DiagnosticsRecord {
    /// Norm-derived entries of `state`; the stepping fields are left at zero.
    pub fn from_state(state: &LayerState, shift: Option<&SpectralField>) -> Self {
        let (psi1, psi2) = state.streamfunctions();
        let hat = &(&psi1 - &psi2) * 0.5;
        let ke1 = 0.5 * psi1.sobolev_norm_sq(1.0);
        let ke2 = 0.5 * psi2.sobolev_norm_sq(1.0);
        let enstrophy1 = 0.5 * state.q1.l2_norm_sq();
        let enstrophy2 = 0.5 * state.q2.l2_norm_sq();
        let baroclinic = hat.l2_norm_sq();
        DiagnosticsRecord {
            t: state.t,
            e: energy_from_streamfunctions(&psi1, &psi2, shift),
            w: 2.0 * (enstrophy1 + enstrophy2) + 2.0 * (ke1 + ke2) + 2.0 * baroclinic,
            ke1,
            ke2,
            enstrophy1,
            enstrophy2,
            baroclinic,
            h1_q: state.q1.sobolev_norm_sq(1.0) + state.q2.sobolev_norm_sq(1.0),
            cfl: 0.0,
            dt: 0.0,
            odd_residual: state.odd_residual(),
            budget_residual: 0.0,
        }
    }

    pub fn csv_row(&self) -> String {
        let v = [
            self.t,
            self.e,
            self.w,
            self.ke1,
            self.ke2,
            self.enstrophy1,
            self.enstrophy2,
            self.baroclinic,
            self.h1_q,
            self.cfl,
            self.dt,
            self.odd_residual,
            self.budget_residual,
        ];
        v.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(",")
    }

    pub fn parse_csv_row(line: &str) -> Result<Self> {
        let v: Vec<f64> = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::param("csv", e.to_string()))?;
        if v.len() != 13 {
            return Err(Error::param("csv", format!("expected 13 columns, got {}", v.len())));
        }
        Ok(DiagnosticsRecord {
            t: v[0],
            e: v[1],
            w: v[2],
            ke1: v[3],
            ke2: v[4],
            enstrophy1: v[5],
            enstrophy2: v[6],
            baroclinic: v[7],
            h1_q: v[8],
            cfl: v[9],
            dt: v[10],
            odd_residual: v[11],
            budget_residual: v[12],
        })
    }
}

fn energy_from_streamfunctions(
    psi1: &SpectralField,
    psi2: &SpectralField,
    shift: Option<&SpectralField>,
) -> f64 {
    let shifted;
    let p1 = match shift {
        Some(bar) => {
            shifted = psi1 - bar;
            &shifted
        }
        None => psi1,
    };
    let hat = &(p1 - psi2) * 0.5;
    p1.sobolev_norm_sq(1.0) + psi2.sobolev_norm_sq(1.0) + 2.0 * hat.l2_norm_sq()
}

pub fn energy_e(state: &LayerState, shift: Option<&SpectralField>) -> f64 {
    let (psi1, psi2) = state.streamfunctions();
    energy_from_streamfunctions(&psi1, &psi2, shift)
}

pub fn energy_w(state: &LayerState) -> f64 {
    DiagnosticsRecord::from_state(state, None).w
}

/// Terms of the energy and enstrophy balances at one state.
///
/// Energy: `1/2 d/dt (sum ||A^{1/2} psi_i||^2 + 2 ||psi_hat||^2)` equals the sum of
/// `energy_terms`, namely `(dx q1, psi1)`, `-nu sum ||A^{m/2} psi_i||^2`,
/// `-2 kappa_T ||psi_hat||^2` and `-kappa_M ||A^{1/2} psi2||^2`.
///
/// Enstrophy: `1/2 d/dt sum ||q_i||^2` equals the sum of `enstrophy_terms`,
/// namely `-(beta + 1/2)(dx psi1, q1)`, `-(beta - 1/2)(dx psi2, q2)`,
/// `kappa_T (psi_hat, q1 - q2)`, `kappa_M (A psi2, q2)` and
/// `nu sum (A^m psi_i, q_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BudgetTerms {
    pub energy: f64,
    pub enstrophy: f64,
    pub energy_terms: [f64; 4],
    pub enstrophy_terms: [f64; 5],
}

impl BudgetTerms {
    pub fn energy_rate(&self) -> f64 {
        self.energy_terms.iter().sum()
    }

    pub fn enstrophy_rate(&self) -> f64 {
        self.enstrophy_terms.iter().sum()
    }
}

pub fn budget_terms(state: &LayerState, p: &ModelParams) -> BudgetTerms {
    let (psi1, psi2) = state.streamfunctions();
    let (q1, q2) = (&state.q1, &state.q2);
    let hat = &(&psi1 - &psi2) * 0.5;
    let energy = 0.5 * (psi1.sobolev_norm_sq(1.0) + psi2.sobolev_norm_sq(1.0)) + hat.l2_norm_sq();
    let enstrophy = 0.5 * (q1.l2_norm_sq() + q2.l2_norm_sq());
    let visc_e = psi1.sobolev_norm_sq(p.m) + psi2.sobolev_norm_sq(p.m);
    let energy_terms = [
        q1.dx().inner(&psi1),
        -p.nu * visc_e,
        -2.0 * p.kappa_t * hat.l2_norm_sq(),
        -p.kappa_m * psi2.sobolev_norm_sq(1.0),
    ];
    let visc_q = psi1.apply_fractional_power(2.0 * p.m).inner(q1)
        + psi2.apply_fractional_power(2.0 * p.m).inner(q2);
    let enstrophy_terms = [
        -(p.beta + 0.5) * psi1.dx().inner(q1),
        -(p.beta - 0.5) * psi2.dx().inner(q2),
        p.kappa_t * hat.inner(&(q1 - q2)),
        p.kappa_m * psi2.apply_fractional_power(2.0).inner(q2),
        p.nu * visc_q,
    ];
    BudgetTerms { energy, enstrophy, energy_terms, enstrophy_terms }
}

fn normalized(rate: f64, terms: &[f64]) -> f64 {
    let scale = terms.iter().fold(rate.abs(), |m, t| m.max(t.abs()));
    let resid = (rate - terms.iter().sum::<f64>()).abs();
    if scale == 0.0 {
        0.0
    } else {
        resid / scale
    }
}

/// Mismatch between the finite-difference rates of the energy and enstrophy
/// functionals over `[prev.t, next.t]` and their balance terms at the midpoint
/// state, each normalized by its largest term; returns the larger one.
pub fn budget_residual(prev: &LayerState, next: &LayerState, p: &ModelParams) -> f64 {
    let dt = next.t - prev.t;
    if dt == 0.0 {
        return 0.0;
    }
    let a = budget_terms(prev, p);
    let b = budget_terms(next, p);
    let mid = LayerState {
        q1: &(&prev.q1 + &next.q1) * 0.5,
        q2: &(&prev.q2 + &next.q2) * 0.5,
        t: 0.5 * (prev.t + next.t),
    };
    let m = budget_terms(&mid, p);
    let re = normalized((b.energy - a.energy) / dt, &m.energy_terms);
    let rz = normalized((b.enstrophy - a.enstrophy) / dt, &m.enstrophy_terms);
    re.max(rz)
}

/// Jacobian contributions `sum (J(psi_i, q_i), psi_i)` and `sum (J(psi_i, q_i), q_i)`
/// relative to the largest linear term of the respective balance.
pub fn jacobian_budget_leak(state: &LayerState, p: &ModelParams) -> Result<(f64, f64)> {
    let (psi1, psi2) = state.streamfunctions();
    let mut jac = DealiasedJacobian::new(*state.lattice())?;
    let j1 = jac.apply(&psi1, &state.q1)?;
    let j2 = jac.apply(&psi2, &state.q2)?;
    let je = j1.inner(&psi1) + j2.inner(&psi2);
    let jz = j1.inner(&state.q1) + j2.inner(&state.q2);
    let t = budget_terms(state, p);
    let se = t.energy_terms.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let sz = t.enstrophy_terms.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let ratio = |j: f64, s: f64| if s == 0.0 { j.abs() } else { j.abs() / s };
    Ok((ratio(je, se), ratio(jz, sz)))
}

/// `u_i(y) = -d psi_i / dy` averaged over `x`, on the collocation `y` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ZonalProfiles {
    pub y: Vec<f64>,
    pub u1: Vec<f64>,
    pub u2: Vec<f64>,
}

pub fn zonal_mean_profiles(state: &LayerState) -> ZonalProfiles {
    let lat = *state.lattice();
    let (psi1, psi2) = state.streamfunctions();
    let profile = |psi: &SpectralField| -> Vec<f64> {
        let dk = lat.dk();
        let ys = lat.grid_coordinates();
        let kk = lat.k as i64;
        ys.iter()
            .map(|&y| {
                // Only k1 = 0 survives the x-average.
                let mut u = 0.0;
                for k2 in 1..=kk {
                    let c = psi.coeff(0, k2);
                    let ph = num_complex::Complex64::from_polar(1.0, dk * k2 as f64 * y);
                    // -d/dy of c e^{i k y} + c.c.
                    u += -2.0 * (c * ph * num_complex::Complex64::new(0.0, dk * k2 as f64)).re;
                }
                u
            })
            .collect()
    };
    ZonalProfiles { y: lat.grid_coordinates(), u1: profile(&psi1), u2: profile(&psi2) }
}

/// Trapezoidal time average of `h1_q` over records with `t >= t_start`.
pub fn time_average_h1(records: &[DiagnosticsRecord], t_start: f64) -> Result<f64> {
    time_average(records, t_start, |r| r.h1_q)
}

/// Trapezoidal time average of `f` over records with `t >= t_start`.
pub fn time_average(
    records: &[DiagnosticsRecord],
    t_start: f64,
    f: impl Fn(&DiagnosticsRecord) -> f64,
) -> Result<f64> {
    let window: Vec<&DiagnosticsRecord> = records.iter().filter(|r| r.t >= t_start).collect();
    if window.len() < 2 {
        return Err(Error::EmptyWindow { t_start });
    }
    let span = window[window.len() - 1].t - window[0].t;
    if !(span > 0.0) {
        return Err(Error::EmptyWindow { t_start });
    }
    let integral: f64 = window
        .windows(2)
        .map(|w| 0.5 * (f(w[0]) + f(w[1])) * (w[1].t - w[0].t))
        .sum();
    Ok(integral / span)
}
