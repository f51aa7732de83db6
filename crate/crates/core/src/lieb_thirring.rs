//! Empirical constant of the Lieb-Thirring type inequality
//! `|| sum_j |A^{1/2} gamma_j|^2 ||_inf <= C L (sum_j ||A^{3/2} gamma_j||^2)^{1/2}`
//! for families `theta_j = (theta_j1, theta_j2)` orthonormal in `L^2 x L^2`,
//! where `gamma_j` is the streamfunction pair whose potential vorticity is `theta_j`.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::inversion::{invert_pv, inversion_coefficients};
use crate::lattice::Lattice;
use crate::state::LayerState;

pub const ORTHONORMAL_TOL: f64 = 1e-10;

fn pair_inner(a: &LayerState, b: &LayerState) -> f64 {
    a.q1.inner(&b.q1) + a.q2.inner(&b.q2)
}

/// Largest entry of `|G - I|` for the Gram matrix of `family`.
pub fn gram_deviation(family: &[LayerState]) -> f64 {
    let mut dev: f64 = 0.0;
    for (i, a) in family.iter().enumerate() {
        for (j, b) in family.iter().enumerate().skip(i) {
            let target = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((pair_inner(a, b) - target).abs());
        }
    }
    dev
}

/// Left side, right side without `C L`, and their ratio divided by `L`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LiebThirringSides {
    pub sup_density: f64,
    pub rhs: f64,
    pub ratio: f64,
}

pub fn lieb_thirring_sides(family: &[LayerState]) -> Result<LiebThirringSides> {
    let first = family.first().ok_or(Error::NotOrthonormal { deviation: f64::INFINITY })?;
    let lat = *first.lattice();
    for s in family {
        if *s.lattice() != lat {
            return Err(Error::LatticeMismatch);
        }
    }
    let deviation = gram_deviation(family);
    if !(deviation <= ORTHONORMAL_TOL) {
        return Err(Error::NotOrthonormal { deviation });
    }
    let mut density = vec![0.0; lat.n * lat.n];
    let mut rhs_sq = 0.0;
    for theta in family {
        let (g1, g2) = invert_pv(&theta.q1, &theta.q2)?;
        for g in [&g1, &g2] {
            let grid = g.apply_fractional_power(1.0).to_grid();
            for (d, v) in density.iter_mut().zip(&grid) {
                *d += v * v;
            }
            rhs_sq += g.sobolev_norm_sq(3.0);
        }
    }
    let sup_density = density.iter().cloned().fold(0.0, f64::max);
    let rhs = rhs_sq.sqrt();
    Ok(LiebThirringSides { sup_density, rhs, ratio: sup_density / (lat.l * rhs) })
}

/// `sup sum_j |A^{1/2} gamma_j|^2 / (L (sum_j ||A^{3/2} gamma_j||^2)^{1/2})`.
pub fn lieb_thirring_ratio(family: &[LayerState]) -> Result<f64> {
    Ok(lieb_thirring_sides(family)?.ratio)
}

/// Family `{(sqrt(2)/L cos(2 pi x / L), 0)}`.
pub fn calibration_family(lattice: Lattice) -> Vec<LayerState> {
    let c = Complex64::new(2f64.sqrt() / (2.0 * lattice.l), 0.0);
    let q1 = SpectralField::single_mode(lattice, 1, 0, c);
    vec![LayerState { q1, q2: SpectralField::zeros(lattice), t: 0.0 }]
}

/// Closed-form ratio of [`calibration_family`]:
/// `2 (alpha^2 + gamma^2)^{1/2} / (L^3 mu^{1/2})` at `k = (1, 0)`.
pub fn calibration_ratio(l: f64) -> f64 {
    let (alpha, gamma) = inversion_coefficients((1, 0), l).expect("nonzero mode");
    let mu = (2.0 * std::f64::consts::PI / l).powi(2);
    2.0 * (alpha * alpha + gamma * gamma).sqrt() / (l.powi(3) * mu.sqrt())
}

/// Gram-Schmidt orthonormalization in `L^2 x L^2` (modified, two passes).
pub fn orthonormalize(mut family: Vec<LayerState>) -> Result<Vec<LayerState>> {
    for i in 0..family.len() {
        for _ in 0..2 {
            for j in 0..i {
                let c = pair_inner(&family[i], &family[j]);
                let (b1, b2) = (&family[j].q1 * c, &family[j].q2 * c);
                family[i].q1 = &family[i].q1 - &b1;
                family[i].q2 = &family[i].q2 - &b2;
            }
        }
        let n = pair_inner(&family[i], &family[i]).sqrt();
        if !(n > 0.0) {
            return Err(Error::NotOrthonormal { deviation: 1.0 });
        }
        family[i].q1 = &family[i].q1 * (1.0 / n);
        family[i].q2 = &family[i].q2 * (1.0 / n);
    }
    Ok(family)
}

/// `size` random pairs with coefficients `~ N(0, 1) |k|^{-decay}`, orthonormalized.
pub fn random_family(lattice: Lattice, size: usize, decay: f64, seed: u64) -> Result<Vec<LayerState>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || {
        SpectralField::from_fn(lattice, |k1, k2| {
            let r = ((k1 * k1 + k2 * k2) as f64).sqrt();
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            if r == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(re, im) * r.powf(-decay)
            }
        })
    };
    let family = (0..size)
        .map(|_| {
            let q1 = draw();
            let q2 = draw();
            LayerState { q1, q2, t: 0.0 }
        })
        .collect();
    orthonormalize(family)
}

/// Coefficient decay used by [`lt_check`].
pub const DEFAULT_DECAY: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LtSizeSummary {
    pub size: usize,
    pub median: f64,
    pub max: f64,
}

/// Ratios over random families of every size `1..=max_size`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LtCheckReport {
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "K")]
    pub k: usize,
    pub trials: usize,
    pub decay: f64,
    pub calibration: f64,
    pub sizes: Vec<LtSizeSummary>,
    pub max_ratio: f64,
    /// Least-squares slope of the medians against the family size.
    pub median_slope: f64,
}

impl LtCheckReport {
    pub fn max_over_calibration(&self) -> f64 {
        self.max_ratio / self.calibration
    }
}

/// Sample `trials` families of each size; trial `t` of size `k` is seeded with
/// `seed + 1000 k + t`.
pub fn lt_check(lattice: Lattice, max_size: usize, trials: usize, decay: f64, seed: u64) -> Result<LtCheckReport> {
    if max_size == 0 || trials == 0 {
        return Err(Error::param("trials", "need at least one size and one trial"));
    }
    let mut sizes = Vec::with_capacity(max_size);
    let mut max_ratio: f64 = 0.0;
    for size in 1..=max_size {
        let mut r = (0..trials)
            .map(|t| {
                let s = seed.wrapping_add(1000 * size as u64 + t as u64);
                lieb_thirring_ratio(&random_family(lattice, size, decay, s)?)
            })
            .collect::<Result<Vec<f64>>>()?;
        r.sort_by(f64::total_cmp);
        let median = if trials % 2 == 1 {
            r[trials / 2]
        } else {
            0.5 * (r[trials / 2 - 1] + r[trials / 2])
        };
        let max = r[trials - 1];
        max_ratio = max_ratio.max(max);
        sizes.push(LtSizeSummary { size, median, max });
    }
    let n = sizes.len() as f64;
    let xm = sizes.iter().map(|s| s.size as f64).sum::<f64>() / n;
    let ym = sizes.iter().map(|s| s.median).sum::<f64>() / n;
    let sxy: f64 = sizes.iter().map(|s| (s.size as f64 - xm) * (s.median - ym)).sum();
    let sxx: f64 = sizes.iter().map(|s| (s.size as f64 - xm).powi(2)).sum();
    Ok(LtCheckReport {
        l: lattice.l,
        k: lattice.k,
        trials,
        decay,
        calibration: calibration_ratio(lattice.l),
        sizes,
        max_ratio,
        median_slope: if sxx > 0.0 { sxy / sxx } else { 0.0 },
    })
}
