//! Dense complex 2x2 matrices and their exponential-type functions.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// `[[a, b], [c, d]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl Mat2 {
    pub const ZERO: Mat2 = Mat2 { a: ZERO, b: ZERO, c: ZERO, d: ZERO };
    pub const IDENTITY: Mat2 = Mat2 { a: ONE, b: ZERO, c: ZERO, d: ONE };

    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Mat2 { a, b, c, d }
    }

    pub fn real(a: f64, b: f64, c: f64, d: f64) -> Self {
        Mat2::new(a.into(), b.into(), c.into(), d.into())
    }

    pub fn scale(self, s: f64) -> Mat2 {
        Mat2 { a: self.a * s, b: self.b * s, c: self.c * s, d: self.d * s }
    }

    pub fn conj(self) -> Mat2 {
        Mat2 { a: self.a.conj(), b: self.b.conj(), c: self.c.conj(), d: self.d.conj() }
    }

    #[inline]
    pub fn apply(&self, x: Complex64, y: Complex64) -> (Complex64, Complex64) {
        (self.a * x + self.b * y, self.c * x + self.d * y)
    }

    pub fn trace(&self) -> Complex64 {
        self.a + self.d
    }

    pub fn det(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (self.a.norm() + self.b.norm()).max(self.c.norm() + self.d.norm())
    }

    pub fn inverse(&self) -> Option<Mat2> {
        let det = self.det();
        if det == ZERO || !det.is_finite() {
            return None;
        }
        let r = det.inv();
        Some(Mat2 { a: self.d * r, b: -self.b * r, c: -self.c * r, d: self.a * r })
    }

    /// Eigenvalues `(tr -+ sqrt(tr^2 - 4 det)) / 2`, larger real part second.
    pub fn eigenvalues(&self) -> [Complex64; 2] {
        let tr = self.trace();
        let s = (tr * tr - 4.0 * self.det()).sqrt();
        let l1 = (tr - s) * 0.5;
        let l2 = (tr + s) * 0.5;
        if l1.re > l2.re {
            [l2, l1]
        } else {
            [l1, l2]
        }
    }

    /// A unit eigenvector for eigenvalue `lambda`.
    pub fn eigenvector(&self, lambda: Complex64) -> (Complex64, Complex64) {
        // Rows of (M - lambda I) annihilate the eigenvector; use the larger one.
        let r1 = (self.a - lambda, self.b);
        let r2 = (self.c, self.d - lambda);
        let n1 = r1.0.norm_sqr() + r1.1.norm_sqr();
        let n2 = r2.0.norm_sqr() + r2.1.norm_sqr();
        let (x, y) = if n1 == 0.0 && n2 == 0.0 {
            (ONE, ZERO)
        } else if n1 >= n2 {
            (r1.1, -r1.0)
        } else {
            (r2.1, -r2.0)
        };
        let n = (x.norm_sqr() + y.norm_sqr()).sqrt();
        (x / n, y / n)
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        Mat2 { a: self.a + o.a, b: self.b + o.b, c: self.c + o.c, d: self.d + o.d }
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        Mat2 { a: self.a - o.a, b: self.b - o.b, c: self.c - o.c, d: self.d - o.d }
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        Mat2 {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }
}

/// `exp(z)` and `phi_j(z) = sum_n z^n / (n + j)!` for `j = 1, 2, 3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiFunctions {
    pub exp: Mat2,
    pub phi1: Mat2,
    pub phi2: Mat2,
    pub phi3: Mat2,
}

/// Series cutoff below which the Taylor expansion is used directly.
pub const SERIES_RADIUS: f64 = 1e-2;
const SERIES_TERMS: usize = 10;

/// Scaling and squaring with a truncated Taylor series on `z / 2^s`.
pub fn phi_functions(z: Mat2) -> PhiFunctions {
    let norm = z.norm_inf();
    let mut s = 0u32;
    if norm >= SERIES_RADIUS {
        s = (norm / SERIES_RADIUS).log2().floor() as u32 + 1;
    }
    let mut f = phi_series(z.scale(0.5f64.powi(s as i32)));
    for _ in 0..s {
        f = double_argument(f);
    }
    f
}

pub fn expm(z: Mat2) -> Mat2 {
    phi_functions(z).exp
}

fn phi_series(z: Mat2) -> PhiFunctions {
    // Horner in z for sum_n z^n / (n + j)!.
    let horner = |j: usize| {
        let mut acc = Mat2::IDENTITY.scale(1.0 / factorial(SERIES_TERMS + j));
        for n in (0..SERIES_TERMS).rev() {
            acc = z * acc + Mat2::IDENTITY.scale(1.0 / factorial(n + j));
        }
        acc
    };
    PhiFunctions { exp: horner(0), phi1: horner(1), phi2: horner(2), phi3: horner(3) }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// `phi_j(2z)` from `phi_j(z)`.
fn double_argument(f: PhiFunctions) -> PhiFunctions {
    let e = f.exp;
    PhiFunctions {
        exp: e * e,
        phi1: (e * f.phi1 + f.phi1).scale(0.5),
        phi2: (e * f.phi2 + f.phi1 + f.phi2).scale(0.25),
        phi3: (e * f.phi3 + f.phi1.scale(0.5) + f.phi2 + f.phi3).scale(0.125),
    }
}
