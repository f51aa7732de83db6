use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use twolayer_qg::bounds::bracket_integer;
use twolayer_qg::mat2::expm;
use twolayer_qg::output::{decode_coeffs, encode_coeffs};
use twolayer_qg::{
    invert_pv, jacobian, phi_functions, pv_from_streamfunction, DiagnosticsRecord, Lattice,
    Mat2, ModelParams, SpectralField,
};

fn random_field(lat: Lattice, seed: u64, decay: f64) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = SpectralField::from_fn(lat, |k1, k2| {
        let r = ((k1 * k1 + k2 * k2) as f64).sqrt().max(1.0);
        let s = r.powf(-decay);
        Complex64::new(rng.random_range(-1.0..1.0) * s, rng.random_range(-1.0..1.0) * s)
    });
    f.symmetrize();
    f
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

fn mat(v: [f64; 8]) -> Mat2 {
    Mat2::new(
        Complex64::new(v[0], v[1]),
        Complex64::new(v[2], v[3]),
        Complex64::new(v[4], v[5]),
        Complex64::new(v[6], v[7]),
    )
}

fn mat_close(a: Mat2, b: Mat2, tol: f64) -> bool {
    let scale = a.norm_inf().max(b.norm_inf()).max(1.0);
    (a - b).norm_inf() <= tol * scale
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn inversion_round_trips(l in 1.0f64..20.0, k in 1usize..10, seed: u64) {
        let lat = Lattice::new(l, k).unwrap();
        let q1 = random_field(lat, seed, 0.0);
        let q2 = random_field(lat, seed ^ 0x5a5a, 0.0);
        let (p1, p2) = invert_pv(&q1, &q2).unwrap();
        let (r1, r2) = pv_from_streamfunction(&p1, &p2).unwrap();
        for (a, b) in [(&q1, &r1), (&q2, &r2)] {
            let diff: f64 = a.coeffs().iter().zip(b.coeffs()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
            prop_assert!(diff <= 1e-12 * a.max_abs().max(1e-300), "{diff}");
        }
    }

    #[test]
    fn jacobian_is_antisymmetric_and_skew(l in 2.0f64..20.0, k in 2usize..9, seed: u64) {
        let lat = Lattice::new(l, k).unwrap();
        let a = random_field(lat, seed, 1.0);
        let b = random_field(lat, seed.wrapping_add(1), 1.0);
        let jab = jacobian(&a, &b).unwrap();
        let jba = jacobian(&b, &a).unwrap();
        let scale = jab.max_abs().max(1e-300);
        for (x, y) in jab.coeffs().iter().zip(jba.coeffs()) {
            prop_assert!((x + y).norm() <= 1e-12 * scale);
        }
        let norm = (jab.l2_norm_sq() * b.l2_norm_sq()).sqrt();
        prop_assert!(jab.inner(&b).abs() <= 1e-12 * norm);
        prop_assert!(jab.inner(&a).abs() <= 1e-12 * (jab.l2_norm_sq() * a.l2_norm_sq()).sqrt());
        prop_assert!(jab.hermitian_defect() <= 1e-14 * scale);
    }

    #[test]
    fn parseval_matches_grid_quadrature(l in 1.0f64..30.0, k in 1usize..10, seed: u64) {
        let lat = Lattice::new(l, k).unwrap();
        let f = random_field(lat, seed, 0.0);
        let grid = f.to_grid();
        let dx = lat.spacing();
        let quad: f64 = grid.iter().map(|v| v * v).sum::<f64>() * dx * dx;
        prop_assert!(rel(quad, f.l2_norm_sq()) < 1e-12);
    }

    #[test]
    fn odd_projection_is_idempotent(k in 1usize..10, seed: u64) {
        let lat = Lattice::new(7.0, k).unwrap();
        let f = random_field(lat, seed, 0.0);
        let p = f.project_odd_y();
        prop_assert!(p.odd_residual() <= 1e-15);
        let pp = p.project_odd_y();
        prop_assert_eq!(pp.coeffs(), p.coeffs());
        prop_assert!(rel(f.l2_norm_sq(), p.l2_norm_sq() + f.even_y_norm_sq()) < 1e-12);
    }

    #[test]
    fn phi_functions_satisfy_recurrences(v in prop::array::uniform8(-3.0f64..3.0), t in 0.0f64..2.0) {
        let z = mat(v).scale(t);
        let f = phi_functions(z);
        let i = Mat2::IDENTITY;
        // z phi_{j+1} = phi_j - 1/j!
        prop_assert!(mat_close(z * f.phi1, f.exp - i, 1e-11));
        prop_assert!(mat_close(z * f.phi2, f.phi1 - i, 1e-11));
        prop_assert!(mat_close(z * f.phi3, f.phi2 - i.scale(0.5), 1e-11));
        let half = expm(z.scale(0.5));
        prop_assert!(mat_close(half * half, f.exp, 1e-11));
    }

    #[test]
    fn bracket_holds(b in 1e-6f64..1e12, m in 2.01f64..6.0) {
        let d = bracket_integer(b, m);
        let root = b.powf(1.0 / m);
        prop_assert!(d >= 1);
        prop_assert!(root <= d as f64);
        prop_assert!(d == 1 || ((d - 1) as f64) < root);
    }

    #[test]
    fn params_json_round_trips(
        beta in -5.0f64..5.0, kt in 0.0f64..1.0, km in 0.0f64..1.0,
        nu in 0.0f64..1.0, m in 2.01f64..5.0, l in 1.0f64..50.0,
    ) {
        let p = ModelParams { beta, kappa_t: kt, kappa_m: km, nu, m, l };
        let back: ModelParams = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
        prop_assert_eq!(back, p);
    }

    #[test]
    fn diagnostics_row_round_trips(v in prop::array::uniform13(-1e6f64..1e6)) {
        let r = DiagnosticsRecord {
            t: v[0], e: v[1], w: v[2], ke1: v[3], ke2: v[4], enstrophy1: v[5], enstrophy2: v[6],
            baroclinic: v[7], h1_q: v[8], cfl: v[9], dt: v[10], odd_residual: v[11],
            budget_residual: v[12],
        };
        prop_assert_eq!(DiagnosticsRecord::parse_csv_row(&r.csv_row()).unwrap(), r);
    }

    #[test]
    fn snapshot_bytes_round_trip(v in prop::collection::vec((any::<f64>(), any::<f64>()), 0..64)) {
        let c: Vec<Complex64> = v.iter().map(|&(a, b)| Complex64::new(a, b)).collect();
        let back = decode_coeffs(&encode_coeffs(&c)).unwrap();
        prop_assert_eq!(back.len(), c.len());
        for (x, y) in back.iter().zip(&c) {
            prop_assert_eq!(x.re.to_bits(), y.re.to_bits());
            prop_assert_eq!(x.im.to_bits(), y.im.to_bits());
        }
    }
}
