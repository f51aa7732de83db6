//! Acceptance criteria. Prints one line per criterion and exits nonzero if any
//! criterion fails. `ACCEPTANCE=1,3,5` restricts the run to those criteria.

use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use twolayer_qg::bounds::{bracket_integer, EXACT_ROOT_LIMIT};
use twolayer_qg::diagnostics::time_average;
use twolayer_qg::integrator::eigenmode_initial_state;
use twolayer_qg::lieb_thirring::{lt_check, DEFAULT_DECAY};
use twolayer_qg::linstab::growth_rate_closed_form;
use twolayer_qg::{
    choose_m, constants_ledger, dimension_bound, growth_rate, initial_state, instability_scan, invert_pv,
    jacobian, pv_from_streamfunction, run, zeta_bound, Error, Lattice, LayerState, MemorySink,
    ModelParams, SpectralField, StepperConfig,
};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn random_field(lat: Lattice, rng: &mut ChaCha8Rng) -> SpectralField {
    let mut f = SpectralField::from_fn(lat, |_, _| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
    f.symmetrize();
    f
}

fn unstable_params() -> ModelParams {
    ModelParams {
        beta: 0.1,
        kappa_t: 1e-6,
        kappa_m: 1e-6,
        nu: 1e-6,
        m: 3.0,
        l: ModelParams::period_for_quartic(3.0 / 8.0),
    }
}

fn criterion_1() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for k in [4, 8, 16] {
        for _ in 0..100 {
            let l = 1.0 + 30.0 * rng.random::<f64>();
            let lat = Lattice::new(l, k).unwrap();
            let q1 = random_field(lat, &mut rng);
            let q2 = random_field(lat, &mut rng);
            let (p1, p2) = invert_pv(&q1, &q2).unwrap();
            let (r1, r2) = pv_from_streamfunction(&p1, &p2).unwrap();
            let err = ((&r1 - &q1).l2_norm_sq() + (&r2 - &q2).l2_norm_sq()).sqrt();
            let norm = (q1.l2_norm_sq() + q2.l2_norm_sq()).sqrt();
            worst = worst.max(err / norm);
        }
    }
    verdict(worst <= 1e-12, format!("max relative error {worst:.2e} (limit 1e-12) over 300 states"))
}

fn criterion_2() -> Verdict {
    let p = unstable_params();
    let scan = instability_scan(&p, 16).unwrap();
    let ok_unstable = scan.sigma_star > 0.0;
    let mut stable = Vec::new();
    for beta in [0.6, -0.6] {
        let q = ModelParams::inviscid(beta, p.l);
        stable.push(instability_scan(&q, 16).unwrap().sigma_star);
    }
    let ok_stable = stable.iter().all(|s| s.abs() <= 1e-12);
    verdict(
        ok_unstable && ok_stable,
        format!(
            "sigma* = {:.6} at k* = {:?}; |beta| = 0.6 inviscid sigma* = {:.1e}, {:.1e} (limit 1e-12)",
            scan.sigma_star, scan.k_star, stable[0], stable[1]
        ),
    )
}

fn criterion_3() -> Verdict {
    // (2 pi |k| / L)^4 = 1/2 at k = (1, 0).
    let l = ModelParams::period_for_quartic(0.5);
    let p = ModelParams::inviscid(0.0, l);
    let closed = growth_rate_closed_form((1, 0), &p).unwrap();
    let eig = growth_rate((1, 0), &p).unwrap();
    let exact = 2f64.powf(-0.25) * (2f64.sqrt() - 1.0) / 2.0;
    let agree = (closed - eig).abs() <= 1e-9 && (closed - exact).abs() <= 1e-9;
    let quoted = (closed * 1e6).round() / 1e6 == 0.174155;
    let literal = ModelParams::inviscid(0.0, 2.0 * PI * 2f64.powf(0.125));
    let at_literal = growth_rate((1, 0), &literal).unwrap();
    verdict(
        agree && quoted,
        format!(
            "L = {l:.6}: closed form {closed:.12}, eigensolve {eig:.12}, |diff| {:.1e}; \
             (L = 2 pi 2^(1/8) = {:.5} would give {at_literal:.6})",
            (closed - eig).abs(),
            literal.l
        ),
    )
}

fn criterion_4() -> Verdict {
    let p = unstable_params();
    let lat = Lattice::new(p.l, 32).unwrap();
    let scan = instability_scan(&p, 32).unwrap();
    let sigma = scan.sigma_star;
    let q0 = eigenmode_initial_state(lat, &p, scan.k_star, 1e-8).unwrap();
    let cfg = StepperConfig {
        dt: 0.01,
        t_end: 5.0 / sigma,
        diagnostics_interval: 0.1,
        snapshot_interval: 1e9,
        odd_symmetry: false,
        ..Default::default()
    };
    let mut sink = MemorySink::default();
    run(q0, &p, &cfg, None, &mut sink).unwrap();
    let pts: Vec<(f64, f64)> = sink.records.iter().map(|r| (r.t, 0.5 * r.w.ln())).collect();
    let n = pts.len() as f64;
    let tm = pts.iter().map(|x| x.0).sum::<f64>() / n;
    let ym = pts.iter().map(|x| x.1).sum::<f64>() / n;
    let slope = pts.iter().map(|x| (x.0 - tm) * (x.1 - ym)).sum::<f64>()
        / pts.iter().map(|x| (x.0 - tm).powi(2)).sum::<f64>();
    let rel = (slope - sigma).abs() / sigma;
    verdict(
        rel <= 1e-3,
        format!("linstab {sigma:.8}, nonlinear fit {slope:.8}, relative {rel:.2e} (limit 1e-3) over t = {:.2}", cfg.t_end),
    )
}

fn budget_params() -> ModelParams {
    ModelParams { beta: 0.1, kappa_t: 0.05, kappa_m: 0.05, nu: 1e-4, m: 3.0, l: 16.0 }
}

fn max_budget_residual(dt: f64) -> f64 {
    let p = budget_params();
    let lat = Lattice::new(p.l, 16).unwrap();
    let cfg = StepperConfig { dt, t_end: 10.0, diagnostics_interval: 0.5, init_amplitude: 1e-3, ..Default::default() };
    let q0 = initial_state(lat, &p, &cfg).unwrap();
    let mut sink = MemorySink::default();
    run(q0, &p, &cfg, None, &mut sink).unwrap();
    sink.records.iter().skip(1).map(|r| r.budget_residual).fold(0.0, f64::max)
}

fn criterion_5() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut skew: f64 = 0.0;
    for _ in 0..20 {
        let lat = Lattice::new(1.0 + 20.0 * rng.random::<f64>(), 32).unwrap();
        let s = LayerState::new(random_field(lat, &mut rng), random_field(lat, &mut rng), 0.0).unwrap();
        let (psi1, psi2) = s.streamfunctions();
        for (psi, q) in [(&psi1, &s.q1), (&psi2, &s.q2)] {
            let j = jacobian(psi, q).unwrap();
            let scale = (j.l2_norm_sq() * q.l2_norm_sq()).sqrt();
            skew = skew.max(j.inner(q).abs() / scale);
            let scale = (j.l2_norm_sq() * psi.l2_norm_sq()).sqrt();
            skew = skew.max(j.inner(psi).abs() / scale);
        }
    }

    let p = budget_params();
    let lat = Lattice::new(p.l, 16).unwrap();
    let cfg = StepperConfig {
        t_end: 100.0,
        diagnostics_interval: 1.0,
        snapshot_interval: 1.0,
        init_amplitude: 1e-2,
        ..Default::default()
    };
    let q0 = initial_state(lat, &p, &cfg).unwrap();
    let mut sink = MemorySink { keep_snapshots: true, ..Default::default() };
    let summary = run(q0, &p, &cfg, None, &mut sink).unwrap();
    let zero = lat.zero_index();
    let mean_zero = sink
        .snapshots
        .iter()
        .all(|s| s.q1.coeffs()[zero] == Complex64::new(0.0, 0.0) && s.q2.coeffs()[zero] == Complex64::new(0.0, 0.0));
    let odd = summary.odd_residual_max;
    let w_end = sink.records.last().unwrap().w;

    let default_dt = StepperConfig::default().dt;
    let r: Vec<f64> = [4.0, 2.0, 1.0].iter().map(|f| max_budget_residual(f * default_dt)).collect();
    let orders = [(r[0] / r[1]).log2(), (r[1] / r[2]).log2()];
    let order_ok = orders.iter().all(|o| (1.8..=2.2).contains(o));
    let pass = skew <= 1e-12 && mean_zero && odd <= 1e-12 && r[2] <= 1e-6 && order_ok;
    verdict(
        pass,
        format!(
            "skew {skew:.1e}; mean zero exact: {mean_zero}; odd residual {odd:.1e} over t = 100 (W end {w_end:.2e}); \
             budget residual {:.2e} at dt = {default_dt} ({:.2e}, {:.2e} at 4 dt, 2 dt), orders {:.2}, {:.2}",
            r[2], r[0], r[1], orders[0], orders[1]
        ),
    )
}

fn criterion_6() -> Verdict {
    let p = ModelParams { nu: 1e-5, ..unstable_params() };
    let lat = Lattice::new(p.l, 48).unwrap();
    let mut means = Vec::new();
    let mut notes = Vec::new();
    for amp in [1e-6, 1e-3] {
        let cfg = StepperConfig {
            dt: 0.01,
            t_end: 500.0,
            diagnostics_interval: 1.0,
            snapshot_interval: 1e9,
            init_amplitude: amp,
            seed: 6,
            ..Default::default()
        };
        let q0 = initial_state(lat, &p, &cfg).unwrap();
        let mut sink = MemorySink::default();
        match run(q0, &p, &cfg, None, &mut sink) {
            Ok(_) => {
                let m = time_average(&sink.records, 1000.0 / 3.0, |r| r.w).unwrap();
                notes.push(format!("amp {amp:.0e}: W(0) {:.2e}, mean W {m:.3e}", sink.records[0].w));
                means.push(m);
            }
            Err(e @ Error::BlowUp { .. }) => notes.push(format!("amp {amp:.0e}: {e}")),
            Err(e) => notes.push(format!("amp {amp:.0e}: error {e}")),
        }
    }
    let odd_best = instability_scan(&p, 48)
        .unwrap()
        .entries
        .iter()
        .filter(|e| e.k2 != 0)
        .map(|e| e.re_lambda_max)
        .fold(f64::NEG_INFINITY, f64::max);
    let ratio = if means.len() == 2 { means[1].max(means[0]) / means[1].min(means[0]) } else { f64::INFINITY };
    verdict(
        means.len() == 2 && ratio <= 2.0,
        format!(
            "{}; ratio {ratio:.3e} (limit 2); largest growth rate among odd-admissible modes {odd_best:.2e}",
            notes.join("; ")
        ),
    )
}

fn criterion_7() -> Verdict {
    let m33 = choose_m(1.0, 1.0, 3.0, 1.0).unwrap();
    let unit = ModelParams { beta: 0.0, kappa_t: 1.0, kappa_m: 0.0, nu: 1.0, m: 3.0, l: 1.0 };
    let mut led = constants_ledger(&unit, 1.0, 1.0).unwrap();
    led.c7 = Some(1.0);
    let db = dimension_bound(&unit, &led, 0.0);
    let unit_ok = m33 == 33 && db.d == 2 && db.fractal == 4 && (db.b - (2.0 + 2f64.powf(1.5))).abs() < 1e-12;

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut checked, mut violations, mut beyond) = (0, 0, 0);
    while checked < 1000 {
        let p = ModelParams {
            beta: rng.random_range(-1.0..1.0),
            kappa_t: 10f64.powf(rng.random_range(-3.0..0.0)),
            kappa_m: rng.random_range(0.0..1.0),
            nu: 10f64.powf(rng.random_range(-1.0..1.0)),
            m: rng.random_range(2.6..4.0),
            l: rng.random_range(1.0..4.0),
        };
        let c = 10f64.powf(rng.random_range(-1.0..1.0));
        let Ok(led) = constants_ledger(&p, c, 1.0) else { continue };
        let Some(zeta) = zeta_bound(&p, &led) else { continue };
        let db = dimension_bound(&p, &led, zeta);
        let root = db.b.powf(1.0 / p.m);
        if root >= EXACT_ROOT_LIMIT {
            beyond += 1;
            continue;
        }
        checked += 1;
        if !(((db.d - 1) as f64) < root && root <= db.d as f64) || db.d != bracket_integer(db.b, p.m) {
            violations += 1;
        }
    }
    verdict(
        unit_ok && violations == 0,
        format!(
            "choose_M = {m33}; unit B = {:.4}, d = {}, fractal {}; bracket violations {violations}/{checked} ({beyond} draws with B^(1/m) >= 2^53 skipped)",
            db.b, db.d, db.fractal
        ),
    )
}

fn criterion_8() -> Verdict {
    let lat = Lattice::new(2.0 * PI, 8).unwrap();
    let rep = lt_check(lat, 16, 20, DEFAULT_DECAY, 8).unwrap();
    let factor = rep.max_over_calibration();
    let pass = rep.max_ratio.is_finite() && factor <= 4.0 && rep.median_slope <= 0.0;
    let first = rep.sizes.first().unwrap().median / rep.calibration;
    let last = rep.sizes.last().unwrap().median / rep.calibration;
    verdict(
        pass,
        format!(
            "max ratio {:.3}x calibration (limit 4); median slope {:.2e} per member; medians {first:.3}x to {last:.3}x",
            factor, rep.median_slope / rep.calibration
        ),
    )
}

fn main() {
    let only: Option<Vec<usize>> = std::env::var("ACCEPTANCE")
        .ok()
        .map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let criteria: [(usize, fn() -> Verdict); 8] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
    ];
    let mut failed = Vec::new();
    for (n, f) in criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&n)) {
            continue;
        }
        let t = Instant::now();
        let v = f();
        let tag = if v.pass { "PASS" } else { "FAIL" };
        println!("criterion {n} {tag} [{:.1} s] {}", t.elapsed().as_secs_f64(), v.detail);
        if !v.pass {
            failed.push(n);
        }
    }
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
