//! Time integration of the nonlinear two-layer system.
//!
//! Per mode the state is `u_k = (q1_k, q2_k)` and
//! `du_k/dt = M_k u_k + N_k(u)`, `N = -(J(psi1, q1), J(psi2, q2))`.
//! ETDRK4 integrates `M_k` exactly through 2x2 exponentials; IMEX-CNAB2 treats
//! only the hyperviscous part implicitly.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::diagnostics::{budget_residual, DiagnosticsRecord};
use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::inversion::coefficients_from_mu;
use crate::jacobian::DealiasedJacobian;
use crate::lattice::Lattice;
use crate::linstab::{block_entries, linear_block};
use crate::mat2::{phi_functions, Mat2};
use crate::params::ModelParams;
use crate::state::LayerState;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Coefficient magnitude, relative to `max(1, W(0))`, treated as blow-up.
pub const BLOWUP_FACTOR: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    #[serde(rename = "ETDRK4")]
    Etdrk4,
    #[serde(rename = "IMEX-CNAB2")]
    ImexCnab2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StepperConfig {
    pub scheme: Scheme,
    pub dt: f64,
    pub adaptive: bool,
    pub cfl_target: f64,
    pub t_end: f64,
    pub snapshot_interval: f64,
    pub diagnostics_interval: f64,
    pub seed: u64,
    pub init_amplitude: f64,
    /// Inclusive range of `|k|` seeded with noise.
    pub init_band: (f64, f64),
    pub odd_symmetry: bool,
    /// Seed the leading eigenvector of this mode instead of noise.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub init_mode: Option<(i64, i64)>,
}

impl Default for StepperConfig {
    fn default() -> Self {
        StepperConfig {
            scheme: Scheme::Etdrk4,
            dt: 0.005,
            adaptive: false,
            cfl_target: 0.5,
            t_end: 100.0,
            snapshot_interval: 10.0,
            diagnostics_interval: 0.5,
            seed: 0,
            init_amplitude: 1e-6,
            init_band: (1.0, 4.0),
            odd_symmetry: true,
            init_mode: None,
        }
    }
}

impl StepperConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [("dt", self.dt), ("cfl_target", self.cfl_target)];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::param(name, format!("must be positive, got {v}")));
            }
        }
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return Err(Error::param("t_end", format!("must be >= 0, got {}", self.t_end)));
        }
        for (name, v) in [
            ("snapshot_interval", self.snapshot_interval),
            ("diagnostics_interval", self.diagnostics_interval),
        ] {
            if !(v >= self.dt) || !v.is_finite() {
                return Err(Error::param(name, format!("must be finite and >= dt, got {v}")));
            }
        }
        if !(self.init_amplitude >= 0.0) || !self.init_amplitude.is_finite() {
            return Err(Error::param("init_amplitude", "must be finite and >= 0"));
        }
        let (lo, hi) = self.init_band;
        if !(lo >= 0.0 && hi >= lo) {
            return Err(Error::param("init_band", format!("need 0 <= low <= high, got [{lo}, {hi}]")));
        }
        Ok(())
    }
}

/// `M_k` for every stored mode (zero block at `k = 0`).
pub fn linear_operator(lattice: &Lattice, p: &ModelParams) -> Vec<Mat2> {
    let mut out = vec![Mat2::ZERO; lattice.len()];
    for (i, k1, k2) in lattice.modes() {
        out[i] = block_entries(lattice.dk() * k1 as f64, lattice.laplacian_eigenvalue(k1, k2), p);
    }
    out
}

/// Hyperviscous part `-nu mu^m [[alpha, gamma], [gamma, alpha]]` of `M_k`.
fn dissipation_operator(lattice: &Lattice, p: &ModelParams) -> Vec<Mat2> {
    let mut out = vec![Mat2::ZERO; lattice.len()];
    for (i, k1, k2) in lattice.modes() {
        let mu = lattice.laplacian_eigenvalue(k1, k2);
        let (alpha, gamma) = coefficients_from_mu(mu);
        let v = -p.nu * mu.powf(p.m);
        out[i] = Mat2::real(v * alpha, v * gamma, v * gamma, v * alpha);
    }
    out
}

/// Step-size dependent per-mode matrices.
#[derive(Debug, Clone)]
pub struct PrecomputedLinear {
    h: f64,
    scheme: Scheme,
    /// `exp(h M_k)`.
    exp: Vec<Mat2>,
    // ETDRK4: exp(h M/2), (h/2) phi1(h M/2) and the three weights, scaled by h.
    exp_half: Vec<Mat2>,
    q_half: Vec<Mat2>,
    f1: Vec<Mat2>,
    f2: Vec<Mat2>,
    f3: Vec<Mat2>,
    // IMEX-CNAB2: (I - h D/2)^{-1}, (I + h D/2), M - D.
    implicit: Vec<Mat2>,
    explicit_diag: Vec<Mat2>,
    explicit_linear: Vec<Mat2>,
}

impl PrecomputedLinear {
    pub fn new(lattice: &Lattice, p: &ModelParams, scheme: Scheme, h: f64) -> Self {
        let ops = linear_operator(lattice, p);
        Self::from_operator(lattice, p, &ops, scheme, h)
    }

    fn from_operator(lattice: &Lattice, p: &ModelParams, ops: &[Mat2], scheme: Scheme, h: f64) -> Self {
        let len = ops.len();
        let mut pre = PrecomputedLinear {
            h,
            scheme,
            exp: vec![Mat2::IDENTITY; len],
            exp_half: Vec::new(),
            q_half: Vec::new(),
            f1: Vec::new(),
            f2: Vec::new(),
            f3: Vec::new(),
            implicit: Vec::new(),
            explicit_diag: Vec::new(),
            explicit_linear: Vec::new(),
        };
        if scheme == Scheme::Etdrk4 {
            pre.exp_half = vec![Mat2::IDENTITY; len];
            pre.q_half = vec![Mat2::ZERO; len];
            pre.f1 = vec![Mat2::ZERO; len];
            pre.f2 = vec![Mat2::ZERO; len];
            pre.f3 = vec![Mat2::ZERO; len];
        }
        // Blocks of -k are conjugates of those of k.
        for i in 0..len / 2 {
            let j = len - 1 - i;
            let z = ops[i].scale(h);
            let full = phi_functions(z);
            pre.exp[i] = full.exp;
            pre.exp[j] = full.exp.conj();
            if scheme == Scheme::Etdrk4 {
                let half = phi_functions(z.scale(0.5));
                let set = |v: &mut Vec<Mat2>, m: Mat2| {
                    v[i] = m;
                    v[j] = m.conj();
                };
                set(&mut pre.exp_half, half.exp);
                set(&mut pre.q_half, half.phi1.scale(0.5 * h));
                set(&mut pre.f1, (full.phi1 - full.phi2.scale(3.0) + full.phi3.scale(4.0)).scale(h));
                set(&mut pre.f2, (full.phi2 - full.phi3.scale(2.0)).scale(h));
                set(&mut pre.f3, (full.phi3.scale(4.0) - full.phi2).scale(h));
            }
        }
        if scheme == Scheme::ImexCnab2 {
            let diss = dissipation_operator(lattice, p);
            pre.implicit = diss
                .iter()
                .map(|d| (Mat2::IDENTITY - d.scale(0.5 * h)).inverse().expect("I - hD/2 is positive definite"))
                .collect();
            pre.explicit_diag = diss.iter().map(|d| Mat2::IDENTITY + d.scale(0.5 * h)).collect();
            pre.explicit_linear = ops.iter().zip(&diss).map(|(m, d)| *m - *d).collect();
        }
        pre
    }

    pub fn step_size(&self) -> f64 {
        self.h
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    /// `exp(h M_k)` at storage offset `idx`.
    pub fn exponential(&self, idx: usize) -> Mat2 {
        self.exp[idx]
    }
}

/// Result of one step.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub state: LayerState,
    /// Step size actually taken.
    pub dt: f64,
    /// Advective CFL number of the state the step started from.
    pub cfl: f64,
    /// Even-in-y fraction before re-projection (zero when the flag is off).
    pub odd_residual: f64,
}

pub struct Stepper {
    lattice: Lattice,
    params: ModelParams,
    cfg: StepperConfig,
    ops: Vec<Mat2>,
    inversion: Vec<(f64, f64)>,
    pre: PrecomputedLinear,
    jac: DealiasedJacobian,
    nonlinear: bool,
    blowup_reference: f64,
    history: Option<(Vec<Complex64>, Vec<Complex64>)>,
    psi1: Vec<Complex64>,
    psi2: Vec<Complex64>,
}

impl std::fmt::Debug for Stepper {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Stepper")
            .field("lattice", &self.lattice)
            .field("dt", &self.pre.h)
            .field("scheme", &self.cfg.scheme)
            .finish()
    }
}

impl Stepper {
    pub fn new(lattice: Lattice, p: &ModelParams, cfg: &StepperConfig) -> Result<Self> {
        p.validate()?;
        cfg.validate()?;
        if p.l != lattice.l {
            return Err(Error::param("L", "model and lattice periods differ"));
        }
        let ops = linear_operator(&lattice, p);
        let pre = PrecomputedLinear::from_operator(&lattice, p, &ops, cfg.scheme, cfg.dt);
        let mut inversion = vec![(0.0, 0.0); lattice.len()];
        for (i, k1, k2) in lattice.modes() {
            inversion[i] = coefficients_from_mu(lattice.laplacian_eigenvalue(k1, k2));
        }
        Ok(Stepper {
            lattice,
            params: *p,
            cfg: cfg.clone(),
            ops,
            inversion,
            pre,
            jac: DealiasedJacobian::new(lattice)?,
            nonlinear: true,
            blowup_reference: 1.0,
            history: None,
            psi1: vec![ZERO; lattice.len()],
            psi2: vec![ZERO; lattice.len()],
        })
    }

    /// Drop the Jacobian terms.
    pub fn linear_only(mut self) -> Self {
        self.nonlinear = false;
        self
    }

    /// Blow-up threshold becomes `BLOWUP_FACTOR * max(1, w0)`.
    pub fn set_blowup_reference(&mut self, w0: f64) {
        self.blowup_reference = w0.max(1.0);
    }

    pub fn dt(&self) -> f64 {
        self.pre.h
    }

    pub fn precomputed(&self) -> &PrecomputedLinear {
        &self.pre
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    /// Rebuild the step-size dependent matrices; restarts multistep history.
    pub fn set_dt(&mut self, h: f64) {
        if h != self.pre.h {
            self.pre = PrecomputedLinear::from_operator(&self.lattice, &self.params, &self.ops, self.cfg.scheme, h);
            self.history = None;
        }
    }

    /// Advective CFL number `(max |grad psi| + 1) dt / (L / N)`.
    pub fn cfl_number(&self, speed: f64, dt: f64) -> f64 {
        (speed + 1.0) * dt / self.lattice.spacing()
    }

    /// CFL-limited step size, never above the configured `dt`.
    fn adapted_dt(&self, speed: f64) -> f64 {
        let limit = self.cfg.cfl_target * self.lattice.spacing() / (speed + 1.0);
        let target = self.cfg.dt.min(limit);
        let h = self.pre.h;
        if target < h || target > 1.25 * h {
            target
        } else {
            h
        }
    }

    /// `N(u)` into `out`; returns the largest `|grad psi_i|` on the product grid.
    fn nonlinear_term(
        &mut self,
        q1: &[Complex64],
        q2: &[Complex64],
        out1: &mut [Complex64],
        out2: &mut [Complex64],
    ) -> f64 {
        for (i, &(alpha, gamma)) in self.inversion.iter().enumerate() {
            self.psi1[i] = -(q1[i] * alpha + q2[i] * gamma);
            self.psi2[i] = -(q1[i] * gamma + q2[i] * alpha);
        }
        if !self.nonlinear {
            out1.fill(ZERO);
            out2.fill(ZERO);
            return speed_from_spectrum(&self.lattice, &self.psi1).max(speed_from_spectrum(&self.lattice, &self.psi2));
        }
        let (p1, p2) = (std::mem::take(&mut self.psi1), std::mem::take(&mut self.psi2));
        let speed = self.jac.apply_layers(&p1, q1, &p2, q2, out1, out2);
        self.psi1 = p1;
        self.psi2 = p2;
        for v in out1.iter_mut().chain(out2.iter_mut()) {
            *v = -*v;
        }
        speed
    }

    /// Advance `state` by one step, re-projecting odd symmetry when configured.
    pub fn step(&mut self, state: &LayerState) -> Result<StepOutcome> {
        self.step_capped(state, f64::INFINITY)
    }

    /// As [`Stepper::step`] but never stepping past `t_max`.
    pub fn step_capped(&mut self, state: &LayerState, t_max: f64) -> Result<StepOutcome> {
        if *state.lattice() != self.lattice {
            return Err(Error::LatticeMismatch);
        }
        let len = self.lattice.len();
        let u1 = state.q1.coeffs();
        let u2 = state.q2.coeffs();
        let mut nu1 = vec![ZERO; len];
        let mut nu2 = vec![ZERO; len];
        let speed = self.nonlinear_term(u1, u2, &mut nu1, &mut nu2);
        let mut h = if self.cfg.adaptive { self.adapted_dt(speed) } else { self.pre.h };
        let remaining = t_max - state.t;
        if h > remaining {
            h = remaining;
        }
        self.set_dt(h);
        let cfl = self.cfl_number(speed, h);
        let (mut v1, mut v2) = match self.cfg.scheme {
            Scheme::Etdrk4 => self.etdrk4(u1, u2, &nu1, &nu2),
            Scheme::ImexCnab2 => self.cnab2(u1, u2, nu1, nu2),
        };
        self.check_finite(&v1, &v2, state.t + h)?;
        let mut q1 = SpectralField::from_raw(self.lattice, std::mem::take(&mut v1));
        let mut q2 = SpectralField::from_raw(self.lattice, std::mem::take(&mut v2));
        q1.symmetrize();
        q2.symmetrize();
        let mut next = LayerState { q1, q2, t: state.t + h };
        let mut odd_residual = 0.0;
        if self.cfg.odd_symmetry {
            odd_residual = next.odd_residual();
            next = next.project_odd_y();
        }
        Ok(StepOutcome { state: next, dt: h, cfl, odd_residual })
    }

    fn etdrk4(
        &mut self,
        u1: &[Complex64],
        u2: &[Complex64],
        nu1: &[Complex64],
        nu2: &[Complex64],
    ) -> (Vec<Complex64>, Vec<Complex64>) {
        let len = u1.len();
        let pre = std::mem::replace(&mut self.pre, PrecomputedLinear::empty());
        let stage = |e: &[Mat2], q: &[Mat2], x1: &[Complex64], x2: &[Complex64], n1: &[Complex64], n2: &[Complex64]| {
            let mut o1 = vec![ZERO; len];
            let mut o2 = vec![ZERO; len];
            for i in 0..len {
                let (a, b) = e[i].apply(x1[i], x2[i]);
                let (c, d) = q[i].apply(n1[i], n2[i]);
                o1[i] = a + c;
                o2[i] = b + d;
            }
            (o1, o2)
        };
        let (a1, a2) = stage(&pre.exp_half, &pre.q_half, u1, u2, nu1, nu2);
        let mut na1 = vec![ZERO; len];
        let mut na2 = vec![ZERO; len];
        self.nonlinear_term(&a1, &a2, &mut na1, &mut na2);
        let (b1, b2) = stage(&pre.exp_half, &pre.q_half, u1, u2, &na1, &na2);
        let mut nb1 = vec![ZERO; len];
        let mut nb2 = vec![ZERO; len];
        self.nonlinear_term(&b1, &b2, &mut nb1, &mut nb2);
        let w1: Vec<Complex64> = (0..len).map(|i| nb1[i] * 2.0 - nu1[i]).collect();
        let w2: Vec<Complex64> = (0..len).map(|i| nb2[i] * 2.0 - nu2[i]).collect();
        let (c1, c2) = stage(&pre.exp_half, &pre.q_half, &a1, &a2, &w1, &w2);
        let mut nc1 = vec![ZERO; len];
        let mut nc2 = vec![ZERO; len];
        self.nonlinear_term(&c1, &c2, &mut nc1, &mut nc2);
        let mut o1 = vec![ZERO; len];
        let mut o2 = vec![ZERO; len];
        for i in 0..len {
            let (x, y) = pre.exp[i].apply(u1[i], u2[i]);
            let (p, q) = pre.f1[i].apply(nu1[i], nu2[i]);
            let (r, s) = pre.f2[i].apply((na1[i] + nb1[i]) * 2.0, (na2[i] + nb2[i]) * 2.0);
            let (v, w) = pre.f3[i].apply(nc1[i], nc2[i]);
            o1[i] = x + p + r + v;
            o2[i] = y + q + s + w;
        }
        self.pre = pre;
        (o1, o2)
    }

    fn cnab2(
        &mut self,
        u1: &[Complex64],
        u2: &[Complex64],
        mut f1: Vec<Complex64>,
        mut f2: Vec<Complex64>,
    ) -> (Vec<Complex64>, Vec<Complex64>) {
        let len = u1.len();
        let h = self.pre.h;
        // Explicit tendency F = (M - D) u + N(u).
        for i in 0..len {
            let (a, b) = self.pre.explicit_linear[i].apply(u1[i], u2[i]);
            f1[i] += a;
            f2[i] += b;
        }
        let mut o1 = vec![ZERO; len];
        let mut o2 = vec![ZERO; len];
        for i in 0..len {
            let (g1, g2) = match &self.history {
                Some((p1, p2)) => (f1[i] * 1.5 - p1[i] * 0.5, f2[i] * 1.5 - p2[i] * 0.5),
                None => (f1[i], f2[i]),
            };
            let (x, y) = self.pre.explicit_diag[i].apply(u1[i], u2[i]);
            let (a, b) = self.pre.implicit[i].apply(x + g1 * h, y + g2 * h);
            o1[i] = a;
            o2[i] = b;
        }
        self.history = Some((f1, f2));
        (o1, o2)
    }

    fn check_finite(&self, v1: &[Complex64], v2: &[Complex64], t: f64) -> Result<()> {
        let limit = BLOWUP_FACTOR * self.blowup_reference;
        let mut worst: Option<(usize, f64)> = None;
        for (i, c) in v1.iter().chain(v2.iter()).enumerate() {
            let m = c.norm();
            let bad = !m.is_finite() || m > limit;
            if bad && worst.map_or(true, |(_, w)| !(m <= w)) {
                worst = Some((i % v1.len(), m));
            }
        }
        match worst {
            None => Ok(()),
            Some((i, max_abs)) => {
                let (k1, k2) = self.lattice.mode(i);
                Err(Error::BlowUp { t, k1, k2, max_abs })
            }
        }
    }
}

impl PrecomputedLinear {
    fn empty() -> Self {
        PrecomputedLinear {
            h: 0.0,
            scheme: Scheme::Etdrk4,
            exp: Vec::new(),
            exp_half: Vec::new(),
            q_half: Vec::new(),
            f1: Vec::new(),
            f2: Vec::new(),
            f3: Vec::new(),
            implicit: Vec::new(),
            explicit_diag: Vec::new(),
            explicit_linear: Vec::new(),
        }
    }
}

/// Spectral upper bound on `|grad psi|`, used when the Jacobian is disabled.
fn speed_from_spectrum(lat: &Lattice, psi: &[Complex64]) -> f64 {
    lat.modes()
        .map(|(i, k1, k2)| psi[i].norm() * lat.laplacian_eigenvalue(k1, k2).sqrt())
        .sum()
}

/// Full right-hand side `(dq1/dt, dq2/dt)` at `state`.
pub fn tendency(state: &LayerState, p: &ModelParams) -> Result<(SpectralField, SpectralField)> {
    let lat = *state.lattice();
    let (psi1, psi2) = state.streamfunctions();
    let mut jac = DealiasedJacobian::new(lat)?;
    let j1 = jac.apply(&psi1, &state.q1)?;
    let j2 = jac.apply(&psi2, &state.q2)?;
    let ops = linear_operator(&lat, p);
    let mut t1 = -&j1;
    let mut t2 = -&j2;
    {
        let (q1, q2) = (state.q1.coeffs(), state.q2.coeffs());
        let o1 = t1.coeffs_mut();
        let o2 = t2.coeffs_mut();
        for (i, _, _) in lat.modes() {
            let (a, b) = ops[i].apply(q1[i], q2[i]);
            o1[i] += a;
            o2[i] += b;
        }
    }
    Ok((t1, t2))
}

/// Band-limited complex Gaussian noise in both layers, deterministic in `cfg.seed`.
///
/// Modes with `low <= |k| <= high` (integer index norm) are seeded; the result
/// is odd-projected when `cfg.odd_symmetry` is set and scaled so that the
/// layer-averaged RMS of `q` equals `cfg.init_amplitude`.
pub fn random_initial_state(lattice: Lattice, cfg: &StepperConfig) -> LayerState {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (lo, hi) = cfg.init_band;
    let mut draw = |lat: Lattice| {
        SpectralField::from_fn(lat, |k1, k2| {
            let r = ((k1 * k1 + k2 * k2) as f64).sqrt();
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            if r >= lo && r <= hi {
                Complex64::new(re, im)
            } else {
                ZERO
            }
        })
    };
    let mut s = LayerState { q1: draw(lattice), q2: draw(lattice), t: 0.0 };
    if cfg.odd_symmetry {
        s = s.project_odd_y();
    }
    let rms = ((s.q1.l2_norm_sq() + s.q2.l2_norm_sq()) / (2.0 * lattice.l * lattice.l)).sqrt();
    if rms > 0.0 {
        let f = cfg.init_amplitude / rms;
        s.q1 = &s.q1 * f;
        s.q2 = &s.q2 * f;
    }
    s
}

/// Leading eigenvector of `M_k` with coefficient norm `amplitude` at `k` (and its
/// conjugate at `-k`).
pub fn eigenmode_initial_state(
    lattice: Lattice,
    p: &ModelParams,
    k: (i64, i64),
    amplitude: f64,
) -> Result<LayerState> {
    if !lattice.contains(k.0, k.1) {
        return Err(Error::InvalidLattice(format!("mode {k:?} is not retained")));
    }
    let (x, y) = linear_block(k, p)?.leading_eigenvector();
    let q1 = SpectralField::single_mode(lattice, k.0, k.1, x * amplitude);
    let q2 = SpectralField::single_mode(lattice, k.0, k.1, y * amplitude);
    LayerState::new(q1, q2, 0.0)
}

/// Initial state selected by `cfg`.
pub fn initial_state(lattice: Lattice, p: &ModelParams, cfg: &StepperConfig) -> Result<LayerState> {
    match cfg.init_mode {
        Some(k) => {
            let s = eigenmode_initial_state(lattice, p, k, cfg.init_amplitude)?;
            Ok(if cfg.odd_symmetry { s.project_odd_y() } else { s })
        }
        None => Ok(random_initial_state(lattice, cfg)),
    }
}

/// Consumer of run output.
pub trait RunSink {
    fn record(&mut self, rec: &DiagnosticsRecord) -> Result<()>;

    fn snapshot(&mut self, _state: &LayerState) -> Result<()> {
        Ok(())
    }
}

/// Sink that keeps every record in memory.
#[derive(Debug, Default, Clone)]
pub struct MemorySink {
    pub records: Vec<DiagnosticsRecord>,
    pub snapshots: Vec<LayerState>,
    pub keep_snapshots: bool,
}

impl RunSink for MemorySink {
    fn record(&mut self, rec: &DiagnosticsRecord) -> Result<()> {
        self.records.push(*rec);
        Ok(())
    }

    fn snapshot(&mut self, state: &LayerState) -> Result<()> {
        if self.keep_snapshots {
            self.snapshots.push(state.clone());
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub state: LayerState,
    pub steps: u64,
    pub records: usize,
    /// Largest `E` seen at diagnostics times.
    pub e_max: f64,
    pub w_max: f64,
    /// Largest even-in-y fraction seen before any re-projection.
    pub odd_residual_max: f64,
}

/// Integrate `q0` to `cfg.t_end`, emitting diagnostics and snapshots to `sink`.
///
/// The first record (at the initial time) carries `budget_residual = 0`; later
/// records use the pair of states bracketing the step that reached them.
pub fn run(
    q0: LayerState,
    p: &ModelParams,
    cfg: &StepperConfig,
    shift: Option<&SpectralField>,
    sink: &mut dyn RunSink,
) -> Result<RunSummary> {
    let lattice = *q0.lattice();
    let mut stepper = Stepper::new(lattice, p, cfg)?;
    run_with(&mut stepper, q0, p, cfg, shift, sink)
}

/// As [`run`] with a caller-supplied stepper.
pub fn run_with(
    stepper: &mut Stepper,
    q0: LayerState,
    p: &ModelParams,
    cfg: &StepperConfig,
    shift: Option<&SpectralField>,
    sink: &mut dyn RunSink,
) -> Result<RunSummary> {
    let mut state = if cfg.odd_symmetry { q0.project_odd_y() } else { q0 };
    let t0 = state.t;
    let t_end = t0 + cfg.t_end;
    let first = DiagnosticsRecord::from_state(&state, shift);
    stepper.set_blowup_reference(first.w);
    let mut summary = RunSummary {
        state: state.clone(),
        steps: 0,
        records: 0,
        e_max: first.e,
        w_max: first.w,
        odd_residual_max: first.odd_residual,
    };
    let mut rec = first;
    rec.dt = stepper.dt();
    sink.record(&rec)?;
    sink.snapshot(&state)?;
    summary.records += 1;
    let eps = 1e-9 * cfg.dt;
    let mut n_diag = 1u64;
    let mut n_snap = 1u64;
    while state.t < t_end - eps {
        let out = stepper.step_capped(&state, t_end)?;
        summary.steps += 1;
        summary.odd_residual_max = summary.odd_residual_max.max(out.odd_residual);
        let prev = std::mem::replace(&mut state, out.state);
        let next_diag = t0 + n_diag as f64 * cfg.diagnostics_interval;
        let at_end = state.t >= t_end - eps;
        if state.t >= next_diag - eps || at_end {
            let mut r = DiagnosticsRecord::from_state(&state, shift);
            r.cfl = out.cfl;
            r.dt = out.dt;
            if cfg.odd_symmetry {
                r.odd_residual = out.odd_residual;
            }
            r.budget_residual = budget_residual(&prev, &state, p);
            summary.e_max = summary.e_max.max(r.e);
            summary.w_max = summary.w_max.max(r.w);
            sink.record(&r)?;
            summary.records += 1;
            while t0 + n_diag as f64 * cfg.diagnostics_interval <= state.t + eps {
                n_diag += 1;
            }
        }
        let next_snap = t0 + n_snap as f64 * cfg.snapshot_interval;
        if state.t >= next_snap - eps || at_end {
            sink.snapshot(&state)?;
            while t0 + n_snap as f64 * cfg.snapshot_interval <= state.t + eps {
                n_snap += 1;
            }
        }
    }
    summary.state = state;
    Ok(summary)
}
