//! Benchmark fixtures.

use twolayer_qg::{initial_state, Lattice, LayerState, ModelParams, StepperConfig};

/// Parameters with a single unstable wave (the criterion-style instability setup).
pub fn unstable_params() -> ModelParams {
    ModelParams {
        beta: 0.1,
        kappa_t: 1e-6,
        kappa_m: 1e-6,
        nu: 1e-5,
        m: 3.0,
        l: ModelParams::period_for_quartic(3.0 / 8.0),
    }
}

/// Odd-symmetric noise of unit-order amplitude on a `K = k` lattice.
pub fn noisy_state(p: &ModelParams, k: usize, seed: u64) -> (Lattice, LayerState) {
    let lat = Lattice::new(p.l, k).expect("valid lattice");
    let cfg = StepperConfig { seed, init_amplitude: 1.0, init_band: (1.0, k as f64), ..Default::default() };
    let s = initial_state(lat, p, &cfg).expect("initial state");
    (lat, s)
}
