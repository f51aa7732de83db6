//! Pseudo-spectral simulation and analysis of the forced two-layer beta-plane
//! quasi-geostrophic model on a doubly periodic square.

pub mod background;
pub mod bounds;
pub mod config;
pub mod diagnostics;
pub mod driver;
pub mod error;
pub mod fft;
pub mod field;
pub mod integrator;
pub mod inversion;
pub mod jacobian;
pub mod lattice;
pub mod lieb_thirring;
pub mod linstab;
pub mod mat2;
pub mod output;
pub mod params;
pub mod state;

pub use background::{build_background, choose_m, BackgroundShift};
pub use bounds::{constants_ledger, dimension_bound, zeta_bound, ConstantsLedger, DimensionBound};
pub use config::{parse_config, parse_params, Mode, RunConfig};
pub use diagnostics::{
    budget_residual, energy_e, energy_w, time_average_h1, zonal_mean_profiles, DiagnosticsRecord,
    ZonalProfiles,
};
pub use driver::{execute, linstab_csv, Outcome};
pub use error::{Error, Result};
pub use field::SpectralField;
pub use integrator::{
    initial_state, run, tendency, MemorySink, PrecomputedLinear, RunSink, RunSummary, Scheme,
    Stepper, StepperConfig,
};
pub use inversion::{invert_pv, inversion_coefficients, pv_from_streamfunction};
pub use jacobian::{jacobian, DealiasedJacobian};
pub use lattice::{wavenumber_lattice, Lattice};
pub use lieb_thirring::{lieb_thirring_ratio, lt_check, random_family, LtCheckReport};
pub use linstab::{
    discriminant_closed_form, growth_rate, instability_scan, linear_block, InstabilityScan,
    LinearBlock,
};
pub use mat2::{phi_functions, Mat2, PhiFunctions};
pub use output::{read_snapshot, Manifest, OutputDir, SnapshotMeta};
pub use params::ModelParams;
pub use state::LayerState;
