//! Run configuration documents.
//!
//! Parsing is strict: unknown keys are rejected and every error names the
//! offending field path (`model.L`, `stepper.dt`, ...).

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::integrator::StepperConfig;
use crate::lattice::Lattice;
use crate::lieb_thirring::DEFAULT_DECAY;
use crate::params::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    #[serde(rename = "K")]
    pub k: usize,
    /// Collocation points per direction; `3K` when omitted.
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SnapshotFormat {
    /// Little-endian `f64` pairs plus a JSON sidecar.
    Raw,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub snapshot_format: SnapshotFormat,
    pub diagnostics_csv: String,
    /// Long-format `t, y, u1, u2` file written at every snapshot time.
    pub zonal_csv: Option<String>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: PathBuf::from("output"),
            snapshot_format: SnapshotFormat::Raw,
            diagnostics_csv: "diagnostics.csv".into(),
            zonal_csv: Some("zonal.csv".into()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    #[default]
    Run,
    Linstab,
    Bounds,
    LtCheck,
}

/// Absolute constants of the bound calculator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConstantsConfig {
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "C_lt")]
    pub c_lt: f64,
}

impl Default for ConstantsConfig {
    fn default() -> Self {
        ConstantsConfig { c: 1.0, c_lt: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LtCheckConfig {
    pub max_size: usize,
    pub trials: usize,
    pub decay: f64,
}

impl Default for LtCheckConfig {
    fn default() -> Self {
        LtCheckConfig { max_size: 16, trials: 20, decay: DEFAULT_DECAY }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelParams,
    #[serde(default)]
    pub stepper: StepperConfig,
    pub lattice: LatticeConfig,
    #[serde(default)]
    pub outputs: OutputConfig,
    #[serde(default)]
    pub mode: Mode,
    /// Recorded in the manifest; stepping is single-threaded.
    #[serde(default = "one")]
    pub threads: usize,
    #[serde(default)]
    pub constants: ConstantsConfig,
    #[serde(default)]
    pub lt_check: LtCheckConfig,
}

fn one() -> usize {
    1
}

fn at(prefix: &str, e: Error) -> Error {
    match e {
        Error::InvalidParameter { field, reason } => {
            Error::Config { path: format!("{prefix}.{field}"), message: reason }
        }
        other => other,
    }
}

/// Parse and validate a JSON document, filling `lattice.N` when absent.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let mut cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Error::Config { path, message: e.into_inner().to_string() }
    })?;
    if cfg.lattice.n.is_none() {
        cfg.lattice.n = Some(3 * cfg.lattice.k);
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Parse a bare [`ModelParams`] document with the same path reporting.
pub fn parse_params(text: &str) -> Result<ModelParams> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let p: ModelParams = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Error::Config { path, message: e.into_inner().to_string() }
    })?;
    p.validate().map_err(|e| at("model", e))?;
    Ok(p)
}

fn config_error(path: &str, message: impl Into<String>) -> Error {
    Error::Config { path: path.into(), message: message.into() }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.model.validate().map_err(|e| at("model", e))?;
        self.stepper.validate().map_err(|e| at("stepper", e))?;
        let k = self.lattice.k;
        if k < 1 {
            return Err(config_error("lattice.K", "must be >= 1"));
        }
        let n = self.lattice.n.unwrap_or(3 * k);
        if n < 3 * k {
            return Err(config_error("lattice.N", format!("must be >= 3K = {}, got {n}", 3 * k)));
        }
        if let Some((k1, k2)) = self.stepper.init_mode {
            if k1.unsigned_abs() as usize > k || k2.unsigned_abs() as usize > k || (k1, k2) == (0, 0) {
                return Err(config_error("stepper.init_mode", "must be a retained nonzero mode"));
            }
        }
        if self.threads < 1 {
            return Err(config_error("threads", "must be >= 1"));
        }
        for (path, v) in [("constants.C", self.constants.c), ("constants.C_lt", self.constants.c_lt)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(config_error(path, format!("must be positive and finite, got {v}")));
            }
        }
        if self.lt_check.max_size < 1 || self.lt_check.trials < 1 {
            return Err(config_error("lt_check", "max_size and trials must be >= 1"));
        }
        if self.outputs.diagnostics_csv.is_empty() {
            return Err(config_error("outputs.diagnostics_csv", "must be a file name"));
        }
        Ok(())
    }

    pub fn lattice(&self) -> Result<Lattice> {
        let n = self.lattice.n.unwrap_or(3 * self.lattice.k);
        Lattice::with_points(self.model.l, self.lattice.k, n)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// SHA-256 of the compact serialization.
    pub fn hash(&self) -> String {
        let text = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(text.as_bytes()))
    }

    /// Create the output directory and probe that it accepts writes.
    pub fn check_outputs(&self) -> Result<()> {
        let dir = &self.outputs.dir;
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let probe = dir.join(".write-probe");
        std::fs::write(&probe, b"").map_err(|e| Error::io(&probe, e))?;
        std::fs::remove_file(&probe).map_err(|e| Error::io(&probe, e))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrator::Scheme;

    const MINIMAL: &str = r#"{"model": {"beta": 0.1, "kappa_T": 0.01, "kappa_M": 0.01, "nu": 1e-4, "m": 3, "L": 6.847},
        "lattice": {"K": 32}}"#;

    #[test]
    fn minimal_config_is_filled() {
        let cfg = parse_config(MINIMAL).unwrap();
        assert_eq!(cfg.lattice.n, Some(96));
        assert_eq!(cfg.stepper.scheme, Scheme::Etdrk4);
        assert!(cfg.stepper.odd_symmetry);
        assert_eq!(cfg.mode, Mode::Run);
        assert_eq!(cfg.threads, 1);
        assert_eq!(cfg.lattice().unwrap().n, 96);
    }

    #[test]
    fn round_trip() {
        let mut cfg = parse_config(MINIMAL).unwrap();
        cfg.stepper.init_mode = Some((1, 2));
        cfg.stepper.scheme = Scheme::ImexCnab2;
        cfg.mode = Mode::LtCheck;
        cfg.outputs.zonal_csv = None;
        let back = parse_config(&cfg.to_json()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.hash(), cfg.hash());
    }

    #[test]
    fn errors_name_the_field() {
        let bad = MINIMAL.replace("6.847", "0.5");
        match parse_config(&bad) {
            Err(Error::Config { path, .. }) => assert_eq!(path, "model.L"),
            other => panic!("{other:?}"),
        }
        let typo = MINIMAL.replace("kappa_T", "kappa_t");
        match parse_config(&typo) {
            Err(Error::Config { path, message }) => {
                assert_eq!(path, "model.kappa_t");
                assert!(message.contains("unknown field"), "{message}");
            }
            other => panic!("{other:?}"),
        }
        let dt = MINIMAL.replace(r#""lattice""#, r#""stepper": {"dt": 0}, "lattice""#);
        match parse_config(&dt) {
            Err(Error::Config { path, .. }) => assert_eq!(path, "stepper.dt"),
            other => panic!("{other:?}"),
        }
        let m = MINIMAL.replace(r#""m": 3"#, r#""m": 0"#);
        assert!(matches!(parse_config(&m), Err(Error::Config { path, .. }) if path == "model.m"));
        let n = MINIMAL.replace(r#""K": 32"#, r#""K": 32, "N": 90"#);
        assert!(matches!(parse_config(&n), Err(Error::Config { path, .. }) if path == "lattice.N"));
        assert!(matches!(parse_config("{"), Err(Error::Config { .. })));
    }

    #[test]
    fn params_document() {
        let p = parse_params(r#"{"beta": 0.6, "kappa_T": 0, "kappa_M": 0, "nu": 0, "m": 3, "L": 2}"#).unwrap();
        assert!(p.is_inviscid());
        assert!(parse_params(r#"{"beta": 0.6}"#).is_err());
    }
}
