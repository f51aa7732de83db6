//! Mode dispatch for a validated [`RunConfig`].

use std::fmt::Write as _;
use std::time::Instant;

use crate::background::build_background;
use crate::bounds::{constants_ledger, ConstantsLedger};
use crate::config::{Mode, RunConfig};
use crate::error::{Error, Result};
use crate::integrator::{initial_state, run, RunSummary};
use crate::lieb_thirring::{lt_check, LtCheckReport};
use crate::linstab::{instability_scan, InstabilityScan};
use crate::output::{FileSink, Manifest, OutputDir};
use crate::params::ModelParams;

pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

pub const LINSTAB_HEADER: &str = "k1,k2,re_lambda_max,im_lambda_max,disc_re,alpha_k,gamma_k,argmax";

/// Scan table with the maximizing row flagged `1` in the `argmax` column.
pub fn linstab_csv(scan: &InstabilityScan) -> String {
    let mut s = String::from(LINSTAB_HEADER);
    s.push('\n');
    for e in &scan.entries {
        let flag = u8::from((e.k1, e.k2) == scan.k_star);
        let _ = writeln!(
            s,
            "{},{},{:e},{:e},{:e},{:e},{:e},{flag}",
            e.k1, e.k2, e.re_lambda_max, e.im_lambda_max, e.disc_re, e.alpha_k, e.gamma_k
        );
    }
    s
}

/// What a dispatched mode produced.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub manifest: Manifest,
    pub summary: Option<RunSummary>,
    pub scan: Option<InstabilityScan>,
    pub ledger: Option<ConstantsLedger>,
    pub lt: Option<LtCheckReport>,
}

fn mode_name(m: Mode) -> &'static str {
    match m {
        Mode::Run => "run",
        Mode::Linstab => "linstab",
        Mode::Bounds => "bounds",
        Mode::LtCheck => "lt-check",
    }
}

/// Ledger for `p`, or `None` when the bound preconditions fail.
pub fn optional_ledger(p: &ModelParams, c: f64, c_lt: f64) -> Option<ConstantsLedger> {
    constants_ledger(p, c, c_lt).ok()
}

/// Execute `cfg.mode`, writing every artifact and the manifest into
/// `cfg.outputs.dir`. On failure a manifest with the error status is still
/// written before the error is returned.
pub fn execute(cfg: &RunConfig) -> Result<Outcome> {
    cfg.validate()?;
    cfg.check_outputs()?;
    let started = Instant::now();
    let mut out = OutputDir::create(&cfg.outputs.dir)?;
    out.write("config.json", cfg.to_json().as_bytes())?;
    let mut outcome = Outcome { manifest: blank_manifest(cfg), summary: None, scan: None, ledger: None, lt: None };
    let result = dispatch(cfg, &mut out, &mut outcome);
    let mut manifest = blank_manifest(cfg);
    manifest.wall_time_s = started.elapsed().as_secs_f64();
    manifest.constants_ledger = outcome
        .ledger
        .clone()
        .or_else(|| optional_ledger(&cfg.model, cfg.constants.c, cfg.constants.c_lt));
    manifest.status = match &result {
        Ok(()) => "ok".into(),
        Err(e) => format!("error: {e}"),
    };
    let manifest = out.write_manifest(manifest)?;
    result?;
    outcome.manifest = manifest;
    Ok(outcome)
}

fn blank_manifest(cfg: &RunConfig) -> Manifest {
    Manifest {
        mode: mode_name(cfg.mode).into(),
        status: String::new(),
        config_hash: cfg.hash(),
        seed: cfg.stepper.seed,
        code_version: CODE_VERSION.into(),
        threads: cfg.threads,
        wall_time_s: 0.0,
        constants_ledger: None,
        files: Vec::new(),
    }
}

fn dispatch(cfg: &RunConfig, out: &mut OutputDir, outcome: &mut Outcome) -> Result<()> {
    let p = &cfg.model;
    match cfg.mode {
        Mode::Run => {
            let lattice = cfg.lattice()?;
            let q0 = initial_state(lattice, p, &cfg.stepper)?;
            let shift = match build_background(p.l, p.m, p.nu, cfg.constants.c) {
                Ok(bg) if bg.fits(&lattice) => Some(bg.psi_bar(lattice)?),
                _ => None,
            };
            let mut sink = FileSink::new(
                out,
                &cfg.outputs.diagnostics_csv,
                cfg.outputs.zonal_csv.as_deref(),
                cfg.outputs.snapshot_format,
            )?;
            let res = run(q0, p, &cfg.stepper, shift.as_ref(), &mut sink);
            sink.finish()?;
            outcome.summary = Some(res?);
        }
        Mode::Linstab => {
            let scan = instability_scan(p, cfg.lattice.k)?;
            out.write("linstab.csv", linstab_csv(&scan).as_bytes())?;
            outcome.scan = Some(scan);
        }
        Mode::Bounds => {
            let ledger = constants_ledger(p, cfg.constants.c, cfg.constants.c_lt)?;
            out.write("ledger.json", serde_json::to_string_pretty(&ledger)?.as_bytes())?;
            outcome.ledger = Some(ledger);
        }
        Mode::LtCheck => {
            let lt = &cfg.lt_check;
            let rep = lt_check(cfg.lattice()?, lt.max_size, lt.trials, lt.decay, cfg.stepper.seed)?;
            out.write("lt_check.json", serde_json::to_string_pretty(&rep)?.as_bytes())?;
            outcome.lt = Some(rep);
        }
    }
    Ok(())
}

/// `true` for errors caused by the integration diverging.
pub fn is_blowup(e: &Error) -> bool {
    matches!(e, Error::BlowUp { .. })
}
