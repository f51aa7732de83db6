//! On-disk artifacts: snapshots, CSV streams and the directory manifest.
//!
//! A snapshot of field `name` is `name.bin` (little-endian `f64` pairs
//! `(re, im)` in row-major k-order) plus the sidecar `name.json`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bounds::ConstantsLedger;
use crate::config::SnapshotFormat;
use crate::diagnostics::{zonal_mean_profiles, DiagnosticsRecord, CSV_HEADER};
use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::integrator::RunSink;
use crate::lattice::Lattice;
use crate::state::LayerState;

pub const LAYOUT: &str = "rowmajor-k";
pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnapshotMeta {
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub t: f64,
    pub field_name: String,
    pub layout: String,
    pub parseval_factor: f64,
}

pub fn encode_coeffs(coeffs: &[Complex64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 * coeffs.len());
    for c in coeffs {
        out.extend_from_slice(&c.re.to_le_bytes());
        out.extend_from_slice(&c.im.to_le_bytes());
    }
    out
}

pub fn decode_coeffs(bytes: &[u8]) -> Result<Vec<Complex64>> {
    if bytes.len() % 16 != 0 {
        return Err(Error::param("snapshot", format!("length {} is not a multiple of 16", bytes.len())));
    }
    Ok(bytes
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
            Complex64::new(re, im)
        })
        .collect())
}

/// Read `name.bin` and `name.json` back into a field and its sidecar.
pub fn read_snapshot(dir: &Path, name: &str) -> Result<(SpectralField, SnapshotMeta)> {
    let json = dir.join(format!("{name}.json"));
    let bin = dir.join(format!("{name}.bin"));
    let text = std::fs::read_to_string(&json).map_err(|e| Error::io(&json, e))?;
    let meta: SnapshotMeta = serde_json::from_str(&text)?;
    if meta.layout != LAYOUT {
        return Err(Error::param("layout", format!("unsupported layout {}", meta.layout)));
    }
    let lattice = Lattice::with_points(meta.l, meta.k, meta.n)?;
    let bytes = std::fs::read(&bin).map_err(|e| Error::io(&bin, e))?;
    let coeffs = decode_coeffs(&bytes)?;
    Ok((SpectralField::from_coeffs(lattice, coeffs)?, meta))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub name: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub mode: String,
    pub status: String,
    pub config_hash: String,
    pub seed: u64,
    pub code_version: String,
    pub threads: usize,
    pub wall_time_s: f64,
    pub constants_ledger: Option<ConstantsLedger>,
    pub files: Vec<ManifestEntry>,
}

pub fn sha256_file(path: &Path) -> Result<(String, u64)> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok((hex::encode(Sha256::digest(&bytes)), bytes.len() as u64))
}

/// Output directory that remembers every file written into it.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    files: Vec<String>,
}

impl OutputDir {
    pub fn create(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        std::fs::create_dir_all(&root).map_err(|e| Error::io(&root, e))?;
        Ok(OutputDir { root, files: Vec::new() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    fn register(&mut self, name: &str) {
        if !self.files.iter().any(|f| f == name) {
            self.files.push(name.to_string());
        }
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.path(name);
        std::fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        self.register(name);
        Ok(())
    }

    /// Buffered writer for a streamed file.
    pub fn create_stream(&mut self, name: &str) -> Result<BufWriter<File>> {
        let path = self.path(name);
        let f = File::create(&path).map_err(|e| Error::io(&path, e))?;
        self.register(name);
        Ok(BufWriter::new(f))
    }

    pub fn write_snapshot(&mut self, name: &str, field: &SpectralField, t: f64) -> Result<()> {
        let lat = field.lattice();
        let meta = SnapshotMeta {
            l: lat.l,
            k: lat.k,
            n: lat.n,
            t,
            field_name: name.to_string(),
            layout: LAYOUT.to_string(),
            parseval_factor: field.parseval_factor(),
        };
        self.write(&format!("{name}.bin"), &encode_coeffs(field.coeffs()))?;
        self.write(&format!("{name}.json"), serde_json::to_string_pretty(&meta)?.as_bytes())
    }

    /// Hash every registered file and write the manifest.
    pub fn write_manifest(&mut self, mut manifest: Manifest) -> Result<Manifest> {
        manifest.files = self
            .files
            .iter()
            .map(|name| {
                let (sha256, bytes) = sha256_file(&self.path(name))?;
                Ok(ManifestEntry { name: name.clone(), sha256, bytes })
            })
            .collect::<Result<_>>()?;
        let path = self.path(MANIFEST_NAME);
        let text = serde_json::to_string_pretty(&manifest)?;
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        Ok(manifest)
    }
}

/// [`RunSink`] streaming diagnostics, zonal profiles and snapshots to disk.
pub struct FileSink<'a> {
    out: &'a mut OutputDir,
    diagnostics: BufWriter<File>,
    diagnostics_name: String,
    zonal: Option<(BufWriter<File>, String)>,
    format: SnapshotFormat,
    snapshots: usize,
}

impl<'a> FileSink<'a> {
    pub fn new(
        out: &'a mut OutputDir,
        diagnostics_csv: &str,
        zonal_csv: Option<&str>,
        format: SnapshotFormat,
    ) -> Result<Self> {
        let mut diagnostics = out.create_stream(diagnostics_csv)?;
        writeln!(diagnostics, "{CSV_HEADER}").map_err(|e| Error::io(out.path(diagnostics_csv), e))?;
        let zonal = match zonal_csv {
            Some(name) => {
                let mut w = out.create_stream(name)?;
                writeln!(w, "t,y,u1,u2").map_err(|e| Error::io(out.path(name), e))?;
                Some((w, name.to_string()))
            }
            None => None,
        };
        Ok(FileSink {
            out,
            diagnostics,
            diagnostics_name: diagnostics_csv.to_string(),
            zonal,
            format,
            snapshots: 0,
        })
    }

    pub fn snapshot_count(&self) -> usize {
        self.snapshots
    }

    pub fn finish(mut self) -> Result<()> {
        self.diagnostics.flush().map_err(|e| Error::io(self.out.path(&self.diagnostics_name), e))?;
        if let Some((w, name)) = self.zonal.as_mut() {
            w.flush().map_err(|e| Error::io(self.out.path(name), e))?;
        }
        Ok(())
    }
}

impl RunSink for FileSink<'_> {
    fn record(&mut self, rec: &DiagnosticsRecord) -> Result<()> {
        writeln!(self.diagnostics, "{}", rec.csv_row())
            .map_err(|e| Error::io(self.out.path(&self.diagnostics_name), e))
    }

    fn snapshot(&mut self, state: &LayerState) -> Result<()> {
        if let Some((w, name)) = self.zonal.as_mut() {
            let z = zonal_mean_profiles(state);
            for ((y, u1), u2) in z.y.iter().zip(&z.u1).zip(&z.u2) {
                writeln!(w, "{:e},{y:e},{u1:e},{u2:e}", state.t).map_err(|e| Error::io(self.out.path(name), e))?;
            }
        }
        if self.format == SnapshotFormat::Raw {
            let idx = self.snapshots;
            self.out.write_snapshot(&format!("snap_{idx:05}_q1"), &state.q1, state.t)?;
            self.out.write_snapshot(&format!("snap_{idx:05}_q2"), &state.q2, state.t)?;
        }
        self.snapshots += 1;
        Ok(())
    }
}
