//! On-disk layout of the Clifford+T target set: one circuit file per entry
//! plus a tab-separated manifest.

use std::path::Path;

use qas_core::circuit::serialize;
use qas_core::problems::{build_dataset, Difficulty};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{write, CliError, Result};

pub const MANIFEST: &str = "manifest.tsv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRow {
    pub n: usize,
    pub g: usize,
    pub label: Difficulty,
    pub m2: f64,
    /// Position of the circuit in its sampling batch.
    pub index: usize,
    /// Circuit file, relative to the manifest's directory.
    pub file: String,
}

impl ManifestRow {
    pub fn stem(&self) -> String {
        format!("n{}_g{}_{}", self.n, self.g, self.label)
    }
}

/// Samples the default dataset from `seed` and writes it under `dir`.
pub fn write_dataset(seed: u64, dir: &Path) -> Result<Vec<ManifestRow>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let entries = build_dataset(&mut rng)?;
    let mut rows = Vec::with_capacity(entries.len());
    for e in &entries {
        if e.m2.is_nan() || e.m2 < -1e-9 {
            return Err(qas_core::Error::Internal(format!("negative M2 {} for {}", e.m2, e.stem())).into());
        }
        let file = format!("circuits/{}.qc", e.stem());
        write(&dir.join(&file), serialize(&e.circuit))?;
        rows.push(ManifestRow { n: e.n, g: e.g, label: e.label, m2: e.m2.max(0.0), index: e.index, file });
    }
    let mut w = csv::WriterBuilder::new().delimiter(b'\t').from_writer(Vec::new());
    for r in &rows {
        w.serialize(r).map_err(|e| CliError::format(&dir.join(MANIFEST), e))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::format(&dir.join(MANIFEST), e))?;
    write(&dir.join(MANIFEST), bytes)?;
    Ok(rows)
}

pub fn read_manifest(dir: &Path) -> Result<Vec<ManifestRow>> {
    let path = dir.join(MANIFEST);
    let file = std::fs::File::open(&path).map_err(|e| CliError::io(&path, e))?;
    let mut rows = Vec::new();
    for row in csv::ReaderBuilder::new().delimiter(b'\t').from_reader(file).deserialize() {
        let row: ManifestRow = row.map_err(|e| CliError::format(&path, e))?;
        if row.m2.is_nan() || row.m2 < 0.0 {
            return Err(CliError::format(&path, format!("{}: M2 {} is negative", row.stem(), row.m2)));
        }
        rows.push(row);
    }
    Ok(rows)
}
