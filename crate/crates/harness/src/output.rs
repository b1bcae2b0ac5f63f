use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use kac_kawasaki::dynamics::replica_rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{ExperimentConfig, ExperimentKind};

/// Generator of replica `k` at scaling parameter `n`: stream `(n << 32) | k`
/// of the ChaCha8 generator seeded with the master seed.
pub fn replica_stream(master: u64, n: usize, k: usize) -> ChaCha8Rng {
    replica_rng(master, stream_id(n, k))
}

pub fn stream_id(n: usize, k: usize) -> u64 {
    ((n as u64) << 32) | k as u64
}

/// CSV table; column names carry units in brackets where relevant.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: impl Into<String>, header: &[&str]) -> Self {
        Table {
            name: name.into(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.into_inner().context("flushing CSV")
    }
}

/// Formats a float so that identical inputs give identical bytes.
pub fn num(x: f64) -> String {
    format!("{x:e}")
}

/// Pass/fail line of a configured assertion.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

/// Everything an experiment produces.
#[derive(Clone, Debug, Default)]
pub struct ExperimentOutput {
    pub tables: Vec<Table>,
    /// Free-form text files (rate reports).
    pub documents: Vec<(String, String)>,
    pub checks: Vec<Check>,
    /// `(n, replica, stream)` for every replica run.
    pub seeds: Vec<(usize, usize, u64)>,
}

impl ExperimentOutput {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct OutputEntry {
    pub file: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReplicaSeed {
    pub n: usize,
    pub replica: usize,
    pub stream: u64,
}

/// Provenance of one run.
#[derive(Clone, Debug, Serialize)]
pub struct RunRecord {
    pub experiment: String,
    pub config_sha256: String,
    pub code_version: String,
    pub master_seed: u64,
    pub wall_clock_seconds: f64,
    pub passed: bool,
    pub seeds: Vec<ReplicaSeed>,
    pub outputs: Vec<OutputEntry>,
}

fn sha(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes all outputs under `dir`, then `run_record.toml` and finally the
/// `manifest` listing every file with its checksum.
pub fn persist(
    kind: ExperimentKind,
    cfg: &ExperimentConfig,
    out: &ExperimentOutput,
    wall_clock: f64,
    dir: &Path,
) -> Result<RunRecord> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut entries = Vec::new();
    let mut write = |name: String, bytes: Vec<u8>| -> Result<()> {
        let path: PathBuf = dir.join(&name);
        fs::write(&path, &bytes).with_context(|| format!("writing {}", path.display()))?;
        entries.push(OutputEntry {
            file: name,
            sha256: sha(&bytes),
            bytes: bytes.len(),
        });
        Ok(())
    };
    write("config.toml".into(), cfg.to_toml().into_bytes())?;
    for t in &out.tables {
        write(format!("{}.csv", t.name), t.to_csv()?)?;
    }
    for (name, text) in &out.documents {
        write(name.clone(), text.clone().into_bytes())?;
    }
    let checks: String = out
        .checks
        .iter()
        .map(|c| format!("{} {}: {}\n", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail))
        .collect();
    write("checks.txt".into(), checks.into_bytes())?;
    let record = RunRecord {
        experiment: kind.name().into(),
        config_sha256: cfg.digest(),
        code_version: env!("CARGO_PKG_VERSION").into(),
        master_seed: cfg.seed,
        wall_clock_seconds: wall_clock,
        passed: out.passed(),
        seeds: out
            .seeds
            .iter()
            .map(|&(n, replica, stream)| ReplicaSeed { n, replica, stream })
            .collect(),
        outputs: entries,
    };
    let text = toml::to_string(&record).context("serialising run record")?;
    fs::write(dir.join("run_record.toml"), &text)?;
    let mut manifest = String::from("# file sha256 bytes\n");
    manifest.push_str(&format!("run_record.toml {} {}\n", sha(text.as_bytes()), text.len()));
    for e in &record.outputs {
        manifest.push_str(&format!("{} {} {}\n", e.file, e.sha256, e.bytes));
    }
    fs::write(dir.join("manifest"), manifest)?;
    Ok(record)
}
