use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use eqc_core::device::load_profile;
use eqc_core::ensemble::{TrainingHistory, UpdateRecord};

use crate::config::{ExperimentConfig, Override};

pub const OUTPUT_SCHEMA_VERSION: u32 = 1;

pub const METRICS_HEADER: [&str; 10] = [
    "step",
    "epoch",
    "param_index",
    "device",
    "gradient",
    "weight",
    "p_correct",
    "staleness",
    "virtual_time_s",
    "ideal_loss",
];

pub const SCATTER_HEADER: [&str; 6] = ["device", "staleness_s", "predicted_error", "p_correct", "observed_error", "shots"];

pub fn write_metrics(path: &Path, updates: &[UpdateRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("cannot write {}", path.display()))?;
    w.write_record(METRICS_HEADER)?;
    for u in updates {
        w.write_record([
            u.step.to_string(),
            u.epoch.to_string(),
            u.param_index.to_string(),
            u.device.clone(),
            u.gradient.to_string(),
            u.weight.to_string(),
            u.p_correct.to_string(),
            u.staleness.to_string(),
            u.virtual_time_s.to_string(),
            u.ideal_loss.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceSummary {
    pub tasks: u64,
    pub shots: u64,
    pub busy_s: f64,
    pub tasks_per_hour: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QaoaOutcome {
    /// Most frequent bitstring when sampling the final parameters, qubit 0 rightmost.
    pub best_bitstring: String,
    pub best_cut: f64,
    /// Largest cut among all sampled bitstrings.
    pub best_sampled_cut: f64,
    pub max_cut: f64,
    pub shots: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSummary {
    pub schema_version: u32,
    pub problem: String,
    /// Mean ideal loss over the last ten epochs.
    pub converged_loss: f64,
    pub final_loss: f64,
    pub initial_loss: f64,
    pub reference_energy: f64,
    pub ansatz_reference: f64,
    pub error_vs_reference: f64,
    pub error_vs_ansatz: f64,
    pub epochs_run: u64,
    pub epochs_to_2pct_of_ansatz: Option<u64>,
    pub max_staleness: u64,
    pub makespan_s: f64,
    pub tasks_per_hour: Option<f64>,
    pub devices: BTreeMap<String, DeviceSummary>,
    pub final_params: Vec<f64>,
    pub qaoa: Option<QaoaOutcome>,
    pub config: ExperimentConfig,
}

impl RunSummary {
    pub fn device_table(h: &TrainingHistory) -> BTreeMap<String, DeviceSummary> {
        h.devices
            .iter()
            .map(|(k, d)| {
                (k.clone(), DeviceSummary { tasks: d.tasks, shots: d.shots, busy_s: d.busy_s, tasks_per_hour: d.tasks_per_hour })
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScatterRow {
    pub device: String,
    pub staleness_s: f64,
    pub predicted_error: f64,
    pub p_correct: f64,
    pub observed_error: f64,
    pub shots: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidationSummary {
    pub schema_version: u32,
    pub circuit: String,
    pub devices: Vec<String>,
    pub points: usize,
    pub shots: u64,
    pub seed: u64,
    pub pearson: Option<f64>,
}

pub fn write_scatter(path: &Path, rows: &[ScatterRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("cannot write {}", path.display()))?;
    w.write_record(SCATTER_HEADER)?;
    for r in rows {
        w.write_record([
            r.device.clone(),
            r.staleness_s.to_string(),
            r.predicted_error.to_string(),
            r.p_correct.to_string(),
            r.observed_error.to_string(),
            r.shots.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").with_context(|| format!("cannot write {}", path.display()))
}

/// Parse and check a summary.json document.
pub fn read_summary(text: &str) -> Result<RunSummary> {
    let s: RunSummary = serde_json::from_str(text).context("summary does not match its schema")?;
    if s.schema_version != OUTPUT_SCHEMA_VERSION {
        bail!("unsupported summary schema_version {}", s.schema_version);
    }
    Ok(s)
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    Ok(format!("{:x}", Sha256::digest(&bytes)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FleetEntry {
    pub name: String,
    pub file: String,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputEntry {
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub artifact_version: String,
    pub command: String,
    pub seed: Option<u64>,
    pub config: serde_json::Value,
    pub fleet_dir: Option<PathBuf>,
    pub fleet: Vec<FleetEntry>,
    pub overrides: Vec<Override>,
    pub outputs: Vec<OutputEntry>,
}

/// Profile names and content hashes of every document in a fleet directory.
pub fn fleet_fingerprint(dir: &Path) -> Result<Vec<FleetEntry>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("cannot read fleet directory {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| {
            Ok(FleetEntry {
                name: load_profile(p)?.name,
                file: p.file_name().unwrap_or_default().to_string_lossy().into_owned(),
                sha256: sha256_file(p)?,
            })
        })
        .collect()
}

impl RunManifest {
    pub fn new(command: &str, seed: Option<u64>, config: Option<&ExperimentConfig>, fleet_dir: &Path, overrides: Vec<Override>) -> Result<Self> {
        Ok(RunManifest {
            schema_version: OUTPUT_SCHEMA_VERSION,
            artifact_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            seed,
            config: config.map(serde_json::to_value).transpose()?.unwrap_or(serde_json::Value::Null),
            fleet_dir: Some(fleet_dir.to_path_buf()),
            fleet: fleet_fingerprint(fleet_dir)?,
            overrides,
            outputs: Vec::new(),
        })
    }

    /// Hash the given outputs and write `manifest.json` into `out`; call after every other file is written.
    pub fn finish(mut self, out: &Path, files: &[&str]) -> Result<PathBuf> {
        for f in files {
            let p = out.join(f);
            if !p.is_file() {
                bail!("expected output {} is missing", p.display());
            }
            self.outputs.push(OutputEntry { path: PathBuf::from(f), sha256: sha256_file(&p)? });
        }
        let path = out.join("manifest.json");
        write_json(&path, &self)?;
        Ok(path)
    }
}
