//! Experiment runner: config loading, training runs, model validation and
//! the CSV/JSON artifacts they emit.

pub mod config;
pub mod experiments;
pub mod output;

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use eqc_core::device::{fleet_from_dir, load_profile};

use config::{ExperimentConfig, Flags, ProblemKind};
use output::{RunManifest, ValidationSummary, OUTPUT_SCHEMA_VERSION};

pub const METRICS_FILE: &str = "metrics.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const SCATTER_FILE: &str = "scatter.csv";

fn prepare_out(out: &Path) -> Result<()> {
    fs::create_dir_all(out).with_context(|| format!("cannot create output directory {}", out.display()))
}

/// Run a VQE or QAOA training experiment and write its artifacts to `out`.
pub fn cmd_run(expected: ProblemKind, config: &Path, flags: &Flags, out: &Path) -> Result<output::RunSummary> {
    let mut cfg = ExperimentConfig::load(config)?;
    if cfg.problem.kind != expected {
        bail!(
            "config {} describes a {:?} problem, expected {:?}",
            config.display(),
            cfg.problem.kind,
            expected
        );
    }
    let overrides = flags.apply(&mut cfg)?;
    let fleet_dir: PathBuf = cfg.fleet_dir.clone().context("no fleet directory: set fleet_dir or pass --fleet")?;
    let fleet = fleet_from_dir(&fleet_dir)?;
    prepare_out(out)?;

    let (history, summary) = experiments::run_vqa(&cfg, &fleet)?;
    output::write_metrics(&out.join(METRICS_FILE), &history.updates)?;
    output::write_json(&out.join(SUMMARY_FILE), &summary)?;
    let command = match expected {
        ProblemKind::Vqe => "run-vqe",
        ProblemKind::Qaoa => "run-qaoa",
        ProblemKind::Ghz => "run-ghz",
    };
    RunManifest::new(command, Some(cfg.training.seed), Some(&cfg), &fleet_dir, overrides)?
        .finish(out, &[METRICS_FILE, SUMMARY_FILE])?;
    Ok(summary)
}

pub fn cmd_validate_model(fleet_dir: &Path, out: &Path, shots: u64, seed: u64) -> Result<ValidationSummary> {
    let fleet = fleet_from_dir(fleet_dir)?;
    prepare_out(out)?;
    let rows = experiments::validate_model(&fleet, shots, seed)?;
    let predicted: Vec<f64> = rows.iter().map(|r| r.predicted_error).collect();
    let observed: Vec<f64> = rows.iter().map(|r| r.observed_error).collect();
    let summary = ValidationSummary {
        schema_version: OUTPUT_SCHEMA_VERSION,
        circuit: "ghz5".into(),
        devices: fleet.iter().map(|d| d.name.clone()).collect(),
        points: rows.len(),
        shots,
        seed,
        pearson: experiments::pearson(&predicted, &observed),
    };
    output::write_scatter(&out.join(SCATTER_FILE), &rows)?;
    output::write_json(&out.join(SUMMARY_FILE), &summary)?;
    RunManifest::new("validate-model", Some(seed), None, fleet_dir, Vec::new())?
        .finish(out, &[SCATTER_FILE, SUMMARY_FILE])?;
    Ok(summary)
}

pub fn cmd_transpile(circuit: &str, profile: &Path) -> Result<String> {
    let device = load_profile(profile).with_context(|| format!("cannot load profile {}", profile.display()))?;
    Ok(experiments::transpile_report(circuit, &device)?.1)
}
