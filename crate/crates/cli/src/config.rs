use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use eqc_core::ensemble::{Mode, TrainingConfig};
use eqc_core::fidelity::WeightingConfig;

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    Vqe,
    Qaoa,
    Ghz,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    pub kind: ProblemKind,
    #[serde(default = "square_edges")]
    pub edges: Vec<[usize; 2]>,
    #[serde(rename = "J", default = "one")]
    pub j: f64,
    #[serde(rename = "B", default = "one")]
    pub b: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainingSection {
    pub lr: f64,
    pub epochs: u64,
    pub shots: u64,
    pub seed: u64,
    pub mode: Mode,
    /// Half-width of the uniform initial-parameter draw.
    pub init_scale: f64,
}

impl Default for TrainingSection {
    fn default() -> Self {
        let d = TrainingConfig::default();
        TrainingSection {
            lr: d.learning_rate,
            epochs: d.epochs,
            shots: d.shots,
            seed: d.seed,
            mode: d.mode,
            init_scale: d.init_scale,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WeightingSection {
    pub enabled: bool,
    pub lo: f64,
    pub hi: f64,
}

impl Default for WeightingSection {
    fn default() -> Self {
        let d = WeightingConfig::default();
        WeightingSection { enabled: d.enabled, lo: d.lo, hi: d.hi }
    }
}

/// Experiment config document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "schema")]
    pub schema_version: u32,
    pub problem: ProblemSection,
    #[serde(default)]
    pub training: TrainingSection,
    #[serde(default)]
    pub weighting: WeightingSection,
    #[serde(default)]
    pub fleet_dir: Option<PathBuf>,
}

fn schema() -> u32 {
    CONFIG_SCHEMA_VERSION
}

fn one() -> f64 {
    1.0
}

fn square_edges() -> Vec<[usize; 2]> {
    vec![[0, 1], [1, 2], [2, 3], [0, 3]]
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<ExperimentConfig> {
        let cfg: ExperimentConfig = toml::from_str(text).context("invalid config")?;
        if cfg.schema_version != CONFIG_SCHEMA_VERSION {
            bail!("unsupported config schema_version {}", cfg.schema_version);
        }
        Ok(cfg)
    }

    /// Load a config; a relative `fleet_dir` is resolved against the config's directory.
    pub fn load(path: &Path) -> Result<ExperimentConfig> {
        let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        let mut cfg = Self::parse(&text).with_context(|| path.display().to_string())?;
        if let Some(dir) = &cfg.fleet_dir {
            if dir.is_relative() {
                let base = path.parent().unwrap_or(Path::new("."));
                cfg.fleet_dir = Some(base.join(dir));
            }
        }
        Ok(cfg)
    }

    pub fn n_nodes(&self) -> usize {
        self.problem.edges.iter().flat_map(|e| e.iter().copied()).max().map_or(0, |m| m + 1)
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.problem.edges.iter().map(|e| (e[0], e[1])).collect()
    }

    pub fn weighting_config(&self) -> WeightingConfig {
        if self.weighting.enabled {
            WeightingConfig { lo: self.weighting.lo, hi: self.weighting.hi, enabled: true }
        } else {
            WeightingConfig::disabled()
        }
    }

    pub fn training_config(&self) -> Result<TrainingConfig> {
        let t = &self.training;
        let cfg = TrainingConfig {
            learning_rate: t.lr,
            epochs: t.epochs,
            shots: t.shots,
            weighting: self.weighting_config(),
            seed: t.seed,
            mode: t.mode,
            init_scale: t.init_scale,
            ..TrainingConfig::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// A command-line flag that replaced a config value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Override {
    pub field: String,
    pub value: String,
    pub source: String,
}

/// `--weights lo,hi` or `--weights none`.
pub fn parse_weights(s: &str) -> Result<Option<(f64, f64)>> {
    if s.eq_ignore_ascii_case("none") {
        return Ok(None);
    }
    let (lo, hi) = s.split_once(',').with_context(|| format!("--weights expects lo,hi or none, got {s:?}"))?;
    let lo: f64 = lo.trim().parse().with_context(|| format!("bad lower weight {lo:?}"))?;
    let hi: f64 = hi.trim().parse().with_context(|| format!("bad upper weight {hi:?}"))?;
    WeightingConfig::new(lo, hi)?;
    Ok(Some((lo, hi)))
}

#[derive(Clone, Debug, Default)]
pub struct Flags {
    pub fleet: Option<PathBuf>,
    pub seed: Option<u64>,
    pub weights: Option<String>,
    pub mode: Option<String>,
}

impl Flags {
    /// Apply flag overrides in place and return their provenance.
    pub fn apply(&self, cfg: &mut ExperimentConfig) -> Result<Vec<Override>> {
        let mut out = Vec::new();
        let mut note = |field: &str, value: String| {
            out.push(Override { field: field.into(), value, source: "flag".into() });
        };
        if let Some(dir) = &self.fleet {
            cfg.fleet_dir = Some(dir.clone());
            note("fleet_dir", dir.display().to_string());
        }
        if let Some(seed) = self.seed {
            cfg.training.seed = seed;
            note("training.seed", seed.to_string());
        }
        if let Some(w) = &self.weights {
            match parse_weights(w)? {
                Some((lo, hi)) => {
                    cfg.weighting = WeightingSection { enabled: true, lo, hi };
                }
                None => cfg.weighting.enabled = false,
            }
            note("weighting", w.clone());
        }
        if let Some(m) = &self.mode {
            cfg.training.mode = m.parse()?;
            note("training.mode", m.clone());
        }
        Ok(out)
    }
}
