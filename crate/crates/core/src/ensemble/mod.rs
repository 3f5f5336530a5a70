//! Asynchronous fidelity-weighted training over a fleet: a master that hands out
//! parameter-shift tasks cyclically and applies weighted updates, clients that run
//! them on their devices, and the schedulers driving both.

mod client;
mod history;
mod master;
mod scheduler;
mod stats;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fidelity::WeightingConfig;

pub use client::Client;
pub use history::{DeviceStats, EpochRecord, TrainingHistory, UpdateRecord};
pub use master::MasterState;
pub use scheduler::{run_training, synchronous_sgd};
pub use stats::{failure_cdf, staleness_audit, StalenessAudit};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Single-threaded event loop over virtual time; bit-reproducible per seed.
    #[default]
    Deterministic,
    /// One worker thread per device; reports are applied in arrival order.
    Concurrent,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Mode> {
        match s {
            "deterministic" => Ok(Mode::Deterministic),
            "concurrent" => Ok(Mode::Concurrent),
            _ => Err(Error::InvalidArgument(format!("unknown mode {s:?}"))),
        }
    }
}

/// Starting parameters: explicit values, or uniform in `[-init_scale, init_scale)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingConfig {
    pub learning_rate: f64,
    pub epochs: u64,
    pub shots: u64,
    pub weighting: WeightingConfig,
    pub seed: u64,
    pub mode: Mode,
    pub staleness_cap: Option<u64>,
    pub gradient_clip: Option<f64>,
    pub init_scale: f64,
    pub initial_params: Option<Vec<f64>>,
    /// Stop issuing work after the first epoch whose ideal loss is at or below this.
    pub stop_at_loss: Option<f64>,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            learning_rate: 0.1,
            epochs: 120,
            shots: 8192,
            weighting: WeightingConfig::default(),
            seed: 0,
            mode: Mode::Deterministic,
            staleness_cap: None,
            gradient_clip: None,
            init_scale: 0.1,
            initial_params: None,
            stop_at_loss: None,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::InvalidArgument("learning rate must be positive".into()));
        }
        if self.shots == 0 {
            return Err(Error::ZeroShots);
        }
        if self.epochs == 0 {
            return Err(Error::InvalidArgument("epochs must be at least 1".into()));
        }
        if let Some(c) = self.gradient_clip {
            if !(c > 0.0) {
                return Err(Error::InvalidArgument("gradient clip must be positive".into()));
            }
        }
        if !(self.init_scale >= 0.0) {
            return Err(Error::InvalidArgument("init_scale must be >= 0".into()));
        }
        if self.weighting.enabled {
            self.weighting.validate()?;
        }
        Ok(())
    }
}

/// One unit of client work: the gradient of one parameter (for VQE, restricted to
/// one Hamiltonian term) at the parameters current when it was issued.
#[derive(Clone, Debug, PartialEq)]
pub struct TaskAssignment {
    pub task_id: u64,
    /// Parameter step this task contributes to.
    pub step_id: u64,
    pub param_index: usize,
    pub term_index: Option<usize>,
    pub params_snapshot: Arc<Vec<f64>>,
    /// Updates applied when the task was issued (τ).
    pub issue_step: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GradientReport {
    pub task_id: u64,
    pub step_id: u64,
    pub param_index: usize,
    pub term_index: Option<usize>,
    pub value: f64,
    pub p_correct: f64,
    pub device: String,
    pub issue_step: u64,
    /// Update number at which the report was applied (t); set by the master.
    pub apply_step: Option<u64>,
    pub submit_time: f64,
    pub complete_time: f64,
}

#[cfg(test)]
mod tests;
