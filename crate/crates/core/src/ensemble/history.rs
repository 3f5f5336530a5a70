use std::collections::BTreeMap;

use serde::Serialize;

/// One applied parameter update.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UpdateRecord {
    /// Update number t, starting at 0.
    pub step: u64,
    /// Completed epochs when the update was applied.
    pub epoch: u64,
    pub param_index: usize,
    /// Contributing devices joined with '+'.
    pub device: String,
    pub gradient: f64,
    pub weight: f64,
    pub p_correct: f64,
    pub staleness: u64,
    pub virtual_time_s: f64,
    /// Noiseless energy of the parameters after the update.
    pub ideal_loss: f64,
}

/// State after every full pass over the parameters.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EpochRecord {
    pub epoch: u64,
    pub ideal_loss: f64,
    pub params_checksum: u64,
    pub weights: BTreeMap<String, f64>,
    pub virtual_time_s: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct DeviceStats {
    pub tasks: u64,
    pub shots: u64,
    /// Virtual time spent from submission to completion.
    pub busy_s: f64,
    /// Completed tasks per virtual hour over the whole run; absent for zero-latency runs.
    pub tasks_per_hour: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrainingHistory {
    pub initial_params: Vec<f64>,
    pub final_params: Vec<f64>,
    pub initial_loss: f64,
    pub updates: Vec<UpdateRecord>,
    pub epochs: Vec<EpochRecord>,
    pub devices: BTreeMap<String, DeviceStats>,
    pub makespan_s: f64,
    pub reports_accepted: u64,
}

impl TrainingHistory {
    pub fn final_loss(&self) -> f64 {
        self.epochs.last().map_or(self.initial_loss, |e| e.ideal_loss)
    }

    /// Mean ideal loss over the last `k` epochs.
    pub fn tail_loss(&self, k: usize) -> f64 {
        let n = self.epochs.len();
        if n == 0 {
            return self.initial_loss;
        }
        let tail = &self.epochs[n.saturating_sub(k)..];
        tail.iter().map(|e| e.ideal_loss).sum::<f64>() / tail.len() as f64
    }

    /// First epoch whose ideal loss is within `rel` of `reference`.
    pub fn epochs_to_within(&self, reference: f64, rel: f64) -> Option<u64> {
        self.epochs
            .iter()
            .find(|e| (e.ideal_loss - reference).abs() <= rel * reference.abs())
            .map(|e| e.epoch)
    }

    pub fn max_staleness(&self) -> u64 {
        self.updates.iter().map(|u| u.staleness).max().unwrap_or(0)
    }

    /// Completed tasks per virtual hour across the fleet.
    pub fn tasks_per_hour(&self) -> Option<f64> {
        let tasks: u64 = self.devices.values().map(|d| d.tasks).sum();
        (self.makespan_s > 0.0).then(|| tasks as f64 * 3600.0 / self.makespan_s)
    }
}

pub(crate) fn checksum(params: &[f64]) -> u64 {
    params.iter().fold(0xCBF2_9CE4_8422_2325u64, |h, v| {
        v.to_bits().to_le_bytes().iter().fold(h, |h, &b| (h ^ b as u64).wrapping_mul(0x0100_0000_01B3))
    })
}
