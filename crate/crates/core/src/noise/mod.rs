//! Monte-Carlo noise: depolarizing gate error, T1/T2 decay charged per schedule
//! layer, symmetric readout flips, and a small density-matrix oracle.

mod calibration;
mod channels;
mod engine;
mod oracle;

pub use calibration::CalibrationSnapshot;
pub use channels::{apply_gate_noise, apply_idle_decay, apply_readout_error};
pub use engine::{run_noisy, NoisyProgram};
pub use oracle::{density_oracle, oracle_distribution, MAX_DENSITY_QUBITS};

/// Total-variation distance between two distributions over the same outcomes.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    let n = p.len().max(q.len());
    0.5 * (0..n)
        .map(|i| (p.get(i).copied().unwrap_or(0.0) - q.get(i).copied().unwrap_or(0.0)).abs())
        .sum::<f64>()
}

/// Empirical distribution of a histogram over `2^n_bits` outcomes.
pub fn empirical(counts: &crate::sim::Counts) -> Vec<f64> {
    let total = counts.total().max(1) as f64;
    let mut out = vec![0.0; 1 << counts.n_bits()];
    for (k, c) in counts.iter() {
        out[k as usize] = c as f64 / total;
    }
    out
}
