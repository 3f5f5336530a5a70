use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::sim::GateKind;

/// Error rates and timings of one device at one moment.
///
/// Times: T1/T2 in microseconds, gate durations in nanoseconds, `calibrated_at` in
/// virtual seconds.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CalibrationSnapshot {
    pub gamma: BTreeMap<GateKind, f64>,
    /// CNOT error keyed by `(min, max)` physical pair.
    pub beta: BTreeMap<(usize, usize), f64>,
    pub omega: Vec<f64>,
    pub t1_us: Vec<f64>,
    pub t2_us: Vec<f64>,
    pub gate_time_1q_ns: f64,
    pub gate_time_2q_ns: f64,
    pub calibrated_at: f64,
}

fn check_prob(name: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return Err(Error::InvalidCalibration(format!("{name} = {p} outside [0,1]")));
    }
    Ok(())
}

impl CalibrationSnapshot {
    /// Same rates on every qubit and every pair of an `n`-qubit register.
    pub fn uniform(n: usize, gamma: f64, beta: f64, omega: f64, t1_us: f64, t2_us: f64) -> Self {
        let gamma = [GateKind::X, GateKind::SX, GateKind::Id, GateKind::RZ, GateKind::H, GateKind::RX, GateKind::RY]
            .into_iter()
            .map(|k| (k, gamma))
            .collect();
        let beta = (0..n).flat_map(|a| (a + 1..n).map(move |b| ((a, b), beta))).collect();
        CalibrationSnapshot {
            gamma,
            beta,
            omega: vec![omega; n],
            t1_us: vec![t1_us; n],
            t2_us: vec![t2_us; n],
            gate_time_1q_ns: 35.0,
            gate_time_2q_ns: 300.0,
            calibrated_at: 0.0,
        }
    }

    /// No gate, readout or decay error.
    pub fn noiseless(n: usize) -> Self {
        CalibrationSnapshot::uniform(n, 0.0, 0.0, 0.0, f64::INFINITY, f64::INFINITY)
    }

    pub fn n_qubits(&self) -> usize {
        self.omega.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.omega.len();
        if self.t1_us.len() != n || self.t2_us.len() != n {
            return Err(Error::InvalidCalibration("per-qubit lists differ in length".into()));
        }
        for (k, &g) in &self.gamma {
            check_prob(&format!("gamma[{k}]"), g)?;
        }
        for (&(a, b), &p) in &self.beta {
            check_prob(&format!("beta[{a}-{b}]"), p)?;
        }
        for (q, &w) in self.omega.iter().enumerate() {
            check_prob(&format!("omega[{q}]"), w)?;
        }
        for q in 0..n {
            let (t1, t2) = (self.t1_us[q], self.t2_us[q]);
            if !(t1 > 0.0) || !(t2 > 0.0) {
                return Err(Error::InvalidCalibration(format!("qubit {q}: T1/T2 must be positive")));
            }
            if t2 > 2.0 * t1 {
                return Err(Error::InvalidCalibration(format!(
                    "qubit {q}: T2 = {t2} exceeds 2*T1 = {}",
                    2.0 * t1
                )));
            }
        }
        if !(self.gate_time_1q_ns > 0.0) || !(self.gate_time_2q_ns > 0.0) {
            return Err(Error::InvalidCalibration("gate times must be positive".into()));
        }
        Ok(())
    }

    pub fn gamma_for(&self, kind: GateKind) -> f64 {
        self.gamma.get(&kind).copied().unwrap_or(0.0)
    }

    pub fn beta_for(&self, a: usize, b: usize) -> f64 {
        self.beta.get(&(a.min(b), a.max(b))).copied().unwrap_or(0.0)
    }

    pub fn gate_time_ns(&self, kind: GateKind) -> f64 {
        match kind {
            GateKind::Measure => 0.0,
            k if k.arity() == 2 => self.gate_time_2q_ns,
            _ => self.gate_time_1q_ns,
        }
    }

    /// Pure-dephasing time Tφ with 1/Tφ = 1/T2 − 1/(2·T1). Infinite when T2 = 2·T1.
    pub fn t_phi_us(&self, q: usize) -> Result<f64> {
        let rate = 1.0 / self.t2_us[q] - 1.0 / (2.0 * self.t1_us[q]);
        if rate < -1e-15 {
            return Err(Error::InvalidCalibration(format!("qubit {q}: T_phi <= 0 (T2 > 2*T1)")));
        }
        Ok(if rate <= 0.0 { f64::INFINITY } else { 1.0 / rate })
    }

    /// Probability that a measure-and-reset relaxation event fires during `duration_ns`.
    pub fn p_amplitude(&self, q: usize, duration_ns: f64) -> f64 {
        1.0 - (-duration_ns / 1000.0 / self.t1_us[q]).exp()
    }

    /// Phase-flip probability during `duration_ns`; coherence decays as e^{-t/Tφ}.
    pub fn p_phase(&self, q: usize, duration_ns: f64) -> Result<f64> {
        let t_phi = self.t_phi_us(q)?;
        Ok(0.5 * (1.0 - (-duration_ns / 1000.0 / t_phi).exp()))
    }
}
