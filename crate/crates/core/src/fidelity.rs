//! Analytic probability that a circuit run is error-free, and the min-max
//! weighting of devices built from it.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::CalibrationSnapshot;
use crate::sim::GateKind;
use crate::transpiler::{CircuitMetrics, TranspiledCircuit};

/// Scalar inputs of the model. Times in microseconds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FidelityInputs {
    pub metrics: CircuitMetrics,
    pub gamma: f64,
    pub beta: f64,
    pub omega: f64,
    pub gate_time_1q_us: f64,
    pub gate_time_2q_us: f64,
    pub t1_us: f64,
    pub t2_us: f64,
}

/// exp(−CD·((μ1+μ2)/2)/(T1·T2)) · (1−γ)^G1 · (1−β)^G2 · (1−ω)^M, clamped to [0, 1].
pub fn p_correct_from_inputs(x: &FidelityInputs) -> Result<f64> {
    if !(x.t1_us > 0.0) || !(x.t2_us > 0.0) {
        return Err(Error::InvalidCalibration("T1 and T2 must be positive".into()));
    }
    let m = &x.metrics;
    let mean_time = (x.gate_time_1q_us + x.gate_time_2q_us) / 2.0;
    let decay = (-(m.cd as f64) * mean_time / (x.t1_us * x.t2_us)).exp();
    let p = decay
        * (1.0 - x.gamma).powi(m.g1 as i32)
        * (1.0 - x.beta).powi(m.g2 as i32)
        * (1.0 - x.omega).powi(m.m as i32);
    Ok(if p.is_nan() { 0.0 } else { p.clamp(0.0, 1.0) })
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// Calibration averaged over what the transpiled circuit uses: γ over its
/// single-qubit gates, β over its two-qubit gates, ω over measured qubits, T1/T2
/// over touched qubits.
pub fn fidelity_inputs(tc: &TranspiledCircuit, calib: &CalibrationSnapshot) -> Result<FidelityInputs> {
    let gates = tc.gates();
    for &q in &tc.active_qubits() {
        if q >= calib.n_qubits() {
            return Err(Error::QubitOutOfRange { qubit: q, n_qubits: calib.n_qubits() });
        }
    }
    let gamma = mean(
        gates
            .iter()
            .filter(|g| g.kind != GateKind::Measure && g.kind.arity() == 1)
            .map(|g| calib.gamma_for(g.kind)),
    );
    let beta = mean(
        gates
            .iter()
            .filter(|g| g.kind.arity() == 2)
            .map(|g| calib.beta_for(g.qubits()[0], g.qubits()[1])),
    );
    let omega = mean(
        gates
            .iter()
            .filter(|g| g.kind == GateKind::Measure)
            .map(|g| calib.omega[g.qubits()[0]]),
    );
    let touched: BTreeSet<usize> = tc.active_qubits().into_iter().collect();
    Ok(FidelityInputs {
        metrics: tc.metrics,
        gamma,
        beta,
        omega,
        gate_time_1q_us: calib.gate_time_1q_ns / 1000.0,
        gate_time_2q_us: calib.gate_time_2q_ns / 1000.0,
        t1_us: mean(touched.iter().map(|&q| calib.t1_us[q])),
        t2_us: mean(touched.iter().map(|&q| calib.t2_us[q])),
    })
}

pub fn p_correct(tc: &TranspiledCircuit, calib: &CalibrationSnapshot) -> Result<f64> {
    p_correct_from_inputs(&fidelity_inputs(tc, calib)?)
}

pub fn predicted_error(tc: &TranspiledCircuit, calib: &CalibrationSnapshot) -> Result<f64> {
    Ok(1.0 - p_correct(tc, calib)?)
}

/// Bounds of the gradient weights.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightingConfig {
    pub lo: f64,
    pub hi: f64,
    pub enabled: bool,
}

impl WeightingConfig {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        let cfg = WeightingConfig { lo, hi, enabled: true };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn disabled() -> Self {
        WeightingConfig { lo: 1.0, hi: 1.0, enabled: false }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lo > 0.0) || !(self.lo <= self.hi) || !self.hi.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "weight bounds need 0 < lo <= hi, got [{}, {}]",
                self.lo, self.hi
            )));
        }
        Ok(())
    }
}

impl Default for WeightingConfig {
    fn default() -> Self {
        WeightingConfig { lo: 0.5, hi: 1.5, enabled: true }
    }
}

/// Min-max rescale of P_Correct values into `[lo, hi]`; all-equal values map to the midpoint.
pub fn normalize_weights(p: &BTreeMap<String, f64>, cfg: &WeightingConfig) -> Result<BTreeMap<String, f64>> {
    if p.is_empty() {
        return Err(Error::InvalidArgument("no P_Correct values to normalize".into()));
    }
    if let Some((d, v)) = p.iter().find(|(_, v)| !(0.0..=1.0).contains(*v)) {
        return Err(Error::InvalidArgument(format!("P_Correct of {d} is {v}, outside [0,1]")));
    }
    if !cfg.enabled {
        return Ok(p.keys().map(|k| (k.clone(), 1.0)).collect());
    }
    cfg.validate()?;
    let lo = p.values().copied().fold(f64::INFINITY, f64::min);
    let hi = p.values().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    Ok(p.iter()
        .map(|(k, &v)| {
            let w = if span <= 0.0 {
                (cfg.lo + cfg.hi) / 2.0
            } else {
                (cfg.lo + (cfg.hi - cfg.lo) * (v - lo) / span).clamp(cfg.lo, cfg.hi)
            };
            (k.clone(), w)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn example() -> FidelityInputs {
        FidelityInputs {
            metrics: CircuitMetrics { cd: 6, g1: 10, g2: 4, m: 5 },
            gamma: 0.001,
            beta: 0.04,
            omega: 0.02,
            gate_time_1q_us: 0.035,
            gate_time_2q_us: 0.3,
            t1_us: 100.0,
            t2_us: 100.0,
        }
    }

    #[test]
    fn worked_example() {
        // independent scalar evaluation of every factor
        let decay = f64::exp(-6.0 * 0.1675 / 10_000.0);
        let expected = decay * 0.999f64.powi(10) * 0.96f64.powi(4) * 0.98f64.powi(5);
        let p = p_correct_from_inputs(&example()).unwrap();
        assert!((p - expected).abs() < 1e-15);
        assert!((p - 0.760023).abs() < 1e-6, "{p}");
        assert!((1.0 - p - 0.239977).abs() < 1e-6);
    }

    #[test]
    fn no_error_opportunity_is_certain() {
        let mut x = example();
        x.metrics = CircuitMetrics::default();
        assert_eq!(p_correct_from_inputs(&x).unwrap(), 1.0);
        let mut x = example();
        x.gamma = 0.0;
        x.beta = 0.0;
        x.omega = 0.0;
        x.t1_us = f64::INFINITY;
        x.t2_us = f64::INFINITY;
        assert_eq!(p_correct_from_inputs(&x).unwrap(), 1.0);
    }

    #[test]
    fn rejects_nonpositive_coherence() {
        let mut x = example();
        x.t1_us = 0.0;
        assert!(p_correct_from_inputs(&x).is_err());
        x.t1_us = 10.0;
        x.t2_us = -1.0;
        assert!(p_correct_from_inputs(&x).is_err());
    }

    fn map(v: &[(&str, f64)]) -> BTreeMap<String, f64> {
        v.iter().map(|(k, p)| (k.to_string(), *p)).collect()
    }

    #[test]
    fn normalization_examples() {
        let cfg = WeightingConfig::new(0.5, 1.5).unwrap();
        let w = normalize_weights(&map(&[("A", 0.2), ("B", 0.5), ("C", 0.8)]), &cfg).unwrap();
        assert!((w["A"] - 0.5).abs() < 1e-12);
        assert!((w["B"] - 1.0).abs() < 1e-12);
        assert!((w["C"] - 1.5).abs() < 1e-12);
        let w = normalize_weights(&map(&[("A", 0.3), ("B", 0.3)]), &WeightingConfig::new(0.25, 1.75).unwrap()).unwrap();
        assert!(w.values().all(|&x| x == 1.0));
        let w = normalize_weights(&map(&[("A", 0.1), ("B", 0.9)]), &WeightingConfig::new(1.0, 1.0).unwrap()).unwrap();
        assert!(w.values().all(|&x| x == 1.0));
        let w = normalize_weights(&map(&[("A", 0.1), ("B", 0.9)]), &WeightingConfig::disabled()).unwrap();
        assert!(w.values().all(|&x| x == 1.0));
        assert!(normalize_weights(&BTreeMap::new(), &cfg).is_err());
        assert!(normalize_weights(&map(&[("A", 1.2)]), &cfg).is_err());
        assert!(WeightingConfig::new(0.0, 1.0).is_err());
        assert!(WeightingConfig::new(1.5, 0.5).is_err());
    }

    fn inputs() -> impl Strategy<Value = FidelityInputs> {
        (
            (0usize..40, 0usize..60, 0usize..30, 0usize..8),
            (0.0..0.2f64, 0.0..0.2f64, 0.0..0.2f64),
            (0.01..0.1f64, 0.1..1.0f64),
            (1.0..200.0f64, 0.1..2.0f64),
        )
            .prop_map(|((cd, g1, g2, m), (gamma, beta, omega), (mu1, mu2), (t1, r))| FidelityInputs {
                metrics: CircuitMetrics { cd, g1, g2, m },
                gamma,
                beta,
                omega,
                gate_time_1q_us: mu1,
                gate_time_2q_us: mu2,
                t1_us: t1,
                t2_us: t1 * r,
            })
    }

    proptest! {
        #[test]
        fn p_correct_bounded_and_monotone(x in inputs(), which in 0usize..9, bump in 0.001..0.1f64) {
            let p = p_correct_from_inputs(&x).unwrap();
            prop_assert!((0.0..=1.0).contains(&p));
            let mut y = x;
            match which {
                0 => y.metrics.cd += 1,
                1 => y.metrics.g1 += 1,
                2 => y.metrics.g2 += 1,
                3 => y.metrics.m += 1,
                4 => y.gamma = (y.gamma + bump).min(1.0),
                5 => y.beta = (y.beta + bump).min(1.0),
                6 => y.omega = (y.omega + bump).min(1.0),
                7 => y.t1_us += bump * 100.0,
                _ => y.t2_us += bump * 100.0,
            }
            let q = p_correct_from_inputs(&y).unwrap();
            if which >= 7 {
                prop_assert!(q >= p);
            } else {
                prop_assert!(q <= p);
            }
        }

        #[test]
        fn weights_bounded_order_preserving_affine_invariant(
            ps in prop::collection::vec(0.05..0.95f64, 1..10),
            lo in 0.1..1.0f64,
            width in 0.0..1.5f64,
            a in 0.1..1.0f64,
        ) {
            let cfg = WeightingConfig::new(lo, lo + width).unwrap();
            let p: BTreeMap<String, f64> = ps.iter().enumerate().map(|(i, &v)| (format!("d{i}"), v)).collect();
            let w = normalize_weights(&p, &cfg).unwrap();
            for (k, &wk) in &w {
                prop_assert!(wk >= cfg.lo - 1e-12 && wk <= cfg.hi + 1e-12);
                for (k2, &wk2) in &w {
                    if p[k] <= p[k2] {
                        prop_assert!(wk <= wk2 + 1e-12);
                    }
                }
            }
            // affine image a·p + b stays inside [0,1]
            let b = (1.0 - a) / 2.0;
            let q: BTreeMap<String, f64> = p.iter().map(|(k, &v)| (k.clone(), a * v + b)).collect();
            let wq = normalize_weights(&q, &cfg).unwrap();
            for k in w.keys() {
                prop_assert!((w[k] - wq[k]).abs() < 1e-9);
            }
        }
    }
}
