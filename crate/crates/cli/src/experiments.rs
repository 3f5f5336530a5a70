use std::fmt::Write as _;

use anyhow::{bail, ensure, Result};

use eqc_core::device::DeviceProfile;
use eqc_core::ensemble::{run_training, TrainingHistory};
use eqc_core::fidelity::{p_correct, predicted_error};
use eqc_core::sampling::{derive_seed, rng_for};
use eqc_core::sim::{run_circuit, sample, Bindings, Circuit};
use eqc_core::transpiler::{transpile, TranspiledCircuit};
use eqc_core::vqa::{
    ansatz_minimum, exact_ground_energy, ghz_circuit, maxcut_cost_index, qaoa_circuit, vqe_ansatz, Graph, Problem,
};

use crate::config::{ExperimentConfig, ProblemKind};
use crate::output::{QaoaOutcome, RunSummary, ScatterRow, OUTPUT_SCHEMA_VERSION};

const ANSATZ_STARTS: usize = 16;
const ANSATZ_ITERATIONS: usize = 400;
const QAOA_SAMPLE_SHOTS: u64 = 8192;

pub fn build_problem(cfg: &ExperimentConfig) -> Result<Problem> {
    let n = cfg.n_nodes();
    let edges = cfg.edges();
    Ok(match cfg.problem.kind {
        ProblemKind::Vqe => Problem::heisenberg(n, &edges, cfg.problem.j, cfg.problem.b)?,
        ProblemKind::Qaoa => Problem::maxcut(&Graph::new(n, &edges)?)?,
        ProblemKind::Ghz => bail!("problem kind ghz has no training loop; use validate-model"),
    })
}

/// Lowest energy the problem's circuit reaches on an ideal simulator.
pub fn ansatz_reference(problem: &Problem, seed: u64) -> Result<f64> {
    let mut rng = rng_for(derive_seed(seed, &[0xA5A5]), 0);
    let (e, _) = ansatz_minimum(&problem.circuit, &problem.hamiltonian, ANSATZ_STARTS, ANSATZ_ITERATIONS, &mut rng)?;
    Ok(e)
}

fn rel_error(value: f64, reference: f64) -> f64 {
    (value - reference).abs() / reference.abs().max(f64::MIN_POSITIVE)
}

pub fn qaoa_outcome(problem: &Problem, params: &[f64], seed: u64) -> Result<Option<QaoaOutcome>> {
    let Some(graph) = &problem.graph else { return Ok(None) };
    let state = run_circuit(&problem.circuit.without_measurements(), params)?;
    let mut rng = rng_for(derive_seed(seed, &[0x0A0A]), 0);
    let counts = sample(&state, QAOA_SAMPLE_SHOTS, &mut rng)?;
    let mode = counts.mode().unwrap_or(0);
    let best_sampled = counts.iter().map(|(i, _)| maxcut_cost_index(i, graph)).fold(0.0, f64::max);
    let max_cut = (0..1u64 << graph.n_nodes).map(|i| maxcut_cost_index(i, graph)).fold(0.0, f64::max);
    Ok(Some(QaoaOutcome {
        best_bitstring: counts.bitstring(mode),
        best_cut: maxcut_cost_index(mode, graph),
        best_sampled_cut: best_sampled,
        max_cut,
        shots: QAOA_SAMPLE_SHOTS,
    }))
}

pub fn summarize(cfg: &ExperimentConfig, problem: &Problem, h: &TrainingHistory) -> Result<RunSummary> {
    let reference = exact_ground_energy(&problem.hamiltonian)?;
    let ansatz = ansatz_reference(problem, cfg.training.seed)?.min(h.final_loss());
    let converged = h.tail_loss(10);
    Ok(RunSummary {
        schema_version: OUTPUT_SCHEMA_VERSION,
        problem: format!("{:?}", cfg.problem.kind).to_lowercase(),
        converged_loss: converged,
        final_loss: h.final_loss(),
        initial_loss: h.initial_loss,
        reference_energy: reference,
        ansatz_reference: ansatz,
        error_vs_reference: rel_error(converged, reference),
        error_vs_ansatz: rel_error(converged, ansatz),
        epochs_run: h.epochs.len() as u64,
        epochs_to_2pct_of_ansatz: h.epochs_to_within(ansatz, 0.02),
        max_staleness: h.max_staleness(),
        makespan_s: h.makespan_s,
        tasks_per_hour: h.tasks_per_hour(),
        devices: RunSummary::device_table(h),
        final_params: h.final_params.clone(),
        qaoa: qaoa_outcome(problem, &h.final_params, cfg.training.seed)?,
        config: cfg.clone(),
    })
}

pub fn run_vqa(cfg: &ExperimentConfig, fleet: &[DeviceProfile]) -> Result<(TrainingHistory, RunSummary)> {
    let problem = build_problem(cfg)?;
    let history = run_training(&problem, fleet, &cfg.training_config()?)?;
    let summary = summarize(cfg, &problem, &history)?;
    Ok((history, summary))
}

/// Fraction of outcomes that are neither all-zeros nor all-ones.
pub fn mixed_parity_fraction(counts: &eqc_core::sim::Counts) -> f64 {
    let total = counts.total();
    if total == 0 {
        return 0.0;
    }
    let ones = (1u64 << counts.n_bits()) - 1;
    let pure = counts.get_index(0) + counts.get_index(ones);
    (total - pure) as f64 / total as f64
}

/// GHZ(5) on every device at staleness 0, P/3 and 2P/3 of its calibration period.
pub fn validate_model(fleet: &[DeviceProfile], shots: u64, seed: u64) -> Result<Vec<ScatterRow>> {
    ensure!(fleet.len() >= 2, "validate-model needs at least 2 devices, fleet has {}", fleet.len());
    let ghz = ghz_circuit(5)?;
    let mut rows = Vec::new();
    for (d_idx, d) in fleet.iter().enumerate() {
        ensure!(d.n_qubits >= 5, "device {} has {} qubits; GHZ(5) needs 5", d.name, d.n_qubits);
        let tc = transpile(&ghz, d)?;
        for k in 0..3u64 {
            let s = k as f64 * d.calibration_period_s / 3.0;
            let calib = d.current_calibration(s);
            let mut rng = rng_for(derive_seed(seed, &[d_idx as u64, k]), 0);
            let job = d.submit_job(&tc, &Bindings::new(&[]), shots, s, &mut rng)?;
            rows.push(ScatterRow {
                device: d.name.clone(),
                staleness_s: s,
                predicted_error: predicted_error(&tc, &calib)?,
                p_correct: p_correct(&tc, &calib)?,
                observed_error: mixed_parity_fraction(&job.counts[0]),
                shots,
            });
        }
    }
    Ok(rows)
}

/// Pearson correlation; `None` when either series is constant or too short.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len();
    if n != y.len() || n < 2 {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    (sxx > 0.0 && syy > 0.0).then(|| sxy / (sxx * syy).sqrt())
}

pub fn named_circuit(name: &str) -> Result<Circuit> {
    Ok(match name {
        "vqe4" => vqe_ansatz(4)?,
        "qaoa4" => qaoa_circuit(&Graph::ring(4))?,
        "ghz5" => ghz_circuit(5)?,
        _ => bail!("unknown circuit {name:?}; expected vqe4, qaoa4 or ghz5"),
    })
}

/// Transpile a named circuit and render gates, layers, metrics and p_correct.
pub fn transpile_report(name: &str, device: &DeviceProfile) -> Result<(TranspiledCircuit, String)> {
    let c = named_circuit(name)?;
    let tc = transpile(&c, device)?;
    let mut out = String::new();
    writeln!(out, "circuit {name} on {} ({} qubits)", device.name, device.n_qubits)?;
    writeln!(out, "layout {:?}", tc.layout)?;
    writeln!(out, "gates:")?;
    for (i, g) in tc.gates().iter().enumerate() {
        writeln!(out, "  {i:4} {g}")?;
    }
    writeln!(out, "layers:")?;
    for (i, l) in tc.layers.iter().enumerate() {
        writeln!(out, "  {i:4} {l:?}")?;
    }
    let m = tc.metrics;
    writeln!(out, "metrics: CD={} G1={} G2={} M={}", m.cd, m.g1, m.g2, m.m)?;
    writeln!(out, "swaps: {}", tc.swaps_inserted)?;
    writeln!(out, "p_correct: {:.6}", p_correct(&tc, &device.base_calibration)?)?;
    Ok((tc, out))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pearson_of_linear_series() {
        let x = [1.0, 2.0, 3.0, 4.0];
        assert!((pearson(&x, &[3.0, 5.0, 7.0, 9.0]).unwrap() - 1.0).abs() < 1e-12);
        assert!((pearson(&x, &[4.0, 3.0, 2.0, 1.0]).unwrap() + 1.0).abs() < 1e-12);
        assert_eq!(pearson(&x, &[1.0; 4]), None);
        assert_eq!(pearson(&[1.0], &[2.0]), None);
    }

    #[test]
    fn mixed_parity_counts() {
        let c = eqc_core::sim::Counts::from_pairs(&[("000", 6), ("111", 2), ("010", 2)]).unwrap();
        assert!((mixed_parity_fraction(&c) - 0.2).abs() < 1e-12);
    }

    #[test]
    fn perfect_device_rows_are_zero() {
        let fleet = [DeviceProfile::ideal("a", 5), DeviceProfile::ideal("b", 5)];
        for r in validate_model(&fleet, 2048, 1).unwrap() {
            assert_eq!((r.predicted_error, r.observed_error), (0.0, 0.0));
        }
        assert!(validate_model(&fleet[..1], 10, 1).is_err());
    }
}
