use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

use rand::Rng;

use super::*;
use crate::device::{DeviceProfile, DriftModel, DriftTarget, LatencyModel};
use crate::noise::CalibrationSnapshot;
use crate::sampling::rng_for;
use crate::sim::{Circuit, Gate, Pauli, PauliString};
use crate::transpiler::CouplingMap;
use crate::vqa::{Graph, Hamiltonian, Problem};

fn square() -> Vec<(usize, usize)> {
    vec![(0, 1), (1, 2), (2, 3), (0, 3)]
}

fn qaoa() -> Problem {
    Problem::maxcut(&Graph::ring(4)).unwrap()
}

/// One RY parameter measured in Z: loss cos θ.
fn ry_toy() -> Problem {
    let mut c = Circuit::new(1);
    c.push_slot(Gate::ry(0, 0.0), 0, 1.0).unwrap();
    let h = Hamiltonian::new(1, vec![PauliString::sparse(1, &[(0, Pauli::Z)], 1.0).unwrap()], 0.0).unwrap();
    Problem::vqe(c, h).unwrap()
}

fn latency(wait: f64) -> LatencyModel {
    LatencyModel { queue_wait_s: wait, jitter_s: 0.0, exec_per_shot_s: 0.0 }
}

fn noiseless(name: &str, n: usize, wait: f64) -> DeviceProfile {
    DeviceProfile::uniform(name, CouplingMap::full(n), CalibrationSnapshot::noiseless(n), latency(wait)).unwrap()
}

fn noisy(name: &str, n: usize, scale: f64, wait: f64) -> DeviceProfile {
    let c = CalibrationSnapshot::uniform(n, 5e-4 * scale, 1e-2 * scale, 2e-2 * scale, 100.0 / scale, 80.0 / scale);
    DeviceProfile::uniform(name, CouplingMap::line(n), c, latency(wait)).unwrap()
}

fn cfg(epochs: u64, shots: u64) -> TrainingConfig {
    TrainingConfig { epochs, shots, init_scale: 0.5, ..TrainingConfig::default() }
}

fn report(task: &TaskAssignment, value: f64, p: f64, device: &str) -> GradientReport {
    GradientReport {
        task_id: task.task_id,
        step_id: task.step_id,
        param_index: task.param_index,
        term_index: task.term_index,
        value,
        p_correct: p,
        device: device.into(),
        issue_step: task.issue_step,
        apply_step: None,
        submit_time: 0.0,
        complete_time: 1.0,
    }
}

fn no_loss(_: &[f64]) -> crate::Result<f64> {
    Ok(0.0)
}

#[test]
fn qaoa_tasks_cycle_over_parameters() {
    let p = qaoa();
    let mut m = MasterState::new(&p, vec![0.0; 2], 3).unwrap();
    let order: Vec<usize> = (0..6).map(|_| m.next_task().unwrap().param_index).collect();
    assert_eq!(order, [0, 1, 0, 1, 0, 1]);
    assert_eq!(m.epoch(), 3);
    assert!(matches!(m.next_task(), Err(crate::Error::TrainingFinished)));
}

#[test]
fn vqe_step_has_one_task_per_term() {
    let p = Problem::heisenberg(4, &square(), 1.0, 1.0).unwrap();
    assert_eq!(p.n_params(), 16);
    assert_eq!(p.tasks_per_step(), 16);
    let mut m = MasterState::new(&p, vec![0.0; 16], 1).unwrap();
    let first: Vec<TaskAssignment> = (0..16).map(|_| m.next_task().unwrap()).collect();
    assert!(first.iter().all(|t| t.param_index == 0 && t.step_id == 0));
    let terms: BTreeSet<_> = first.iter().map(|t| t.term_index.unwrap()).collect();
    assert_eq!(terms.len(), 16);
    let next = m.next_task().unwrap();
    assert_eq!((next.param_index, next.step_id, next.term_index), (1, 1, Some(0)));
}

#[test]
fn snapshot_is_fixed_at_issue() {
    let p = qaoa();
    let c = TrainingConfig { weighting: crate::fidelity::WeightingConfig::disabled(), ..cfg(2, 1) };
    let mut m = MasterState::new(&p, vec![1.0, 1.0], 2).unwrap();
    let a = m.next_task().unwrap();
    let b = m.next_task().unwrap();
    m.apply_update(report(&a, 0.4, 0.9, "d"), &c, no_loss).unwrap();
    assert_eq!(*b.params_snapshot, vec![1.0, 1.0]);
    assert!((m.params()[0] - 0.96).abs() < 1e-12);
    let later = m.next_task().unwrap();
    assert_eq!(later.params_snapshot[0], m.params()[0]);
    assert!(!Arc::ptr_eq(&b.params_snapshot, &later.params_snapshot));
}

#[test]
fn update_rule_examples() {
    let p = qaoa();
    let disabled = TrainingConfig { weighting: crate::fidelity::WeightingConfig::disabled(), ..cfg(2, 1) };
    let mut m = MasterState::new(&p, vec![1.0, 1.0], 2).unwrap();
    let t = m.next_task().unwrap();
    let u = m.apply_update(report(&t, 0.4, 0.3, "d"), &disabled, no_loss).unwrap().unwrap();
    assert!((m.params()[0] - 0.96).abs() < 1e-12);
    assert_eq!(u.weight, 1.0);

    let weighted = cfg(2, 1);
    let mut m = MasterState::new(&p, vec![1.0, 1.0], 2).unwrap();
    let t0 = m.next_task().unwrap();
    let t1 = m.next_task().unwrap();
    m.apply_update(report(&t0, 0.0, 0.5, "b"), &weighted, no_loss).unwrap();
    assert_eq!(m.params()[0], 1.0);
    let u = m.apply_update(report(&t1, 0.4, 0.9, "a"), &weighted, no_loss).unwrap().unwrap();
    assert!((u.weight - 1.5).abs() < 1e-12);
    assert!((m.params()[1] - 0.94).abs() < 1e-12);
    assert_eq!(m.weight_table()["b"], 0.5);
}

#[test]
fn duplicate_reports_are_rejected() {
    let p = qaoa();
    let c = cfg(1, 1);
    let mut m = MasterState::new(&p, vec![0.0; 2], 1).unwrap();
    let t = m.next_task().unwrap();
    m.apply_update(report(&t, 0.1, 0.9, "d"), &c, no_loss).unwrap();
    let err = m.apply_update(report(&t, 0.1, 0.9, "d"), &c, no_loss).unwrap_err();
    assert!(matches!(err, crate::Error::DuplicateReport { step: 0, term: None }));

    let p = Problem::heisenberg(4, &square(), 1.0, 1.0).unwrap();
    let mut m = MasterState::new(&p, vec![0.0; 16], 1).unwrap();
    let t = m.next_task().unwrap();
    assert!(m.apply_update(report(&t, 0.1, 0.9, "d"), &c, no_loss).unwrap().is_none());
    let err = m.apply_update(report(&t, 0.1, 0.9, "d"), &c, no_loss).unwrap_err();
    assert!(matches!(err, crate::Error::DuplicateReport { step: 0, term: Some(0) }));
}

#[test]
fn malformed_reports_are_rejected() {
    let p = qaoa();
    let c = cfg(1, 1);
    let mut m = MasterState::new(&p, vec![0.0; 2], 1).unwrap();
    let t = m.next_task().unwrap();
    assert!(m.apply_update(report(&t, f64::NAN, 0.9, "d"), &c, no_loss).is_err());
    assert!(m.apply_update(report(&t, 0.1, 1.2, "d"), &c, no_loss).is_err());
    let mut r = report(&t, 0.1, 0.9, "d");
    r.step_id = 7;
    assert!(m.apply_update(r, &c, no_loss).is_err());
}

#[test]
fn noiseless_ry_gradient_is_minus_one() {
    let p = ry_toy();
    let mut client = Client::new(noiseless("ideal", 1, 0.0), &p).unwrap();
    let task = TaskAssignment {
        task_id: 0,
        step_id: 0,
        param_index: 0,
        term_index: Some(0),
        params_snapshot: Arc::new(vec![FRAC_PI_2]),
        issue_step: 0,
    };
    let r = client.client_step(&task, &p, 8192, 3, 0.0).unwrap();
    // shots at θ = π and θ = 0 are deterministic; 3σ bound for the general case
    assert!((r.value + 1.0).abs() <= 3.0 * (0.5f64 / 8192.0).sqrt());
    assert_eq!(r.p_correct, 1.0);
    assert_eq!(client.jobs_submitted(), 1);
}

#[test]
fn p_correct_falls_as_calibration_ages() {
    let p = Problem::heisenberg(4, &square(), 1.0, 1.0).unwrap();
    let mut dev = noisy("drifting", 5, 1.0, 0.0);
    dev.drift = DriftModel {
        rate_per_hour: 0.5,
        affected: [DriftTarget::Gamma, DriftTarget::Beta, DriftTarget::Omega].into_iter().collect(),
    };
    let mut client = Client::new(dev, &p).unwrap();
    let mut m = MasterState::new(&p, vec![0.1; 16], 1).unwrap();
    let task = m.next_task().unwrap();
    let early = client.client_step(&task, &p, 16, 0, 0.0).unwrap();
    let late = client.client_step(&task, &p, 16, 0, 4.0 * 3600.0).unwrap();
    assert!(late.p_correct < early.p_correct);
}

#[test]
fn device_too_small_is_rejected() {
    let p = Problem::heisenberg(4, &square(), 1.0, 1.0).unwrap();
    let err = run_training(&p, &[noiseless("tiny", 2, 0.0)], &cfg(1, 8)).unwrap_err();
    assert!(matches!(err, crate::Error::DeviceTooSmall { needed: 4, available: 2, .. }));
    assert!(matches!(run_training(&p, &[], &cfg(1, 8)), Err(crate::Error::Fleet(_))));
    let twins = [noiseless("a", 4, 0.0), noiseless("a", 4, 0.0)];
    assert!(matches!(run_training(&p, &twins, &cfg(1, 8)), Err(crate::Error::Fleet(_))));
}

#[test]
fn single_perfect_device_matches_synchronous_sgd() {
    for p in [qaoa(), Problem::heisenberg(4, &square(), 1.0, 1.0).unwrap()] {
        let dev = noiseless("solo", 4, 0.0);
        let c = cfg(3, 256);
        let h = run_training(&p, std::slice::from_ref(&dev), &c).unwrap();
        let trace = synchronous_sgd(&p, &dev, &c).unwrap();
        assert_eq!(h.updates.len(), trace.len());
        assert_eq!(h.final_params, *trace.last().unwrap());
        for (u, params) in h.updates.iter().zip(&trace) {
            assert_eq!(u.ideal_loss, p.ideal_loss(params).unwrap());
            assert_eq!(u.staleness, 0);
        }
    }
}

#[test]
fn throughput_scales_with_identical_devices() {
    let p = qaoa();
    let c = cfg(20, 16);
    let one = run_training(&p, &[noiseless("d0", 4, 30.0)], &c).unwrap();
    let fleet: Vec<_> = (0..4).map(|k| noiseless(&format!("d{k}"), 4, 30.0)).collect();
    let four = run_training(&p, &fleet, &c).unwrap();
    let ratio = four.tasks_per_hour().unwrap() / one.tasks_per_hour().unwrap();
    assert!((ratio - 4.0).abs() <= 0.2 * 4.0, "ratio {ratio}");
    assert_eq!(four.devices.values().map(|d| d.tasks).sum::<u64>(), 40);
}

#[test]
fn staleness_accounting() {
    let p = qaoa();
    let c = cfg(10, 16);
    let solo = run_training(&p, &[noiseless("solo", 4, 5.0)], &c).unwrap();
    assert_eq!(staleness_audit(&solo, Some(0)).unwrap().max, 0);

    let pair = [noiseless("fast", 4, 1.0), noiseless("slow", 4, 10.0)];
    let h = run_training(&p, &pair, &c).unwrap();
    let audit = staleness_audit(&h, None).unwrap();
    assert!(audit.max >= 1);
    assert_eq!(audit.histogram.values().sum::<u64>(), h.updates.len() as u64);
    assert!(matches!(
        staleness_audit(&h, Some(0)),
        Err(crate::Error::StalenessExceeded { cap: 0, .. })
    ));
}

#[test]
fn staleness_is_bounded_for_comparable_devices() {
    let p = Problem::heisenberg(4, &square(), 1.0, 1.0).unwrap();
    let fleet = [noiseless("a", 4, 10.0), noiseless("b", 4, 12.0), noiseless("c", 4, 15.0)];
    let h = run_training(&p, &fleet, &cfg(1, 8)).unwrap();
    let bound = fleet.len() as u64 * p.tasks_per_step() as u64;
    assert!(staleness_audit(&h, Some(bound)).is_ok());
    let q = qaoa();
    let equal = [noiseless("a", 4, 10.0), noiseless("b", 4, 10.0), noiseless("c", 4, 10.0)];
    let h = run_training(&q, &equal, &cfg(30, 8)).unwrap();
    assert!(staleness_audit(&h, Some(equal.len() as u64)).is_ok());
}

#[test]
fn every_accepted_report_is_applied_once() {
    let p = Problem::heisenberg(4, &square(), 1.0, 1.0).unwrap();
    let fleet = [noisy("a", 5, 1.0, 3.0), noisy("b", 5, 2.0, 7.0)];
    let h = run_training(&p, &fleet, &cfg(1, 32)).unwrap();
    assert_eq!(h.updates.len(), 16);
    assert_eq!(h.reports_accepted, 16 * 16);
    let steps: Vec<u64> = h.updates.iter().map(|u| u.step).collect();
    assert_eq!(steps, (0..16).collect::<Vec<_>>());
    assert_eq!(h.epochs.len(), 1);
}

#[test]
fn deterministic_mode_is_reproducible() {
    let p = qaoa();
    let fleet = [noisy("a", 5, 1.0, 3.0), noisy("b", 5, 3.0, 5.0), noisy("c", 5, 2.0, 4.0)];
    let c = TrainingConfig { seed: 11, ..cfg(5, 128) };
    let h1 = run_training(&p, &fleet, &c).unwrap();
    let h2 = rayon::ThreadPoolBuilder::new()
        .num_threads(3)
        .build()
        .unwrap()
        .install(|| run_training(&p, &fleet, &c).unwrap());
    assert_eq!(h1, h2);
    assert_eq!(staleness_audit(&h1, None).unwrap(), staleness_audit(&h2, None).unwrap());
    let other = run_training(&p, &fleet, &TrainingConfig { seed: 12, ..c }).unwrap();
    assert_ne!(h1.final_params, other.final_params);
}

#[test]
fn concurrent_mode_applies_every_step() {
    let p = qaoa();
    let fleet = [noisy("a", 5, 1.0, 3.0), noisy("b", 5, 3.0, 5.0)];
    let c = TrainingConfig { mode: Mode::Concurrent, ..cfg(6, 64) };
    let h = run_training(&p, &fleet, &c).unwrap();
    assert_eq!(h.updates.len(), 12);
    assert_eq!(h.epochs.len(), 6);
    assert_eq!(h.devices.values().map(|d| d.tasks).sum::<u64>(), 12);
}

#[test]
fn precise_device_outweighs_noisy_device() {
    let p = qaoa();
    let fleet = [noisy("clean", 5, 0.1, 4.0), noisy("dirty", 5, 8.0, 4.0)];
    let h = run_training(&p, &fleet, &cfg(10, 64)).unwrap();
    for e in &h.epochs {
        assert!(e.weights["clean"] >= e.weights["dirty"], "epoch {}", e.epoch);
    }
    assert_eq!(h.epochs.last().unwrap().weights["clean"], 1.5);
}

#[test]
fn failure_cdf_examples() {
    assert_eq!(failure_cdf(10, 0.0, 0).unwrap(), 1.0);
    assert_eq!(failure_cdf(10, 0.0, 4).unwrap(), 1.0);
    assert!((failure_cdf(2, 0.5, 1).unwrap() - 0.75).abs() < 1e-12);
    assert_eq!(failure_cdf(5, 1.0, 4).unwrap(), 0.0);
    assert_eq!(failure_cdf(5, 0.3, 5).unwrap(), 1.0);
    assert!(failure_cdf(5, 1.5, 1).is_err());
    assert!(failure_cdf(5, 0.5, 6).is_err());
}

#[test]
fn failure_cdf_matches_monte_carlo() {
    let (trials, p, n) = (20u64, 0.1, 5u64);
    let exact = failure_cdf(trials, p, n).unwrap();
    let samples = 1_000_000u64;
    let mut rng = rng_for(99, 0);
    let hits = (0..samples)
        .filter(|_| (0..trials).filter(|_| rng.random::<f64>() < p).count() as u64 <= n)
        .count() as f64;
    let est = hits / samples as f64;
    let sigma = (exact * (1.0 - exact) / samples as f64).sqrt();
    assert!((est - exact).abs() <= 3.0 * sigma, "{est} vs {exact}");
}

#[test]
fn epoch_records_track_loss() {
    let p = qaoa();
    let h = run_training(&p, &[noiseless("solo", 4, 0.0)], &cfg(4, 64)).unwrap();
    assert_eq!(h.epochs.len(), 4);
    let by_update: BTreeMap<u64, f64> = h.updates.iter().map(|u| (u.step, u.ideal_loss)).collect();
    for e in &h.epochs {
        assert_eq!(e.ideal_loss, by_update[&(e.epoch * 2 - 1)]);
    }
    assert_eq!(h.final_loss(), h.epochs[3].ideal_loss);
    assert!(h.tasks_per_hour().is_none());
}

#[test]
fn early_stop_drains_pending_steps() {
    let p = Problem::heisenberg(4, &square(), 1.0, 1.0).unwrap();
    let fleet = [noiseless("a", 4, 3.0), noiseless("b", 4, 5.0)];
    let c = TrainingConfig { stop_at_loss: Some(0.0), ..cfg(50, 256) };
    let h = run_training(&p, &fleet, &c).unwrap();
    let first = h.epochs.iter().position(|e| e.ideal_loss <= 0.0).unwrap();
    assert!(h.epochs.len() < 50);
    assert!(h.epochs.len() <= first + 2);
    assert_eq!(h.reports_accepted, h.updates.len() as u64 * 16);
}
