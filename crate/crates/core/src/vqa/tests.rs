use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;

use super::*;
use crate::sampling::rng_for;
use crate::sim::{run_circuit, sample, GateKind};

const SCALE: f64 = (1u64 << 40) as f64;

/// Histogram proportional to exact probabilities.
fn exact_counts(state: &StateVector) -> Counts {
    let mut c = Counts::new(state.n_qubits());
    for (k, p) in state.probabilities().into_iter().enumerate() {
        let n = (p * SCALE).round() as u64;
        if n > 0 {
            c.add(k as u64, n);
        }
    }
    c
}

fn square() -> Vec<(usize, usize)> {
    vec![(0, 1), (1, 2), (2, 3), (0, 3)]
}

#[test]
fn heisenberg_term_structure() {
    let h = heisenberg_hamiltonian(4, &square(), 1.0, 1.0).unwrap();
    assert_eq!(h.terms.iter().filter(|t| t.support_mask().count_ones() == 2).count(), 12);
    assert_eq!(h.terms.iter().filter(|t| t.support_mask().count_ones() == 1).count(), 4);
    assert!(heisenberg_hamiltonian(4, &[], 1.0, 1.0).is_err());
}

#[test]
fn field_only_ground_energy() {
    let h = heisenberg_hamiltonian(4, &square(), 0.0, 1.0).unwrap();
    assert!((exact_ground_energy(&h).unwrap() + 4.0).abs() < 1e-10);
    assert!((h.basis_energy(0b1111) + 4.0).abs() < 1e-12);
}

#[test]
fn lattice_ground_energy_and_hermiticity() {
    let h = heisenberg_hamiltonian(4, &square(), 1.0, 1.0).unwrap();
    let m = h.matrix().unwrap();
    assert!((&m - m.adjoint()).norm() < 1e-12);
    // singlet-like ground state of the 4-ring: −8 (total Sz = 0 sector, field term vanishes)
    assert!((exact_ground_energy(&h).unwrap() + 8.0).abs() < 1e-9);
}

#[test]
fn matrix_agrees_with_term_expectations() {
    let mut rng = rng_for(21, 0);
    let paulis = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
    for _ in 0..20 {
        let terms: Vec<PauliString> = (0..6)
            .map(|_| {
                let ps = (0..3).map(|_| paulis[rng.random_range(0..4)]).collect();
                PauliString::new(ps, rng.random_range(-2.0..2.0)).unwrap()
            })
            .collect();
        let h = Hamiltonian::new(3, terms, rng.random_range(-1.0..1.0)).unwrap();
        let amps: Vec<C64> = (0..8).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let psi = StateVector::from_amplitudes(amps.iter().map(|a| a / norm).collect()).unwrap();
        let m = h.matrix().unwrap();
        let v = nalgebra::DVector::from_vec(psi.amplitudes().to_vec());
        let direct = (v.adjoint() * &m * &v)[(0, 0)];
        assert!((direct.re - h.expectation(&psi).unwrap()).abs() < 1e-10);
        assert!(direct.im.abs() < 1e-10);
    }
}

#[test]
fn maxcut_examples() {
    let ring = Graph::ring(4);
    let best = (0..16u64).map(|k| maxcut_cost_index(k, &ring)).fold(0.0, f64::max);
    assert_eq!(best, 4.0);
    assert_eq!(maxcut_cost("0101", &ring).unwrap(), 4.0);
    assert_eq!(maxcut_cost("0000", &ring).unwrap(), 0.0);
    assert_eq!(maxcut_cost("0011", &ring).unwrap(), 2.0);
    assert!(maxcut_cost("011", &ring).is_err());
    let h = maxcut_hamiltonian(&ring).unwrap();
    assert_eq!(h.basis_energy(0b0101), -4.0);
    assert_eq!(h.basis_energy(0), 0.0);
    assert!((exact_ground_energy(&h).unwrap() + 4.0).abs() < 1e-12);
}

#[test]
fn maxcut_ground_matches_brute_force_on_all_small_graphs() {
    for n in 2..=4usize {
        let all: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
        for mask in 1u32..(1 << all.len()) {
            let edges: Vec<_> = all.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, e)| *e).collect();
            let g = Graph::new(n, &edges).unwrap();
            let h = maxcut_hamiltonian(&g).unwrap();
            let best = (0..1u64 << n).map(|k| maxcut_cost_index(k, &g)).fold(0.0, f64::max);
            assert!((exact_ground_energy(&h).unwrap() + best).abs() < 1e-9);
            let min_basis = (0..1u64 << n).map(|k| h.basis_energy(k)).fold(f64::INFINITY, f64::min);
            assert_eq!(min_basis, -best);
        }
    }
}

#[test]
fn ansatz_structure() {
    let c = vqe_ansatz(4).unwrap();
    assert_eq!(c.n_slots(), 16);
    let cx: Vec<Vec<usize>> =
        c.gates().iter().filter(|g| g.kind == GateKind::CNOT).map(|g| g.qubits().to_vec()).collect();
    assert_eq!(cx, vec![vec![0, 1], vec![1, 2], vec![2, 3]]);
    assert_eq!(c.measurements().len(), 4);
    let psi = run_circuit(&c, &[0.0; 16]).unwrap();
    assert!((psi.probabilities()[0] - 1.0).abs() < 1e-12);
    assert!(vqe_ansatz(1).is_err());
}

#[test]
fn qaoa_structure_and_landscape() {
    let g = Graph::ring(4);
    let c = qaoa_circuit(&g).unwrap();
    assert_eq!(c.n_slots(), 2);
    assert_eq!(c.gates().iter().filter(|g| g.kind == GateKind::ZZ).count(), 4);
    assert_eq!(c.gates().iter().filter(|g| g.kind == GateKind::RX).count(), 4);
    let psi = run_circuit(&c, &[0.0, 0.0]).unwrap();
    assert!(psi.probabilities().iter().all(|p| (p - 1.0 / 16.0).abs() < 1e-12));
    let h = maxcut_hamiltonian(&g).unwrap();
    let mut best = f64::INFINITY;
    for i in 0..50 {
        for j in 0..50 {
            let (b, a) = (2.0 * PI * i as f64 / 50.0, PI * j as f64 / 50.0);
            best = best.min(ideal_energy(&c, &h, &[b, a]).unwrap());
        }
    }
    assert!(best < -2.5, "{best}");
}

#[test]
fn ghz_state() {
    let c = ghz_circuit(5).unwrap();
    let psi = run_circuit(&c, &[]).unwrap();
    let p = psi.probabilities();
    assert!((p[0] - 0.5).abs() < 1e-12 && (p[31] - 0.5).abs() < 1e-12);
    let counts = sample(&psi, 8192, &mut rng_for(1, 0)).unwrap();
    assert!(counts.iter().all(|(k, _)| k == 0 || k == 31));
}

#[test]
fn measurement_suffixes() {
    let mut bell = Circuit::new(2);
    bell.push(Gate::h(0)).unwrap().push(Gate::cx(0, 1)).unwrap().measure_all().unwrap();
    let zz = PauliString::parse("ZZ", 1.0).unwrap();
    assert_eq!(measurement_circuit(&bell, &zz).unwrap(), bell);
    let xx = PauliString::parse("XX", 1.0).unwrap();
    let m = measurement_circuit(&bell, &xx).unwrap();
    let e = expectation_from_counts(&exact_counts(&run_circuit(&m, &[]).unwrap()), &xx).unwrap();
    assert!((e - 1.0).abs() < 1e-9);
    let mut rx = Circuit::new(1);
    rx.push(Gate::rx(0, FRAC_PI_2)).unwrap();
    let y = PauliString::parse("Y", 1.0).unwrap();
    let m = measurement_circuit(&rx, &y).unwrap();
    let e = expectation_from_counts(&exact_counts(&run_circuit(&m, &[]).unwrap()), &y).unwrap();
    assert!((e + 1.0).abs() < 1e-9);
}

#[test]
fn loss_examples() {
    let h = Hamiltonian::new(1, vec![PauliString::parse("Z", 1.0).unwrap()], 0.0).unwrap();
    assert_eq!(loss(&[Counts::from_pairs(&[("1", 10)]).unwrap()], &h).unwrap(), -1.0);
    assert!(loss(&[], &h).is_err());
    let ring = maxcut_hamiltonian(&Graph::ring(4)).unwrap();
    let counts = Counts::from_pairs(&[("0101", 8192)]).unwrap();
    assert_eq!(diagonal_loss(&counts, &ring).unwrap(), -4.0);
    let per_term = vec![counts; ring.terms.len()];
    assert_eq!(loss(&per_term, &ring).unwrap(), -4.0);
}

#[test]
fn sampled_energy_within_three_sigma() {
    let p = Problem::heisenberg(4, &square(), 1.0, 1.0).unwrap();
    let mut rng = rng_for(22, 0);
    let theta: Vec<f64> = (0..16).map(|_| rng.random_range(-PI..PI)).collect();
    let exact = p.ideal_loss(&theta).unwrap();
    let mut est = 0.0;
    let mut var = 0.0;
    for (t, mc) in p.hamiltonian.terms.iter().zip(&p.measurement_circuits) {
        let psi = run_circuit(mc, &theta).unwrap();
        est += expectation_from_counts(&sample(&psi, 8192, &mut rng).unwrap(), t).unwrap();
        let mean = expectation_pauli(&run_circuit(&p.circuit, &theta).unwrap(), t).unwrap() / t.coefficient;
        var += t.coefficient.powi(2) * (1.0 - mean * mean) / 8192.0;
    }
    assert!((est - exact).abs() <= 3.0 * var.sqrt(), "{est} vs {exact}");
}

#[test]
fn shift_and_pair_rules() {
    assert_eq!(shift_params(&[0.0, 0.0], 0, 1).unwrap(), vec![FRAC_PI_2, 0.0]);
    let back = shift_params(&shift_params(&[0.3, 0.7], 1, 1).unwrap(), 1, -1).unwrap();
    assert!((back[1] - 0.7).abs() < 1e-15);
    assert!(shift_params(&[0.0], 1, 1).is_err());
    assert_eq!(gradient_from_pair(0.4, 0.4), 0.0);
    // ⟨Z⟩ after RY(θ) is cos θ
    let mut c = Circuit::new(1);
    c.push_slot(Gate::ry(0, 0.0), 0, 1.0).unwrap();
    let z = Hamiltonian::new(1, vec![PauliString::parse("Z", 1.0).unwrap()], 0.0).unwrap();
    let theta = [FRAC_PI_2];
    let fwd = ideal_energy(&c, &z, &shift_params(&theta, 0, 1).unwrap()).unwrap();
    let bck = ideal_energy(&c, &z, &shift_params(&theta, 0, -1).unwrap()).unwrap();
    assert!((gradient_from_pair(fwd, bck) + 1.0).abs() < 1e-12);
}

/// Fourth-order central difference.
fn five_point(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (-f(x + 2.0 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2.0 * h)) / (12.0 * h)
}

#[test]
fn parameter_shift_matches_finite_differences() {
    let p = Problem::heisenberg(4, &square(), 1.0, 1.0).unwrap();
    let mut rng = rng_for(23, 0);
    for _ in 0..100 {
        let theta: Vec<f64> = (0..16).map(|_| rng.random_range(-PI..PI)).collect();
        let i = rng.random_range(0..16);
        let g = p.ideal_gradient(&theta).unwrap()[i];
        let f = |x: f64| {
            let mut t = theta.clone();
            t[i] = x;
            p.ideal_loss(&t).unwrap()
        };
        let central = (f(theta[i] + 1e-5) - f(theta[i] - 1e-5)) / 2e-5;
        assert!((g - central).abs() < 1e-6, "{g} vs {central}");
        assert!((g - five_point(f, theta[i], 1e-3)).abs() < 1e-9);
    }
}

#[test]
fn shared_qaoa_slots_per_occurrence_rule_is_exact() {
    let p = Problem::maxcut(&Graph::ring(4)).unwrap();
    let mut rng = rng_for(24, 0);
    for _ in 0..50 {
        let theta = [rng.random_range(-PI..PI), rng.random_range(-PI..PI)];
        let g = p.ideal_gradient(&theta).unwrap();
        for i in 0..2 {
            let f = |x: f64| {
                let mut t = theta;
                t[i] = x;
                p.ideal_loss(&t).unwrap()
            };
            let central = (f(theta[i] + 1e-5) - f(theta[i] - 1e-5)) / 2e-5;
            assert!((g[i] - central).abs() < 1e-6);
        }
    }
}

#[test]
fn simultaneous_rule_is_one_pair() {
    let p = Problem::maxcut(&Graph::ring(4)).unwrap();
    assert_eq!(p.task_circuits(0, None).unwrap().shifts.len(), 4);
    let s = p.clone().with_shift_rule(ShiftRule::Simultaneous);
    let tc = s.task_circuits(1, None).unwrap();
    assert_eq!(tc.shifts.len(), 1);
    assert_eq!(tc.shifts[0].0.occurrence, None);
}

#[test]
fn problem_gradient_from_exact_histograms() {
    let p = Problem::heisenberg(4, &square(), 1.0, 1.0).unwrap();
    assert_eq!(p.n_params(), 16);
    assert_eq!(p.tasks_per_step(), 16);
    let mut rng = rng_for(25, 0);
    let theta: Vec<f64> = (0..16).map(|_| rng.random_range(-PI..PI)).collect();
    let i = 5;
    let mut total = 0.0;
    for term in 0..p.tasks_per_step() {
        let tc = p.task_circuits(i, Some(term)).unwrap();
        let mc = &p.measurement_circuits[tc.circuit];
        let run = |s| exact_counts(&run_circuit_with(mc, &Bindings::with_shift(&theta, s)).unwrap());
        let fwd: Vec<Counts> = tc.shifts.iter().map(|(f, _)| run(*f)).collect();
        let bck: Vec<Counts> = tc.shifts.iter().map(|(_, b)| run(*b)).collect();
        total += p.gradient(Some(term), &fwd, &bck).unwrap();
    }
    assert!((total - p.ideal_gradient(&theta).unwrap()[i]).abs() < 1e-9);
    assert!(p.task_circuits(16, Some(0)).is_err());
    assert!(p.task_circuits(0, None).is_err());
}

#[test]
fn ansatz_minimum_of_ring() {
    let p = Problem::heisenberg(4, &square(), 1.0, 1.0).unwrap();
    let (e, theta) = ansatz_minimum(&p.circuit, &p.hamiltonian, 32, 600, &mut rng_for(26, 0)).unwrap();
    assert!((e - HEISENBERG_RING4_ANSATZ_MINIMUM).abs() < 1e-4, "{e}");
    assert!((p.ideal_loss(&theta).unwrap() - e).abs() < 1e-12);
}
