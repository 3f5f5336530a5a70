//! Exact statevector simulation: gates, sampling, Pauli expectations and a
//! dense unitary oracle.

mod circuit;
mod counts;
mod gate;
mod pauli;
mod random;
mod state;
mod unitary;

pub use circuit::Circuit;
pub use counts::{parse_bitstring, Counts};
pub use gate::{
    single_qubit_matrix, two_qubit_matrix, Angle, Bindings, Gate, GateKind, Mat2, Mat4,
    OccurrenceShift, SlotRef,
};
pub use pauli::{expectation_from_counts, expectation_pauli, Pauli, PauliString};
pub use random::{random_circuit, ALL_UNITARY_KINDS};
pub use state::{apply_gate, run_circuit, run_circuit_with, sample, StateVector};
pub use unitary::{
    embed_gate, phase_aligned_distance, unitary_of, unitary_of_with, CMatrix, MAX_ORACLE_QUBITS,
};

#[cfg(test)]
pub(crate) use state::run_from;

/// Largest simulated register.
pub const MAX_QUBITS: usize = 12;

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    use num_complex::Complex64 as C64;

    use super::*;
    use crate::error::Error;
    use crate::sampling::rng_for;

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    fn bell() -> StateVector {
        let mut c = Circuit::new(2);
        c.push(Gate::h(0)).unwrap().push(Gate::cx(0, 1)).unwrap();
        run_circuit(&c, &[]).unwrap()
    }

    fn ghz(n: usize) -> Circuit {
        let mut c = Circuit::new(n);
        c.push(Gate::h(0)).unwrap();
        for q in 0..n - 1 {
            c.push(Gate::cx(q, q + 1)).unwrap();
        }
        c
    }

    // Taylor series of exp(A), independent of the diagonal shortcut in the kernel.
    fn expm(a: &CMatrix) -> CMatrix {
        let n = a.nrows();
        let mut term = CMatrix::identity(n, n);
        let mut sum = term.clone();
        for k in 1..60 {
            term = &term * a / C64::new(k as f64, 0.0);
            sum += &term;
        }
        sum
    }

    #[test]
    fn hadamard_on_ground_state() {
        let s = apply_gate(&StateVector::zero(1).unwrap(), &Gate::h(0)).unwrap();
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        assert!(close(s.amplitudes()[0], h, 1e-15) && close(s.amplitudes()[1], h, 1e-15));
    }

    #[test]
    fn cnot_builds_bell_state() {
        let s = bell();
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        let want = [h, C64::new(0.0, 0.0), C64::new(0.0, 0.0), h];
        for (a, w) in s.amplitudes().iter().zip(want) {
            assert!(close(*a, w, 1e-15));
        }
    }

    #[test]
    fn zz_phase_matches_matrix_exponential() {
        let beta = 0.37;
        // |01⟩: qubit 0 = 1, index 1
        let s = apply_gate(&StateVector::basis(2, 1).unwrap(), &Gate::zz(0, 1, beta)).unwrap();
        assert!(close(s.amplitudes()[1], C64::from_polar(1.0, beta), 1e-14));

        let z = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            C64::new(1.0, 0.0),
            C64::new(-1.0, 0.0),
            C64::new(-1.0, 0.0),
            C64::new(1.0, 0.0),
        ]));
        let oracle = expm(&(z * C64::new(0.0, -beta)));
        let mut c = Circuit::new(2);
        c.push(Gate::zz(0, 1, beta)).unwrap();
        let u = unitary_of(&c, &[]).unwrap();
        assert!((u - oracle).iter().all(|d| d.norm() < 1e-12));
    }

    #[test]
    fn apply_gate_errors() {
        let s = StateVector::zero(2).unwrap();
        assert!(matches!(apply_gate(&s, &Gate::x(3)), Err(Error::QubitOutOfRange { .. })));
        assert_eq!(apply_gate(&s, &Gate::measure(0, 0)).unwrap_err(), Error::MeasureNotUnitary);
    }

    #[test]
    fn run_circuit_cases() {
        let s = run_circuit(&Circuit::new(3), &[]).unwrap();
        assert_eq!(s, StateVector::zero(3).unwrap());

        let s = run_circuit(&ghz(5), &[]).unwrap();
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        assert!(close(s.amplitudes()[0], h, 1e-14) && close(s.amplitudes()[31], h, 1e-14));
        assert!((s.probabilities()[0] + s.probabilities()[31] - 1.0).abs() < 1e-14);

        let mut c = Circuit::new(1);
        c.push_slot(Gate::ry(0, 0.0), 0, 1.0).unwrap();
        assert_eq!(run_circuit(&c, &[]).unwrap_err(), Error::UnboundSlot(0));
    }

    #[test]
    fn sampling_examples() {
        let mut rng = rng_for(1, 0);
        let c = sample(&StateVector::zero(1).unwrap(), 100, &mut rng).unwrap();
        assert_eq!(c.get("0"), 100);
        assert_eq!(sample(&StateVector::zero(1).unwrap(), 0, &mut rng).unwrap_err(), Error::ZeroShots);

        let c = sample(&bell(), 8192, &mut rng).unwrap();
        let sigma = (8192.0f64 * 0.25).sqrt();
        for key in ["00", "11"] {
            assert!((c.get(key) as f64 - 4096.0).abs() < 3.0 * sigma);
        }
        assert_eq!(c.get("01") + c.get("10"), 0);

        let g = run_circuit(&ghz(5), &[]).unwrap();
        let c = sample(&g, 8192, &mut rng).unwrap();
        assert_eq!(c.get("00000") + c.get("11111"), 8192);
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let s = bell();
        let a = sample(&s, 1000, &mut rng_for(9, 3)).unwrap();
        let b = sample(&s, 1000, &mut rng_for(9, 3)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn pauli_expectations() {
        let z = PauliString::parse("Z", 1.0).unwrap();
        assert!((expectation_pauli(&StateVector::zero(1).unwrap(), &z).unwrap() - 1.0).abs() < 1e-15);
        let plus = apply_gate(&StateVector::zero(1).unwrap(), &Gate::h(0)).unwrap();
        let x = PauliString::parse("X", 1.0).unwrap();
        assert!((expectation_pauli(&plus, &x).unwrap() - 1.0).abs() < 1e-15);

        // dense 4x4 contraction as oracle
        let b = bell();
        for (label, want) in [("ZZ", 1.0), ("XX", 1.0), ("ZI", 0.0), ("YY", -1.0)] {
            let p = PauliString::parse(label, 1.0).unwrap();
            let got = expectation_pauli(&b, &p).unwrap();
            let dense = dense_expectation(&b, &p);
            assert!((got - dense).abs() < 1e-12, "{label}");
            assert!((got - want).abs() < 1e-12, "{label}");
        }
        assert!(matches!(
            expectation_pauli(&b, &PauliString::parse("Z", 1.0).unwrap()),
            Err(Error::LengthMismatch { .. })
        ));
    }

    fn pauli_matrix(p: Pauli) -> [[C64; 2]; 2] {
        let (o, z, i) = (C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 1.0));
        match p {
            Pauli::I => [[o, z], [z, o]],
            Pauli::X => [[z, o], [o, z]],
            Pauli::Y => [[z, -i], [i, z]],
            Pauli::Z => [[o, z], [z, -o]],
        }
    }

    fn dense_expectation(s: &StateVector, p: &PauliString) -> f64 {
        let n = s.n_qubits();
        let dim = 1 << n;
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..dim {
            for j in 0..dim {
                let mut e = C64::new(p.coefficient, 0.0);
                for q in 0..n {
                    e *= pauli_matrix(p.paulis[q])[(i >> q) & 1][(j >> q) & 1];
                }
                acc += s.amplitudes()[i].conj() * e * s.amplitudes()[j];
            }
        }
        acc.re
    }

    #[test]
    fn expectation_from_counts_examples() {
        let zz = PauliString::parse("ZZ", 1.0).unwrap();
        let zi = PauliString::parse("ZI", 1.0).unwrap();
        let c = Counts::from_pairs(&[("00", 4096), ("11", 4096)]).unwrap();
        assert_eq!(expectation_from_counts(&c, &zz).unwrap(), 1.0);
        let c = Counts::from_pairs(&[("01", 8192)]).unwrap();
        assert_eq!(expectation_from_counts(&c, &zz).unwrap(), -1.0);
        // "ZI" is Z on qubit 0, the rightmost character
        let c = Counts::from_pairs(&[("00", 6144), ("11", 2048)]).unwrap();
        assert_eq!(expectation_from_counts(&c, &zi).unwrap(), 0.5);
        assert_eq!(expectation_from_counts(&Counts::new(2), &zz).unwrap_err(), Error::EmptyHistogram);
    }

    #[test]
    fn unitary_examples() {
        let mut c = Circuit::new(1);
        c.push(Gate::x(0)).unwrap();
        let u = unitary_of(&c, &[]).unwrap();
        assert_eq!(u[(0, 1)], C64::new(1.0, 0.0));
        assert_eq!(u[(1, 0)], C64::new(1.0, 0.0));
        assert_eq!(u[(0, 0)], C64::new(0.0, 0.0));

        let mut three = Circuit::new(2);
        three.push(Gate::cx(0, 1)).unwrap().push(Gate::cx(1, 0)).unwrap().push(Gate::cx(0, 1)).unwrap();
        let mut native = Circuit::new(2);
        native.push(Gate::swap(0, 1)).unwrap();
        let d = unitary_of(&three, &[]).unwrap() - unitary_of(&native, &[]).unwrap();
        assert!(d.iter().all(|z| z.norm() < 1e-15));

        let mut hh = Circuit::new(1);
        hh.push(Gate::h(0)).unwrap().push(Gate::h(0)).unwrap();
        let d = unitary_of(&hh, &[]).unwrap() - CMatrix::identity(2, 2);
        assert!(d.iter().all(|z| z.norm() < 1e-12));

        assert!(matches!(unitary_of(&Circuit::new(6), &[]), Err(Error::TooManyQubits { .. })));
        let mut m = Circuit::new(1);
        m.push(Gate::measure(0, 0)).unwrap();
        assert_eq!(unitary_of(&m, &[]).unwrap_err(), Error::MeasureNotUnitary);
    }

    #[test]
    fn sx_squared_is_x() {
        let mut c = Circuit::new(1);
        c.push(Gate::sx(0)).unwrap().push(Gate::sx(0)).unwrap();
        let u = unitary_of(&c, &[]).unwrap();
        assert!(close(u[(0, 1)], C64::new(1.0, 0.0), 1e-15));
        assert!(close(u[(0, 0)], C64::new(0.0, 0.0), 1e-15));
    }

    #[test]
    fn rz_convention() {
        let mut c = Circuit::new(1);
        c.push(Gate::rz(0, PI)).unwrap();
        let u = unitary_of(&c, &[]).unwrap();
        assert!(close(u[(0, 0)], C64::new(0.0, -1.0), 1e-15));
        assert!(close(u[(1, 1)], C64::new(0.0, 1.0), 1e-15));
    }

    #[test]
    fn norm_preserved_over_random_circuits() {
        let mut rng = rng_for(2024, 0);
        for i in 0..10_000 {
            let n = 1 + i % 5;
            let depth = rand::Rng::random_range(&mut rng, 0..=30);
            let c = random_circuit(&mut rng, n, depth, &ALL_UNITARY_KINDS);
            let s = run_circuit(&c, &[]).unwrap();
            assert!((s.norm_sqr() - 1.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn sampling_frequencies_within_five_sigma() {
        let mut rng = rng_for(77, 0);
        let shots = 65_536u64;
        for _ in 0..20 {
            let c = random_circuit(&mut rng, 3, 12, &ALL_UNITARY_KINDS);
            let s = run_circuit(&c, &[]).unwrap();
            let counts = sample(&s, shots, &mut rng).unwrap();
            for (k, p) in s.probabilities().into_iter().enumerate() {
                let f = counts.get_index(k as u64) as f64;
                let sigma = (shots as f64 * p * (1.0 - p)).sqrt().max(1e-9);
                assert!((f - shots as f64 * p).abs() <= 5.0 * sigma + 1e-9);
            }
        }
    }

    #[test]
    fn counts_estimator_matches_exact_expectation() {
        let mut rng = rng_for(5, 1);
        let scale = (1u64 << 50) as f64;
        for _ in 0..50 {
            let c = random_circuit(&mut rng, 3, 15, &ALL_UNITARY_KINDS);
            let s = run_circuit(&c, &[]).unwrap();
            let labels = ["ZII", "IZZ", "ZZZ", "IIZ", "ZIZ"];
            let mut exact = Counts::new(3);
            for (k, p) in s.probabilities().into_iter().enumerate() {
                exact.add(k as u64, (p * scale).round() as u64);
            }
            for l in labels {
                let p = PauliString::parse(l, 0.7).unwrap();
                let a = expectation_from_counts(&exact, &p).unwrap();
                let b = expectation_pauli(&s, &p).unwrap();
                assert!((a - b).abs() < 1e-12, "{l}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn unitary_columns_match_statevector_runs() {
        let mut rng = rng_for(11, 0);
        for _ in 0..40 {
            let n = rand::Rng::random_range(&mut rng, 1..=4);
            let c = random_circuit(&mut rng, n, 20, &ALL_UNITARY_KINDS);
            let u = unitary_of(&c, &[]).unwrap();
            for k in 0..1 << n {
                let mut s = StateVector::basis(n, k).unwrap();
                run_from(&mut s, &c, &Bindings::new(&[])).unwrap();
                for (i, a) in s.amplitudes().iter().enumerate() {
                    assert!((u[(i, k)] - a).norm() < 1e-12);
                }
            }
        }
    }
}
