use std::f64::consts::PI;

use rand::Rng;

use crate::sim::circuit::Circuit;
use crate::sim::gate::{Gate, GateKind};

/// Random measurement-free circuit drawn from `kinds` with `depth` gates.
pub fn random_circuit<R: Rng + ?Sized>(
    rng: &mut R,
    n_qubits: usize,
    depth: usize,
    kinds: &[GateKind],
) -> Circuit {
    let mut c = Circuit::new(n_qubits);
    let kinds: Vec<GateKind> = kinds
        .iter()
        .copied()
        .filter(|k| *k != GateKind::Measure && (k.arity() == 1 || n_qubits >= 2))
        .collect();
    for _ in 0..depth {
        let kind = kinds[rng.random_range(0..kinds.len())];
        let a = rng.random_range(0..n_qubits);
        let gate = if kind.arity() == 2 {
            let mut b = rng.random_range(0..n_qubits - 1);
            if b >= a {
                b += 1;
            }
            let angle = kind.takes_angle().then(|| rng.random_range(-PI..PI).into());
            Gate::new(kind, &[a, b], angle)
        } else {
            let angle = kind.takes_angle().then(|| rng.random_range(-PI..PI).into());
            Gate::new(kind, &[a], angle)
        };
        c.push(gate.expect("valid random gate")).expect("valid random gate");
    }
    c
}

/// Every non-measurement kind.
pub const ALL_UNITARY_KINDS: [GateKind; 10] = [
    GateKind::H,
    GateKind::X,
    GateKind::SX,
    GateKind::Id,
    GateKind::RX,
    GateKind::RY,
    GateKind::RZ,
    GateKind::CNOT,
    GateKind::ZZ,
    GateKind::SWAP,
];
