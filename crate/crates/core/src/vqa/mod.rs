//! Problem definitions: Heisenberg and MaxCut Hamiltonians, the VQE ansatz, the
//! single-layer QAOA circuit, measurement-basis suffixes and parameter-shift
//! differentiation.

mod problem;

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::SymmetricEigen;
use num_complex::Complex64 as C64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::{
    expectation_from_counts, expectation_pauli, parse_bitstring, run_circuit_with, Bindings,
    CMatrix, Circuit, Counts, Gate, OccurrenceShift, Pauli, PauliString, StateVector,
    MAX_ORACLE_QUBITS,
};

pub use problem::{Problem, ProblemKind, ShiftRule, TaskCircuits};

/// Parameter-shift magnitude for generators with eigenvalues ±1/2.
pub const SHIFT: f64 = FRAC_PI_2;

/// Undirected unweighted graph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Graph {
    pub n_nodes: usize,
    pub edges: Vec<(usize, usize)>,
}

impl Graph {
    pub fn new(n_nodes: usize, edges: &[(usize, usize)]) -> Result<Graph> {
        for &(a, b) in edges {
            if a >= n_nodes || b >= n_nodes {
                return Err(Error::QubitOutOfRange { qubit: a.max(b), n_qubits: n_nodes });
            }
            if a == b {
                return Err(Error::DuplicateOperands(vec![a, b]));
            }
        }
        Ok(Graph { n_nodes, edges: edges.to_vec() })
    }

    pub fn ring(n: usize) -> Graph {
        Graph { n_nodes: n, edges: (0..n).map(|i| (i, (i + 1) % n)).collect() }
    }
}

/// Weighted sum of Pauli strings plus a constant offset.
#[derive(Clone, Debug, PartialEq)]
pub struct Hamiltonian {
    pub n_qubits: usize,
    pub terms: Vec<PauliString>,
    pub constant: f64,
}

impl Hamiltonian {
    pub fn new(n_qubits: usize, terms: Vec<PauliString>, constant: f64) -> Result<Hamiltonian> {
        if let Some(t) = terms.iter().find(|t| t.len() != n_qubits) {
            return Err(Error::LengthMismatch { expected: n_qubits, got: t.len() });
        }
        Ok(Hamiltonian { n_qubits, terms, constant })
    }

    pub fn is_diagonal(&self) -> bool {
        self.terms.iter().all(|t| t.is_diagonal())
    }

    /// ⟨ψ|H|ψ⟩.
    pub fn expectation(&self, state: &StateVector) -> Result<f64> {
        let mut e = self.constant;
        for t in &self.terms {
            e += expectation_pauli(state, t)?;
        }
        Ok(e)
    }

    /// Energy of a computational basis state.
    pub fn basis_energy(&self, index: u64) -> f64 {
        self.constant
            + self
                .terms
                .iter()
                .filter(|t| t.is_diagonal())
                .map(|t| {
                    let parity = (index & t.support_mask()).count_ones() % 2;
                    if parity == 0 {
                        t.coefficient
                    } else {
                        -t.coefficient
                    }
                })
                .sum::<f64>()
    }

    /// Dense 2^n × 2^n matrix.
    pub fn matrix(&self) -> Result<CMatrix> {
        let n = self.n_qubits;
        if n > MAX_ORACLE_QUBITS {
            return Err(Error::TooManyQubits { n, max: MAX_ORACLE_QUBITS });
        }
        let dim = 1usize << n;
        let mut m = CMatrix::identity(dim, dim) * C64::from(self.constant);
        for t in &self.terms {
            let mut x_mask = 0usize;
            let mut z_mask = 0usize;
            let mut n_y = 0;
            for (q, p) in t.paulis.iter().enumerate() {
                match p {
                    Pauli::I => {}
                    Pauli::X => x_mask |= 1 << q,
                    Pauli::Z => z_mask |= 1 << q,
                    Pauli::Y => {
                        x_mask |= 1 << q;
                        z_mask |= 1 << q;
                        n_y += 1;
                    }
                }
            }
            let phase = C64::new(0.0, 1.0).powi(n_y);
            // P|k⟩ = i^{n_y} (−1)^{|k & z|} |k ⊕ x⟩
            for k in 0..dim {
                let sign = if (k & z_mask).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                m[(k ^ x_mask, k)] += phase * sign * t.coefficient;
            }
        }
        Ok(m)
    }
}

/// J·Σ_E (XX + YY + ZZ) + B·Σ_i Z_i; zero-coefficient groups are omitted.
pub fn heisenberg_hamiltonian(n: usize, edges: &[(usize, usize)], j: f64, b: f64) -> Result<Hamiltonian> {
    if edges.is_empty() {
        return Err(Error::InvalidArgument("Heisenberg model needs at least one edge".into()));
    }
    let mut terms = Vec::new();
    if j != 0.0 {
        for &(a, c) in edges {
            for p in [Pauli::X, Pauli::Y, Pauli::Z] {
                terms.push(PauliString::sparse(n, &[(a, p), (c, p)], j)?);
            }
        }
    }
    if b != 0.0 {
        for q in 0..n {
            terms.push(PauliString::sparse(n, &[(q, Pauli::Z)], b)?);
        }
    }
    Hamiltonian::new(n, terms, 0.0)
}

/// Number of edges cut by `assignment` (bit i = side of node i).
pub fn maxcut_cost_index(assignment: u64, graph: &Graph) -> f64 {
    graph
        .edges
        .iter()
        .filter(|&&(a, b)| (assignment >> a & 1) != (assignment >> b & 1))
        .count() as f64
}

/// Cut size of a little-endian bitstring (node 0 rightmost).
pub fn maxcut_cost(assignment: &str, graph: &Graph) -> Result<f64> {
    if assignment.len() != graph.n_nodes {
        return Err(Error::LengthMismatch { expected: graph.n_nodes, got: assignment.len() });
    }
    Ok(maxcut_cost_index(parse_bitstring(assignment)?, graph))
}

/// −Σ_E ½(1 − Z_a Z_b), stored as ½ Z_a Z_b terms and a −|E|/2 offset.
pub fn maxcut_hamiltonian(graph: &Graph) -> Result<Hamiltonian> {
    if graph.edges.is_empty() {
        return Err(Error::InvalidArgument("MaxCut needs at least one edge".into()));
    }
    let n = graph.n_nodes;
    let terms = graph
        .edges
        .iter()
        .map(|&(a, b)| PauliString::sparse(n, &[(a, Pauli::Z), (b, Pauli::Z)], 0.5))
        .collect::<Result<Vec<_>>>()?;
    Hamiltonian::new(n, terms, -(graph.edges.len() as f64) / 2.0)
}

/// RY and RZ layers, a linear CNOT chain, RY and RZ layers, measurement. 4n slots.
pub fn vqe_ansatz(n: usize) -> Result<Circuit> {
    if n < 2 {
        return Err(Error::InvalidArgument("ansatz needs at least 2 qubits".into()));
    }
    let mut c = Circuit::new(n);
    for q in 0..n {
        c.push_slot(Gate::ry(q, 0.0), q, 1.0)?;
    }
    for q in 0..n {
        c.push_slot(Gate::rz(q, 0.0), n + q, 1.0)?;
    }
    for q in 0..n - 1 {
        c.push(Gate::cx(q, q + 1))?;
    }
    for q in 0..n {
        c.push_slot(Gate::ry(q, 0.0), 2 * n + q, 1.0)?;
    }
    for q in 0..n {
        c.push_slot(Gate::rz(q, 0.0), 3 * n + q, 1.0)?;
    }
    c.measure_all()?;
    Ok(c)
}

/// Single-layer QAOA: H everywhere, ZZ(β/2) on every edge (slot 0), RX(α) on every
/// qubit (slot 1), measurement.
pub fn qaoa_circuit(graph: &Graph) -> Result<Circuit> {
    let n = graph.n_nodes;
    let mut c = Circuit::new(n);
    for q in 0..n {
        c.push(Gate::h(q))?;
    }
    for &(a, b) in &graph.edges {
        c.push_slot(Gate::zz(a, b, 0.0), 0, 0.5)?;
    }
    for q in 0..n {
        c.push_slot(Gate::rx(q, 0.0), 1, 1.0)?;
    }
    c.measure_all()?;
    Ok(c)
}

pub fn ghz_circuit(n: usize) -> Result<Circuit> {
    if n < 2 {
        return Err(Error::InvalidArgument("GHZ needs at least 2 qubits".into()));
    }
    let mut c = Circuit::new(n);
    c.push(Gate::h(0))?;
    for q in 0..n - 1 {
        c.push(Gate::cx(q, q + 1))?;
    }
    c.measure_all()?;
    Ok(c)
}

/// `base` with a basis change before measurement so `term` becomes Z-diagonal:
/// X → H, Y → RZ(−π/2)·H.
pub fn measurement_circuit(base: &Circuit, term: &PauliString) -> Result<Circuit> {
    if term.len() != base.n_qubits() {
        return Err(Error::LengthMismatch { expected: base.n_qubits(), got: term.len() });
    }
    let mut measured = base.measurements();
    if measured.is_empty() {
        measured = (0..base.n_qubits()).map(|q| (q, q)).collect();
    }
    let mut c = base.without_measurements();
    for (q, p) in term.paulis.iter().enumerate() {
        match p {
            Pauli::X => {
                c.push(Gate::h(q))?;
            }
            Pauli::Y => {
                c.push(Gate::rz(q, -FRAC_PI_2))?.push(Gate::h(q))?;
            }
            _ => {}
        }
    }
    for (q, clbit) in measured {
        c.push(Gate::measure(q, clbit))?;
    }
    Ok(c)
}

/// Σ_terms ⟨term⟩ estimated from each term's own histogram, plus the constant.
pub fn loss(counts_per_term: &[Counts], h: &Hamiltonian) -> Result<f64> {
    if counts_per_term.len() != h.terms.len() {
        return Err(Error::LengthMismatch { expected: h.terms.len(), got: counts_per_term.len() });
    }
    let mut e = h.constant;
    for (c, t) in counts_per_term.iter().zip(&h.terms) {
        e += expectation_from_counts(c, t)?;
    }
    Ok(e)
}

/// Energy of a diagonal Hamiltonian from one computational-basis histogram.
pub fn diagonal_loss(counts: &Counts, h: &Hamiltonian) -> Result<f64> {
    if !h.is_diagonal() {
        return Err(Error::InvalidArgument("Hamiltonian is not diagonal".into()));
    }
    let mut e = h.constant;
    for t in &h.terms {
        e += expectation_from_counts(counts, t)?;
    }
    Ok(e)
}

/// Copy of `params` with `params[i] += direction·π/2`.
pub fn shift_params(params: &[f64], i: usize, direction: i8) -> Result<Vec<f64>> {
    if i >= params.len() {
        return Err(Error::InvalidArgument(format!("parameter {i} out of range ({})", params.len())));
    }
    let mut out = params.to_vec();
    out[i] += f64::from(direction.signum()) * SHIFT;
    Ok(out)
}

pub fn gradient_from_pair(loss_fwd: f64, loss_bck: f64) -> f64 {
    (loss_fwd - loss_bck) / 2.0
}

/// Noiseless ⟨H⟩ of `circuit` at `params` (measurements ignored).
pub fn ideal_energy(circuit: &Circuit, h: &Hamiltonian, params: &[f64]) -> Result<f64> {
    ideal_energy_with(circuit, h, &Bindings::new(params))
}

pub fn ideal_energy_with(circuit: &Circuit, h: &Hamiltonian, b: &Bindings<'_>) -> Result<f64> {
    h.expectation(&run_circuit_with(circuit, b)?)
}

/// Exact parameter-shift gradient of the ideal energy, shifting each occurrence of
/// every slot on its own and summing.
pub fn ideal_gradient(circuit: &Circuit, h: &Hamiltonian, params: &[f64]) -> Result<Vec<f64>> {
    (0..params.len())
        .map(|slot| {
            let mut g = 0.0;
            for occ in 0..circuit.slot_occurrences(slot).max(1) {
                let shift = |delta| OccurrenceShift { slot, occurrence: Some(occ), delta };
                let fwd = ideal_energy_with(circuit, h, &Bindings::with_shift(params, shift(SHIFT)))?;
                let bck = ideal_energy_with(circuit, h, &Bindings::with_shift(params, shift(-SHIFT)))?;
                g += gradient_from_pair(fwd, bck);
            }
            Ok(g)
        })
        .collect()
}

/// Smallest eigenvalue of the dense Hamiltonian matrix.
pub fn exact_ground_energy(h: &Hamiltonian) -> Result<f64> {
    let m = h.matrix()?;
    let eig = SymmetricEigen::new(m).eigenvalues;
    Ok(eig.iter().copied().fold(f64::INFINITY, f64::min))
}

/// Lowest ideal energy the ansatz reaches: multi-start gradient descent with
/// momentum on exact parameter-shift gradients.
pub fn ansatz_minimum<R: Rng + ?Sized>(
    circuit: &Circuit,
    h: &Hamiltonian,
    starts: usize,
    iterations: usize,
    rng: &mut R,
) -> Result<(f64, Vec<f64>)> {
    let n = circuit.n_slots();
    let mut best = (f64::INFINITY, vec![0.0; n]);
    for _ in 0..starts {
        let mut theta: Vec<f64> = (0..n).map(|_| rng.random_range(-PI..PI)).collect();
        let mut velocity = vec![0.0; n];
        for _ in 0..iterations {
            let g = ideal_gradient(circuit, h, &theta)?;
            for k in 0..n {
                velocity[k] = 0.9 * velocity[k] - 0.02 * g[k];
                theta[k] += velocity[k];
            }
        }
        let e = ideal_energy(circuit, h, &theta)?;
        if e < best.0 {
            best = (e, theta);
        }
    }
    Ok(best)
}

/// Energy of the Heisenberg 4-ring (J = B = 1) at the ansatz optimum, found by
/// `ansatz_minimum` with 32 starts.
pub const HEISENBERG_RING4_ANSATZ_MINIMUM: f64 = -6.573380;

#[cfg(test)]
mod tests;
