use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::{expectation_from_counts, Circuit, Counts, OccurrenceShift};
use crate::vqa::{
    diagonal_loss, gradient_from_pair, ideal_energy, ideal_gradient, maxcut_hamiltonian,
    measurement_circuit, qaoa_circuit, vqe_ansatz, Graph, Hamiltonian, SHIFT,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    /// Tasks are (parameter, Pauli term) pairs; a parameter step waits for all terms.
    Vqe,
    /// Tasks are whole-loss gradients of one parameter.
    Qaoa,
}

/// How a slot shared by several gates is shifted.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShiftRule {
    /// Shift each occurrence on its own and sum the pair differences (exact).
    #[default]
    PerOccurrence,
    /// Shift every occurrence at once by ±π/2 (one circuit pair, approximate).
    Simultaneous,
}

/// Measurement circuit and shifted bindings one task must run.
#[derive(Clone, Debug, PartialEq)]
pub struct TaskCircuits {
    /// Index into `Problem::measurement_circuits`.
    pub circuit: usize,
    /// Forward/backward shift pairs; the gradient sums their differences.
    pub shifts: Vec<(OccurrenceShift, OccurrenceShift)>,
}

/// A trainable problem: circuit, Hamiltonian and task decomposition.
#[derive(Clone, Debug)]
pub struct Problem {
    pub kind: ProblemKind,
    pub circuit: Circuit,
    pub hamiltonian: Hamiltonian,
    /// VQE: one per Hamiltonian term. QAOA: a single computational-basis circuit.
    pub measurement_circuits: Vec<Circuit>,
    pub shift_rule: ShiftRule,
    pub graph: Option<Graph>,
}

impl Problem {
    pub fn vqe(circuit: Circuit, hamiltonian: Hamiltonian) -> Result<Problem> {
        if hamiltonian.n_qubits != circuit.n_qubits() {
            return Err(Error::LengthMismatch { expected: circuit.n_qubits(), got: hamiltonian.n_qubits });
        }
        if hamiltonian.terms.is_empty() {
            return Err(Error::InvalidArgument("Hamiltonian has no terms".into()));
        }
        let measurement_circuits = hamiltonian
            .terms
            .iter()
            .map(|t| measurement_circuit(&circuit, t))
            .collect::<Result<Vec<_>>>()?;
        Ok(Problem {
            kind: ProblemKind::Vqe,
            circuit,
            hamiltonian,
            measurement_circuits,
            shift_rule: ShiftRule::PerOccurrence,
            graph: None,
        })
    }

    /// Heisenberg model on the default hardware-efficient ansatz.
    pub fn heisenberg(n: usize, edges: &[(usize, usize)], j: f64, b: f64) -> Result<Problem> {
        Problem::vqe(vqe_ansatz(n)?, crate::vqa::heisenberg_hamiltonian(n, edges, j, b)?)
    }

    pub fn maxcut(graph: &Graph) -> Result<Problem> {
        let circuit = qaoa_circuit(graph)?;
        let hamiltonian = maxcut_hamiltonian(graph)?;
        Ok(Problem {
            kind: ProblemKind::Qaoa,
            measurement_circuits: vec![circuit.clone()],
            circuit,
            hamiltonian,
            shift_rule: ShiftRule::PerOccurrence,
            graph: Some(graph.clone()),
        })
    }

    pub fn with_shift_rule(mut self, rule: ShiftRule) -> Problem {
        self.shift_rule = rule;
        self
    }

    pub fn n_params(&self) -> usize {
        self.circuit.n_slots()
    }

    pub fn n_qubits(&self) -> usize {
        self.circuit.n_qubits()
    }

    /// Tasks issued per parameter step.
    pub fn tasks_per_step(&self) -> usize {
        match self.kind {
            ProblemKind::Vqe => self.hamiltonian.terms.len(),
            ProblemKind::Qaoa => 1,
        }
    }

    fn check_term(&self, term: Option<usize>) -> Result<()> {
        match (self.kind, term) {
            (ProblemKind::Vqe, Some(t)) if t < self.hamiltonian.terms.len() => Ok(()),
            (ProblemKind::Qaoa, None) => Ok(()),
            _ => Err(Error::InvalidArgument(format!("term {term:?} invalid for {:?} problem", self.kind))),
        }
    }

    pub fn task_circuits(&self, param: usize, term: Option<usize>) -> Result<TaskCircuits> {
        if param >= self.n_params() {
            return Err(Error::InvalidArgument(format!("parameter {param} out of range")));
        }
        self.check_term(term)?;
        let shift = |occurrence, delta| OccurrenceShift { slot: param, occurrence, delta };
        let shifts = match self.shift_rule {
            ShiftRule::Simultaneous => vec![(shift(None, SHIFT), shift(None, -SHIFT))],
            ShiftRule::PerOccurrence => (0..self.circuit.slot_occurrences(param))
                .map(|o| (shift(Some(o), SHIFT), shift(Some(o), -SHIFT)))
                .collect(),
        };
        Ok(TaskCircuits { circuit: term.unwrap_or(0), shifts })
    }

    /// Loss contribution measured by one histogram: the term's expectation (VQE) or
    /// the full energy (QAOA).
    pub fn estimate(&self, counts: &Counts, term: Option<usize>) -> Result<f64> {
        self.check_term(term)?;
        match term {
            Some(t) => expectation_from_counts(counts, &self.hamiltonian.terms[t]),
            None => diagonal_loss(counts, &self.hamiltonian),
        }
    }

    /// Gradient contribution from forward/backward histograms, one pair per shift.
    pub fn gradient(&self, term: Option<usize>, fwd: &[Counts], bck: &[Counts]) -> Result<f64> {
        if fwd.len() != bck.len() {
            return Err(Error::LengthMismatch { expected: fwd.len(), got: bck.len() });
        }
        let mut g = 0.0;
        for (f, b) in fwd.iter().zip(bck) {
            g += gradient_from_pair(self.estimate(f, term)?, self.estimate(b, term)?);
        }
        Ok(g)
    }

    pub fn ideal_loss(&self, params: &[f64]) -> Result<f64> {
        ideal_energy(&self.circuit, &self.hamiltonian, params)
    }

    pub fn ideal_gradient(&self, params: &[f64]) -> Result<Vec<f64>> {
        ideal_gradient(&self.circuit, &self.hamiltonian, params)
    }
}
