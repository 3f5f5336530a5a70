use std::fmt;

use crate::error::{Error, Result};
use crate::sim::gate::{Angle, Gate, GateKind, SlotRef};
use crate::sim::MAX_QUBITS;

/// Ordered gate list over `n_qubits`, with trainable angle slots.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
    n_slots: usize,
    measured: Vec<bool>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Circuit {
        Circuit { n_qubits, gates: Vec::new(), n_slots: 0, measured: vec![false; n_qubits] }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    /// Number of distinct slots referenced (highest slot id + 1).
    pub fn n_slots(&self) -> usize {
        self.n_slots
    }

    /// Append a gate, enforcing operand range, distinctness, terminal measurement
    /// and slot placement.
    pub fn push(&mut self, gate: Gate) -> Result<&mut Self> {
        let qs = gate.qubits();
        for &q in qs {
            if q >= self.n_qubits {
                return Err(Error::QubitOutOfRange { qubit: q, n_qubits: self.n_qubits });
            }
            if self.measured[q] {
                return Err(Error::GateAfterMeasure(q));
            }
        }
        if qs.len() == 2 && qs[0] == qs[1] {
            return Err(Error::DuplicateOperands(qs.to_vec()));
        }
        if let Some(r) = gate.slot() {
            if !gate.kind.takes_angle() {
                return Err(Error::InvalidArgument(format!("slot on {}", gate.kind)));
            }
            self.n_slots = self.n_slots.max(r.slot + 1);
        }
        if gate.kind == GateKind::Measure {
            self.measured[qs[0]] = true;
        }
        self.gates.push(gate);
        Ok(self)
    }

    /// Append a gate whose angle is `scale * slot` with the next free occurrence number.
    pub fn push_slot(&mut self, gate: Gate, slot: usize, scale: f64) -> Result<&mut Self> {
        let occurrence = self.slot_occurrences(slot);
        self.push(gate.with_angle(Angle::Slot(SlotRef { slot, occurrence, scale, offset: 0.0 })))
    }

    pub fn measure_all(&mut self) -> Result<&mut Self> {
        for q in 0..self.n_qubits {
            self.push(Gate::measure(q, q))?;
        }
        Ok(self)
    }

    /// `(gate index, slot id)` for every parameterized gate.
    pub fn param_slots(&self) -> Vec<(usize, usize)> {
        self.gates
            .iter()
            .enumerate()
            .filter_map(|(i, g)| g.slot().map(|r| (i, r.slot)))
            .collect()
    }

    /// Number of gate occurrences sharing `slot`.
    pub fn slot_occurrences(&self, slot: usize) -> usize {
        self.gates
            .iter()
            .filter_map(|g| g.slot())
            .filter(|r| r.slot == slot)
            .map(|r| r.occurrence + 1)
            .max()
            .unwrap_or(0)
    }

    pub fn has_measurements(&self) -> bool {
        self.gates.iter().any(|g| g.kind == GateKind::Measure)
    }

    /// Copy with measurement gates removed.
    pub fn without_measurements(&self) -> Circuit {
        let mut c = Circuit::new(self.n_qubits);
        c.n_slots = self.n_slots;
        c.gates = self.gates.iter().filter(|g| g.kind != GateKind::Measure).copied().collect();
        c
    }

    /// `(qubit, clbit)` pairs of the measurements, in circuit order.
    pub fn measurements(&self) -> Vec<(usize, usize)> {
        self.gates
            .iter()
            .filter(|g| g.kind == GateKind::Measure)
            .map(|g| (g.qubits()[0], g.clbit.unwrap_or(g.qubits()[0])))
            .collect()
    }

    pub(crate) fn check_size(&self) -> Result<()> {
        if self.n_qubits == 0 || self.n_qubits > MAX_QUBITS {
            return Err(Error::RegisterSize(self.n_qubits, MAX_QUBITS));
        }
        Ok(())
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "circuit: {} qubits, {} gates", self.n_qubits, self.gates.len())?;
        for (i, g) in self.gates.iter().enumerate() {
            writeln!(f, "  {i:4}  {g}")?;
        }
        Ok(())
    }
}
