use num_complex::Complex64 as C64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::sampling::multinomial;
use crate::sim::circuit::Circuit;
use crate::sim::counts::Counts;
use crate::sim::gate::{single_qubit_matrix, Bindings, Gate, GateKind, Mat2};
use crate::sim::MAX_QUBITS;

/// Amplitudes of an n-qubit register; qubit 0 is the least-significant index bit.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<C64>,
}

impl StateVector {
    /// |0…0⟩ on `n_qubits`.
    pub fn zero(n_qubits: usize) -> Result<StateVector> {
        Self::basis(n_qubits, 0)
    }

    pub fn basis(n_qubits: usize, index: usize) -> Result<StateVector> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::RegisterSize(n_qubits, MAX_QUBITS));
        }
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::InvalidArgument(format!("basis index {index} >= {dim}")));
        }
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[index] = C64::new(1.0, 0.0);
        Ok(StateVector { n_qubits, amps })
    }

    /// Wrap raw amplitudes; the vector is normalized.
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<StateVector> {
        let dim = amps.len();
        if !dim.is_power_of_two() || dim < 2 {
            return Err(Error::InvalidArgument(format!("amplitude length {dim} is not 2^n")));
        }
        let n_qubits = dim.trailing_zeros() as usize;
        if n_qubits > MAX_QUBITS {
            return Err(Error::RegisterSize(n_qubits, MAX_QUBITS));
        }
        let mut s = StateVector { n_qubits, amps };
        let norm = s.norm_sqr().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidArgument("zero or non-finite state".into()));
        }
        s.amps.iter_mut().for_each(|a| *a /= norm);
        Ok(s)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Probability that `qubit` reads 1.
    pub fn prob_one(&self, qubit: usize) -> f64 {
        let m = 1usize << qubit;
        self.amps.iter().enumerate().filter(|(i, _)| i & m != 0).map(|(_, a)| a.norm_sqr()).sum()
    }

    fn check(&self, q: usize) -> Result<()> {
        if q >= self.n_qubits {
            Err(Error::QubitOutOfRange { qubit: q, n_qubits: self.n_qubits })
        } else {
            Ok(())
        }
    }

    /// Apply `gate` in place; slot angles resolve through `bindings`.
    pub fn apply(&mut self, gate: &Gate, bindings: Option<&Bindings<'_>>) -> Result<()> {
        let qs = gate.qubits();
        for &q in qs {
            self.check(q)?;
        }
        if qs.len() == 2 && qs[0] == qs[1] {
            return Err(Error::DuplicateOperands(qs.to_vec()));
        }
        match gate.kind {
            GateKind::Measure => Err(Error::MeasureNotUnitary),
            GateKind::Id => Ok(()),
            GateKind::CNOT => {
                self.cnot(qs[0], qs[1]);
                Ok(())
            }
            GateKind::SWAP => {
                self.swap(qs[0], qs[1]);
                Ok(())
            }
            GateKind::ZZ => {
                let theta = gate.resolve_angle(bindings)?;
                self.zz(qs[0], qs[1], theta);
                Ok(())
            }
            kind => {
                let theta = gate.resolve_angle(bindings)?;
                self.apply_matrix(qs[0], &single_qubit_matrix(kind, theta)?);
                Ok(())
            }
        }
    }

    pub fn apply_matrix(&mut self, q: usize, m: &Mat2) {
        let stride = 1usize << q;
        let dim = self.amps.len();
        let mut base = 0;
        while base < dim {
            for i in base..base + stride {
                let a = self.amps[i];
                let b = self.amps[i + stride];
                self.amps[i] = m[0][0] * a + m[0][1] * b;
                self.amps[i + stride] = m[1][0] * a + m[1][1] * b;
            }
            base += 2 * stride;
        }
    }

    pub fn apply_x(&mut self, q: usize) {
        let m = 1usize << q;
        for i in 0..self.amps.len() {
            if i & m == 0 {
                self.amps.swap(i, i | m);
            }
        }
    }

    pub fn apply_z(&mut self, q: usize) {
        let m = 1usize << q;
        for (i, a) in self.amps.iter_mut().enumerate() {
            if i & m != 0 {
                *a = -*a;
            }
        }
    }

    /// Y = iXZ.
    pub fn apply_y(&mut self, q: usize) {
        let m = 1usize << q;
        let i_unit = C64::new(0.0, 1.0);
        for i in 0..self.amps.len() {
            if i & m == 0 {
                let a0 = self.amps[i];
                let a1 = self.amps[i | m];
                self.amps[i] = -i_unit * a1;
                self.amps[i | m] = i_unit * a0;
            }
        }
    }

    fn cnot(&mut self, c: usize, t: usize) {
        let (cm, tm) = (1usize << c, 1usize << t);
        for i in 0..self.amps.len() {
            if i & cm != 0 && i & tm == 0 {
                self.amps.swap(i, i | tm);
            }
        }
    }

    fn swap(&mut self, a: usize, b: usize) {
        let (am, bm) = (1usize << a, 1usize << b);
        for i in 0..self.amps.len() {
            if i & am != 0 && i & bm == 0 {
                self.amps.swap(i, i ^ am ^ bm);
            }
        }
    }

    fn zz(&mut self, a: usize, b: usize, theta: f64) {
        let even = C64::from_polar(1.0, -theta);
        let odd = C64::from_polar(1.0, theta);
        for (i, amp) in self.amps.iter_mut().enumerate() {
            let parity = ((i >> a) ^ (i >> b)) & 1;
            *amp *= if parity == 0 { even } else { odd };
        }
    }

    /// Project `qubit` onto `outcome` and renormalize. Returns the outcome probability.
    pub fn project(&mut self, qubit: usize, outcome: bool) -> f64 {
        let m = 1usize << qubit;
        let mut p = 0.0;
        for (i, a) in self.amps.iter_mut().enumerate() {
            if (i & m != 0) != outcome {
                *a = C64::new(0.0, 0.0);
            } else {
                p += a.norm_sqr();
            }
        }
        if p > 0.0 {
            let s = p.sqrt();
            self.amps.iter_mut().for_each(|a| *a /= s);
        }
        p
    }

    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }
}

/// Value-semantics gate application.
pub fn apply_gate(state: &StateVector, gate: &Gate) -> Result<StateVector> {
    let mut s = state.clone();
    s.apply(gate, None)?;
    Ok(s)
}

/// Apply all non-measurement gates of `circuit` to |0…0⟩.
pub fn run_circuit(circuit: &Circuit, bindings: &[f64]) -> Result<StateVector> {
    run_circuit_with(circuit, &Bindings::new(bindings))
}

pub fn run_circuit_with(circuit: &Circuit, bindings: &Bindings<'_>) -> Result<StateVector> {
    circuit.check_size()?;
    for slot in 0..circuit.n_slots() {
        if slot >= bindings.values.len() {
            return Err(Error::UnboundSlot(slot));
        }
    }
    let mut s = StateVector::zero(circuit.n_qubits())?;
    run_from(&mut s, circuit, bindings)?;
    Ok(s)
}

pub(crate) fn run_from(s: &mut StateVector, circuit: &Circuit, b: &Bindings<'_>) -> Result<()> {
    for g in circuit.gates() {
        if g.kind != GateKind::Measure {
            s.apply(g, Some(b))?;
        }
    }
    Ok(())
}

/// Draw `shots` i.i.d. outcomes over all qubits from |a_k|².
pub fn sample<R: Rng + ?Sized>(state: &StateVector, shots: u64, rng: &mut R) -> Result<Counts> {
    if shots == 0 {
        return Err(Error::ZeroShots);
    }
    let draws = multinomial(rng, shots, &state.probabilities());
    let mut c = Counts::new(state.n_qubits());
    for (k, n) in draws.into_iter().enumerate() {
        c.add(k as u64, n);
    }
    Ok(c)
}
