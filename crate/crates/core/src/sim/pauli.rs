use std::fmt;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::sim::counts::Counts;
use crate::sim::state::StateVector;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Weighted tensor product of Pauli factors; `paulis[q]` acts on qubit q.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliString {
    pub paulis: Vec<Pauli>,
    pub coefficient: f64,
}

impl PauliString {
    pub fn new(paulis: Vec<Pauli>, coefficient: f64) -> Result<PauliString> {
        if !coefficient.is_finite() {
            return Err(Error::InvalidArgument("non-finite Pauli coefficient".into()));
        }
        Ok(PauliString { paulis, coefficient })
    }

    /// `coefficient * Π P_q` over the listed `(qubit, factor)` pairs, identity elsewhere.
    pub fn sparse(n: usize, factors: &[(usize, Pauli)], coefficient: f64) -> Result<PauliString> {
        let mut paulis = vec![Pauli::I; n];
        for &(q, p) in factors {
            if q >= n {
                return Err(Error::QubitOutOfRange { qubit: q, n_qubits: n });
            }
            paulis[q] = p;
        }
        PauliString::new(paulis, coefficient)
    }

    /// Parse a factor string written qubit 0 first, e.g. `"ZZII"`.
    pub fn parse(factors: &str, coefficient: f64) -> Result<PauliString> {
        let paulis = factors
            .chars()
            .map(|c| match c.to_ascii_uppercase() {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                _ => Err(Error::InvalidArgument(format!("bad Pauli factor '{c}'"))),
            })
            .collect::<Result<Vec<_>>>()?;
        PauliString::new(paulis, coefficient)
    }

    pub fn len(&self) -> usize {
        self.paulis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paulis.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.paulis.iter().all(|&p| p == Pauli::I)
    }

    pub fn is_diagonal(&self) -> bool {
        self.paulis.iter().all(|&p| matches!(p, Pauli::I | Pauli::Z))
    }

    /// Bit mask of the non-identity factors.
    pub fn support_mask(&self) -> u64 {
        self.mask(|p| p != Pauli::I)
    }

    fn mask(&self, f: impl Fn(Pauli) -> bool) -> u64 {
        self.paulis.iter().enumerate().filter(|(_, &p)| f(p)).fold(0, |m, (q, _)| m | 1 << q)
    }

    /// Factor string qubit 0 first.
    pub fn label(&self) -> String {
        self.paulis.iter().map(|p| p.symbol()).collect()
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:+}*{}", self.coefficient, self.label())
    }
}

/// `coefficient * ⟨ψ|P|ψ⟩`.
pub fn expectation_pauli(state: &StateVector, pauli: &PauliString) -> Result<f64> {
    if pauli.len() != state.n_qubits() {
        return Err(Error::LengthMismatch { expected: state.n_qubits(), got: pauli.len() });
    }
    let x_mask = pauli.mask(|p| matches!(p, Pauli::X | Pauli::Y)) as usize;
    let z_mask = pauli.mask(|p| matches!(p, Pauli::Z | Pauli::Y)) as usize;
    let n_y = pauli.paulis.iter().filter(|&&p| p == Pauli::Y).count();
    // P|k⟩ = i^{n_y} (-1)^{|k & z|} |k ^ x⟩
    let y_phase = match n_y % 4 {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    };
    let amps = state.amplitudes();
    let mut acc = C64::new(0.0, 0.0);
    for (k, a) in amps.iter().enumerate() {
        let sign = if (k & z_mask).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        acc += amps[k ^ x_mask].conj() * a * sign;
    }
    Ok(pauli.coefficient * (acc * y_phase).re)
}

/// Sampling-mean estimate of a Z-diagonal term: parity of the supported bits.
pub fn expectation_from_counts(counts: &Counts, pauli: &PauliString) -> Result<f64> {
    let total = counts.total();
    if total == 0 {
        return Err(Error::EmptyHistogram);
    }
    if pauli.len() != counts.n_bits() {
        return Err(Error::LengthMismatch { expected: counts.n_bits(), got: pauli.len() });
    }
    let support = pauli.support_mask();
    let signed: i64 = counts
        .iter()
        .map(|(b, n)| if (b & support).count_ones() % 2 == 0 { n as i64 } else { -(n as i64) })
        .sum();
    Ok(pauli.coefficient * signed as f64 / total as f64)
}
