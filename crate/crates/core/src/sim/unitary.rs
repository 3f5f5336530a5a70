use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::sim::circuit::Circuit;
use crate::sim::gate::{single_qubit_matrix, two_qubit_matrix, Bindings, Gate, GateKind};

pub type CMatrix = DMatrix<C64>;

/// Largest register the dense oracles accept.
pub const MAX_ORACLE_QUBITS: usize = 5;

/// Full 2^n x 2^n matrix of one gate embedded in an n-qubit register.
pub fn embed_gate(gate: &Gate, n: usize, bindings: Option<&Bindings<'_>>) -> Result<CMatrix> {
    let dim = 1usize << n;
    let theta = gate.resolve_angle(bindings)?;
    let qs = gate.qubits();
    for &q in qs {
        if q >= n {
            return Err(Error::QubitOutOfRange { qubit: q, n_qubits: n });
        }
    }
    let mut m = CMatrix::zeros(dim, dim);
    match gate.kind {
        GateKind::Measure => return Err(Error::MeasureNotUnitary),
        k if k.arity() == 1 => {
            let u = single_qubit_matrix(k, theta)?;
            let q = qs[0];
            let mask = 1usize << q;
            for i in 0..dim {
                for j in 0..dim {
                    if i & !mask == j & !mask {
                        m[(i, j)] = u[(i >> q) & 1][(j >> q) & 1];
                    }
                }
            }
        }
        k => {
            let u = two_qubit_matrix(k, theta)?;
            let (a, b) = (qs[0], qs[1]);
            let mask = (1usize << a) | (1usize << b);
            let local = |i: usize| ((i >> a) & 1) | (((i >> b) & 1) << 1);
            for i in 0..dim {
                for j in 0..dim {
                    if i & !mask == j & !mask {
                        m[(i, j)] = u[local(i)][local(j)];
                    }
                }
            }
        }
    }
    Ok(m)
}

/// Product of embedded gate matrices in circuit order.
pub fn unitary_of(circuit: &Circuit, bindings: &[f64]) -> Result<CMatrix> {
    unitary_of_with(circuit, &Bindings::new(bindings))
}

pub fn unitary_of_with(circuit: &Circuit, bindings: &Bindings<'_>) -> Result<CMatrix> {
    let n = circuit.n_qubits();
    if n > MAX_ORACLE_QUBITS {
        return Err(Error::TooManyQubits { n, max: MAX_ORACLE_QUBITS });
    }
    if circuit.has_measurements() {
        return Err(Error::MeasureNotUnitary);
    }
    let mut u = CMatrix::identity(1 << n, 1 << n);
    for g in circuit.gates() {
        u = embed_gate(g, n, Some(bindings))? * u;
    }
    Ok(u)
}

/// Max entry difference between `a` and `b` after aligning global phase on the
/// largest entry of `a`.
pub fn phase_aligned_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    let (mut best, mut idx) = (0.0, (0, 0));
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            let v = a[(i, j)].norm();
            if v > best {
                best = v;
                idx = (i, j);
            }
        }
    }
    if best == 0.0 {
        return (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max);
    }
    let ratio = b[idx] / a[idx];
    if ratio.norm() == 0.0 {
        return f64::INFINITY;
    }
    let phase = ratio / ratio.norm();
    a.iter().zip(b.iter()).map(|(x, y)| (x * phase - y).norm()).fold(0.0, f64::max)
}
