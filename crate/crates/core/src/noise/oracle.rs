use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::noise::engine::NoisyProgram;
use crate::noise::CalibrationSnapshot;
use crate::sim::{embed_gate, Bindings, CMatrix, Mat2};
use crate::transpiler::TranspiledCircuit;

/// Largest active register the density oracle accepts.
pub const MAX_DENSITY_QUBITS: usize = 2;

fn embed_1q(m: &Mat2, q: usize, n: usize) -> CMatrix {
    let dim = 1usize << n;
    let mask = 1usize << q;
    CMatrix::from_fn(dim, dim, |i, j| {
        if i & !mask == j & !mask {
            m[(i >> q) & 1][(j >> q) & 1]
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

fn conj(k: &CMatrix, rho: &CMatrix) -> CMatrix {
    k * rho * k.adjoint()
}

fn mix(rho: &CMatrix, p: f64, kicked: CMatrix) -> CMatrix {
    rho * C64::from(1.0 - p) + kicked * C64::from(p)
}

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

fn paulis() -> [Mat2; 3] {
    let i = C64::new(0.0, 1.0);
    [[[ZERO, ONE], [ONE, ZERO]], [[ZERO, -i], [i, ZERO]], [[ONE, ZERO], [ZERO, -ONE]]]
}

fn depolarize(rho: &CMatrix, q: usize, n: usize, p: f64) -> CMatrix {
    if p <= 0.0 {
        return rho.clone();
    }
    let mut kicked = CMatrix::zeros(rho.nrows(), rho.ncols());
    for m in paulis() {
        kicked += conj(&embed_1q(&m, q, n), rho) / C64::from(3.0);
    }
    mix(rho, p, kicked)
}

fn amplitude_damp(rho: &CMatrix, q: usize, n: usize, g: f64) -> CMatrix {
    let k0 = [[ONE, ZERO], [ZERO, C64::from((1.0 - g).sqrt())]];
    let k1 = [[ZERO, C64::from(g.sqrt())], [ZERO, ZERO]];
    conj(&embed_1q(&k0, q, n), rho) + conj(&embed_1q(&k1, q, n), rho)
}

fn dephase(rho: &CMatrix, q: usize, n: usize, p: f64) -> CMatrix {
    if p <= 0.0 {
        return rho.clone();
    }
    mix(rho, p, conj(&embed_1q(&paulis()[2], q, n), rho))
}

/// Density matrix over the active qubits of `tc` (ascending physical order) after
/// exact composition of depolarizing, amplitude-damping and dephasing channels.
pub fn density_oracle(tc: &TranspiledCircuit, bindings: &Bindings<'_>, calib: &CalibrationSnapshot) -> Result<CMatrix> {
    Ok(evolve(&NoisyProgram::build(tc, bindings, calib)?, calib)?.0)
}

fn evolve<'a>(prog: &'a NoisyProgram, calib: &CalibrationSnapshot) -> Result<(CMatrix, &'a NoisyProgram)> {
    let n = prog.n_qubits();
    if n > MAX_DENSITY_QUBITS {
        return Err(Error::TooManyQubits { n, max: MAX_DENSITY_QUBITS });
    }
    let dim = 1usize << n;
    let mut rho = CMatrix::zeros(dim, dim);
    rho[(0, 0)] = ONE;
    let phys = prog.physical();
    for (gates, duration) in prog.layers() {
        for g in gates {
            let u = embed_gate(g, n, None)?;
            rho = conj(&u, &rho);
            let qs = g.qubits();
            let p = if qs.len() == 1 {
                calib.gamma_for(g.kind)
            } else {
                calib.beta_for(phys[qs[0]], phys[qs[1]])
            };
            for &q in qs {
                rho = depolarize(&rho, q, n, p);
            }
        }
        for q in 0..n {
            rho = amplitude_damp(&rho, q, n, calib.p_amplitude(phys[q], *duration));
            rho = dephase(&rho, q, n, calib.p_phase(phys[q], *duration)?);
        }
    }
    Ok((rho, prog))
}

/// Exact outcome distribution over classical bits: density diagonal marginalized
/// onto the measured bits, then passed through per-bit symmetric readout confusion.
pub fn oracle_distribution(
    tc: &TranspiledCircuit,
    bindings: &Bindings<'_>,
    calib: &CalibrationSnapshot,
) -> Result<Vec<f64>> {
    let prog = NoisyProgram::build(tc, bindings, calib)?;
    let (rho, prog) = evolve(&prog, calib)?;
    let n_cl = prog.n_clbits();
    let mut dist = vec![0.0; 1 << n_cl];
    for k in 0..rho.nrows() {
        let idx = prog.measured().iter().fold(0, |acc, &(q, c)| acc | ((k >> q) & 1) << c);
        dist[idx] += rho[(k, k)].re;
    }
    for (bit, &w) in prog.readout().iter().enumerate() {
        let mut next = vec![0.0; dist.len()];
        for (k, &p) in dist.iter().enumerate() {
            next[k] += (1.0 - w) * p;
            next[k ^ (1 << bit)] += w * p;
        }
        dist = next;
    }
    Ok(dist)
}
