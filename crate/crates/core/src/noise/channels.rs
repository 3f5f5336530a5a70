use rand::Rng;

use crate::error::{Error, Result};
use crate::noise::CalibrationSnapshot;
use crate::sim::{Gate, GateKind, StateVector};

/// Apply X, Y or Z (1, 2, 3) to `q`.
pub(crate) fn apply_pauli(state: &mut StateVector, q: usize, which: u8) {
    match which {
        1 => state.apply_x(q),
        2 => state.apply_y(q),
        3 => state.apply_z(q),
        _ => {}
    }
}

/// Depolarizing trajectory step after `gate`: with probability γ (single-qubit) or
/// β per operand (CNOT-class), a uniformly random non-identity Pauli hits the qubit.
///
/// `physical` maps state indices to the calibration's qubit numbering.
pub fn apply_gate_noise<R: Rng + ?Sized>(
    state: &mut StateVector,
    gate: &Gate,
    calib: &CalibrationSnapshot,
    physical: &[usize],
    rng: &mut R,
) -> Result<()> {
    if gate.kind == GateKind::Measure {
        return Err(Error::MeasureNotUnitary);
    }
    let qs = gate.qubits();
    let p = if qs.len() == 1 {
        calib.gamma_for(gate.kind)
    } else {
        calib.beta_for(physical[qs[0]], physical[qs[1]])
    };
    if p <= 0.0 {
        return Ok(());
    }
    for &q in qs {
        if rng.random::<f64>() < p {
            apply_pauli(state, q, rng.random_range(1..=3));
        }
    }
    Ok(())
}

/// Relaxation and dephasing of qubit `q` over `duration_ns`.
///
/// With probability 1 − e^{−t/T1} the qubit is measured and, on outcome 1, reset
/// to |0⟩; independently a Z flip fires with probability (1 − e^{−t/Tφ})/2.
pub fn apply_idle_decay<R: Rng + ?Sized>(
    state: &mut StateVector,
    q: usize,
    physical: usize,
    duration_ns: f64,
    calib: &CalibrationSnapshot,
    rng: &mut R,
) -> Result<()> {
    if duration_ns < 0.0 {
        return Err(Error::InvalidArgument("negative idle duration".into()));
    }
    let p_phase = calib.p_phase(physical, duration_ns)?;
    if duration_ns == 0.0 {
        return Ok(());
    }
    if rng.random::<f64>() < calib.p_amplitude(physical, duration_ns) {
        relax(state, q, rng);
    }
    if rng.random::<f64>() < p_phase {
        state.apply_z(q);
    }
    Ok(())
}

pub(crate) fn relax<R: Rng + ?Sized>(state: &mut StateVector, q: usize, rng: &mut R) {
    let p1 = state.prob_one(q);
    if rng.random::<f64>() < p1 {
        state.project(q, true);
        state.apply_x(q);
    } else {
        state.project(q, false);
    }
}

/// Flip each bit of `bits` independently with its own probability `omega[bit]`.
pub fn apply_readout_error<R: Rng + ?Sized>(bits: u64, omega: &[f64], rng: &mut R) -> u64 {
    let mut out = bits;
    for (b, &w) in omega.iter().enumerate() {
        if w > 0.0 && rng.random::<f64>() < w {
            out ^= 1 << b;
        }
    }
    out
}
