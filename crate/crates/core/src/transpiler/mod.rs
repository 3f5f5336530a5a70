//! Mapping logical circuits onto devices: SWAP routing, basis decomposition,
//! ASAP scheduling and the circuit metrics consumed by the fidelity model.

mod coupling;

use std::collections::BTreeSet;
use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use serde::Serialize;

pub use coupling::CouplingMap;

use crate::device::DeviceProfile;
use crate::error::{Error, Result};
use crate::sim::{
    phase_aligned_distance, unitary_of_with, Bindings, CMatrix, Circuit, Gate,
    GateKind, MAX_ORACLE_QUBITS,
};

/// Kinds every device basis must contain.
pub const REQUIRED_BASIS: [GateKind; 5] =
    [GateKind::CNOT, GateKind::Id, GateKind::RZ, GateKind::SX, GateKind::X];

pub type Basis = BTreeSet<GateKind>;

pub fn default_basis() -> Basis {
    REQUIRED_BASIS.into_iter().collect()
}

/// Depth and gate counts of a transpiled circuit.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CircuitMetrics {
    /// ASAP layers excluding the measurement layer.
    pub cd: usize,
    pub g1: usize,
    pub g2: usize,
    pub m: usize,
}

/// Output of routing: the physical circuit and where every virtual qubit ended up.
#[derive(Clone, Debug)]
pub struct Routed {
    pub circuit: Circuit,
    /// `final_position[v]` is the physical qubit holding virtual qubit `v` at the end.
    pub final_position: Vec<usize>,
    pub swaps: usize,
}

/// Greedy SWAP routing with identity initial layout.
///
/// Measurements are deferred to the end and read the final position of their
/// logical qubit, so no trailing SWAPs are needed.
pub fn route(circuit: &Circuit, coupling: &CouplingMap) -> Result<Routed> {
    let n_phys = coupling.n_qubits();
    if circuit.n_qubits() > n_phys {
        return Err(Error::DeviceTooSmall {
            needed: circuit.n_qubits(),
            available: n_phys,
            device: "coupling map".into(),
        });
    }
    if !coupling.is_connected() {
        return Err(Error::DisconnectedCoupling);
    }
    let mut pos: Vec<usize> = (0..n_phys).collect();
    let mut virt: Vec<usize> = (0..n_phys).collect();
    let mut out = Circuit::new(n_phys);
    let mut measures = Vec::new();
    let mut swaps = 0;
    for g in circuit.gates() {
        match g.kind {
            GateKind::Measure => measures.push(*g),
            k if k.arity() == 1 => {
                out.push(g.remapped(|q| pos[q]))?;
            }
            _ => {
                let (a, b) = (g.qubits()[0], g.qubits()[1]);
                if !coupling.adjacent(pos[a], pos[b]) {
                    let path = coupling.shortest_path(pos[a], pos[b])?;
                    for w in path.windows(2).take(path.len() - 2) {
                        out.push(Gate::swap(w[0], w[1]))?;
                        swaps += 1;
                        let (va, vb) = (virt[w[0]], virt[w[1]]);
                        virt.swap(w[0], w[1]);
                        pos[va] = w[1];
                        pos[vb] = w[0];
                    }
                }
                out.push(g.remapped(|q| pos[q]))?;
            }
        }
    }
    for m in measures {
        let q = m.qubits()[0];
        out.push(Gate::measure(pos[q], m.clbit.unwrap_or(q)))?;
    }
    Ok(Routed { circuit: out, final_position: pos, swaps })
}

/// Rewrite every kind outside `basis` with the fixed rule table.
pub fn decompose(circuit: &Circuit, basis: &Basis) -> Result<Circuit> {
    for k in REQUIRED_BASIS {
        if !basis.contains(&k) {
            return Err(Error::NotInBasis(k.name().into()));
        }
    }
    let mut out = Circuit::new(circuit.n_qubits());
    for g in circuit.gates() {
        if g.kind == GateKind::Measure || basis.contains(&g.kind) {
            out.push(*g)?;
            continue;
        }
        for r in rewrite(g)? {
            out.push(r)?;
        }
    }
    Ok(out)
}

fn rewrite(g: &Gate) -> Result<Vec<Gate>> {
    let qs = g.qubits();
    let angle = g.angle;
    Ok(match g.kind {
        GateKind::SWAP => {
            let (a, b) = (qs[0], qs[1]);
            vec![Gate::cx(a, b), Gate::cx(b, a), Gate::cx(a, b)]
        }
        GateKind::ZZ => {
            let (a, b) = (qs[0], qs[1]);
            let theta = angle.expect("zz angle");
            vec![Gate::cx(a, b), Gate::rz(b, theta.affine(2.0, 0.0)), Gate::cx(a, b)]
        }
        GateKind::H => {
            let q = qs[0];
            vec![Gate::rz(q, FRAC_PI_2), Gate::sx(q), Gate::rz(q, FRAC_PI_2)]
        }
        // RX(θ) = RZ(π/2)·SX·RZ(θ+π)·SX·RZ(π/2), applied left to right
        GateKind::RX => {
            let q = qs[0];
            let theta = angle.expect("rx angle");
            vec![
                Gate::rz(q, FRAC_PI_2),
                Gate::sx(q),
                Gate::rz(q, theta.affine(1.0, PI)),
                Gate::sx(q),
                Gate::rz(q, FRAC_PI_2),
            ]
        }
        // RY(θ) = SX·RZ(θ+π)·SX·RZ(π), applied left to right
        GateKind::RY => {
            let q = qs[0];
            let theta = angle.expect("ry angle");
            vec![Gate::sx(q), Gate::rz(q, theta.affine(1.0, PI)), Gate::sx(q), Gate::rz(q, PI)]
        }
        k => return Err(Error::NoDecomposition(k.name().into())),
    })
}

/// ASAP layering of the unitary gates, with all measurements in one final layer.
pub fn schedule(circuit: &Circuit) -> Vec<Vec<usize>> {
    let mut depth_of = vec![0usize; circuit.n_qubits()];
    let mut layers: Vec<Vec<usize>> = Vec::new();
    let mut measures = Vec::new();
    for (i, g) in circuit.gates().iter().enumerate() {
        if g.kind == GateKind::Measure {
            measures.push(i);
            continue;
        }
        let layer = g.qubits().iter().map(|&q| depth_of[q]).max().unwrap_or(0);
        if layers.len() <= layer {
            layers.push(Vec::new());
        }
        layers[layer].push(i);
        for &q in g.qubits() {
            depth_of[q] = layer + 1;
        }
    }
    if !measures.is_empty() {
        layers.push(measures);
    }
    layers
}

pub fn metrics(circuit: &Circuit, layers: &[Vec<usize>]) -> CircuitMetrics {
    let mut m = CircuitMetrics::default();
    for g in circuit.gates() {
        match g.kind {
            GateKind::Measure => m.m += 1,
            k if k.arity() == 1 => m.g1 += 1,
            _ => m.g2 += 1,
        }
    }
    m.cd = layers
        .iter()
        .filter(|l| l.iter().any(|&i| circuit.gates()[i].kind != GateKind::Measure))
        .count();
    m
}

/// A circuit expressed in a device's basis and coupling, on physical qubits.
#[derive(Clone, Debug)]
pub struct TranspiledCircuit {
    pub device_name: String,
    pub circuit: Circuit,
    pub n_logical: usize,
    /// Logical qubit -> physical qubit at the end of the circuit.
    pub layout: Vec<usize>,
    /// Final physical position of every virtual qubit, ancillas included.
    pub final_position: Vec<usize>,
    pub layers: Vec<Vec<usize>>,
    pub metrics: CircuitMetrics,
    pub swaps_inserted: usize,
}

impl TranspiledCircuit {
    pub fn gates(&self) -> &[Gate] {
        self.circuit.gates()
    }

    pub fn n_physical(&self) -> usize {
        self.circuit.n_qubits()
    }

    /// Physical qubits that carry gates or logical qubits, ascending.
    pub fn active_qubits(&self) -> Vec<usize> {
        let mut set: BTreeSet<usize> = (0..self.n_logical).collect();
        for g in self.gates() {
            set.extend(g.qubits().iter().copied());
        }
        set.into_iter().collect()
    }

    /// Same circuit on `active_qubits().len()` qubits, plus the physical index of each
    /// compact qubit.
    pub fn compact(&self) -> Result<(Circuit, Vec<usize>)> {
        let active = self.active_qubits();
        let mut index = vec![usize::MAX; self.n_physical()];
        for (i, &p) in active.iter().enumerate() {
            index[p] = i;
        }
        let mut c = Circuit::new(active.len());
        for g in self.gates() {
            c.push(g.remapped(|q| index[q]))?;
        }
        Ok((c, active))
    }

    /// Physical coupling pairs used by two-qubit gates.
    pub fn used_pairs(&self) -> BTreeSet<(usize, usize)> {
        self.gates()
            .iter()
            .filter(|g| g.kind.arity() == 2)
            .map(|g| {
                let (a, b) = (g.qubits()[0], g.qubits()[1]);
                (a.min(b), a.max(b))
            })
            .collect()
    }

    /// Gate kinds present, measurement excluded.
    pub fn kinds(&self) -> BTreeSet<GateKind> {
        self.gates().iter().map(|g| g.kind).filter(|k| *k != GateKind::Measure).collect()
    }
}

impl fmt::Display for TranspiledCircuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "device {} | logical qubits {} | swaps {}",
            self.device_name, self.n_logical, self.swaps_inserted
        )?;
        writeln!(f, "layout (logical -> physical): {:?}", self.layout)?;
        for (li, layer) in self.layers.iter().enumerate() {
            let gs: Vec<String> = layer.iter().map(|&i| self.gates()[i].to_string()).collect();
            writeln!(f, "  layer {li:3}: {}", gs.join("; "))?;
        }
        write!(
            f,
            "metrics: CD={} G1={} G2={} M={}",
            self.metrics.cd, self.metrics.g1, self.metrics.g2, self.metrics.m
        )
    }
}

/// Route, decompose, schedule and measure a circuit for a coupling map and basis.
pub fn transpile_for(
    circuit: &Circuit,
    coupling: &CouplingMap,
    basis: &Basis,
    device_name: &str,
) -> Result<TranspiledCircuit> {
    if circuit.n_qubits() > coupling.n_qubits() {
        return Err(Error::DeviceTooSmall {
            needed: circuit.n_qubits(),
            available: coupling.n_qubits(),
            device: device_name.into(),
        });
    }
    let routed = route(circuit, coupling)?;
    let decomposed = decompose(&routed.circuit, basis)?;
    let layers = schedule(&decomposed);
    let metrics = metrics(&decomposed, &layers);
    Ok(TranspiledCircuit {
        device_name: device_name.into(),
        layout: routed.final_position[..circuit.n_qubits()].to_vec(),
        final_position: routed.final_position,
        n_logical: circuit.n_qubits(),
        circuit: decomposed,
        layers,
        metrics,
        swaps_inserted: routed.swaps,
    })
}

pub fn transpile(circuit: &Circuit, device: &DeviceProfile) -> Result<TranspiledCircuit> {
    transpile_for(circuit, &device.coupling, &device.basis_gates, &device.name)
}

/// Unitary equivalence (up to global phase, tolerance 1e-10) between a logical
/// circuit and its transpiled form with the routing permutation applied.
pub fn verify_equivalence(original: &Circuit, transpiled: &TranspiledCircuit) -> Result<bool> {
    verify_equivalence_bound(original, transpiled, &[])
}

pub fn verify_equivalence_bound(
    original: &Circuit,
    transpiled: &TranspiledCircuit,
    bindings: &[f64],
) -> Result<bool> {
    Ok(equivalence_distance(original, transpiled, bindings)? <= 1e-10)
}

/// Max phase-aligned entry difference between the expected and transpiled unitaries.
pub fn equivalence_distance(
    original: &Circuit,
    transpiled: &TranspiledCircuit,
    bindings: &[f64],
) -> Result<f64> {
    let (compact, active) = transpiled.without_measurements().compact()?;
    let k = active.len();
    if k > MAX_ORACLE_QUBITS {
        return Err(Error::TooManyQubits { n: k, max: MAX_ORACLE_QUBITS });
    }
    let mut index = vec![usize::MAX; transpiled.n_physical()];
    for (i, &p) in active.iter().enumerate() {
        index[p] = i;
    }
    // Virtual qubit v starts on physical v; extend the logical circuit to the active register.
    let mut ext = Circuit::new(k);
    for g in original.without_measurements().gates() {
        ext.push(g.remapped(|q| index[q]))?;
    }
    let b = Bindings::new(bindings);
    let u_orig = unitary_of_with(&ext, &b)?;
    let u_trans = unitary_of_with(&compact, &b)?;
    // compact position of each virtual qubit at the end
    let dest: Vec<usize> = active.iter().map(|&p| index[transpiled.final_position[p]]).collect();
    let dim = 1usize << k;
    let permute = |i: usize| -> usize {
        (0..k).filter(|&v| i >> v & 1 == 1).fold(0, |acc, v| acc | 1 << dest[v])
    };
    let mut expected = CMatrix::zeros(dim, dim);
    for i in 0..dim {
        let pi = permute(i);
        for j in 0..dim {
            expected[(pi, j)] = u_orig[(i, j)];
        }
    }
    Ok(phase_aligned_distance(&expected, &u_trans))
}

impl TranspiledCircuit {
    fn without_measurements(&self) -> TranspiledCircuit {
        let mut t = self.clone();
        t.circuit = self.circuit.without_measurements();
        t
    }
}
