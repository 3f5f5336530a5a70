use std::collections::BTreeMap;

use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};
use crate::noise::channels::{apply_gate_noise, apply_idle_decay, apply_pauli, apply_readout_error};
use crate::noise::CalibrationSnapshot;
use crate::sampling::{binomial, multinomial};
use crate::sim::{single_qubit_matrix, Angle, Bindings, Circuit, Counts, Gate, GateKind, Mat2, StateVector};
use crate::transpiler::{TranspiledCircuit, REQUIRED_BASIS};

#[derive(Clone, Copy, Debug)]
enum SiteKind {
    Pauli(usize),
    Relax(usize),
    Dephase(usize),
}

#[derive(Clone, Copy, Debug)]
enum Op {
    Gate(Gate),
    Matrix(usize, Mat2),
    Site(usize),
}

/// A transpiled circuit lowered onto its active qubits with angles bound and
/// every stochastic noise location enumerated in trajectory order.
#[derive(Clone, Debug)]
pub struct NoisyProgram {
    n: usize,
    physical: Vec<usize>,
    layers: Vec<(Vec<Gate>, f64)>,
    ops: Vec<Op>,
    sites: Vec<(SiteKind, f64)>,
    site_op: Vec<usize>,
    measured: Vec<(usize, usize)>,
    n_clbits: usize,
    readout: Vec<f64>,
}

impl NoisyProgram {
    pub fn build(tc: &TranspiledCircuit, bindings: &Bindings<'_>, calib: &CalibrationSnapshot) -> Result<Self> {
        for g in tc.gates() {
            if g.kind != GateKind::Measure && !REQUIRED_BASIS.contains(&g.kind) {
                return Err(Error::NotInBasis(g.kind.name().into()));
            }
        }
        let (compact, physical) = tc.compact()?;
        let n = compact.n_qubits();
        if physical.iter().any(|&p| p >= calib.n_qubits()) {
            return Err(Error::InvalidCalibration("calibration smaller than device".into()));
        }
        let gates = compact.gates();
        let mut layers = Vec::new();
        let mut ops = Vec::new();
        let mut sites = Vec::new();
        let mut measured = Vec::new();
        let mut n_clbits = tc.n_logical;
        for layer in &tc.layers {
            let mut duration: f64 = 0.0;
            let mut bound = Vec::new();
            for &i in layer {
                let g = gates[i];
                if g.kind == GateKind::Measure {
                    let clbit = g.clbit.unwrap_or(g.qubits()[0]);
                    n_clbits = n_clbits.max(clbit + 1);
                    measured.push((g.qubits()[0], clbit));
                    continue;
                }
                let g = match g.angle {
                    Some(a) => g.with_angle(Angle::Fixed(a.resolve(Some(bindings))?)),
                    None => g,
                };
                duration = duration.max(calib.gate_time_ns(g.kind));
                match g.kind {
                    GateKind::Id => {}
                    k if k.arity() == 1 => {
                        ops.push(Op::Matrix(g.qubits()[0], single_qubit_matrix(k, g.resolve_angle(None)?)?))
                    }
                    _ => ops.push(Op::Gate(g)),
                }
                let qs = g.qubits();
                let p = if qs.len() == 1 {
                    calib.gamma_for(g.kind)
                } else {
                    calib.beta_for(physical[qs[0]], physical[qs[1]])
                };
                for &q in qs {
                    ops.push(Op::Site(sites.len()));
                    sites.push((SiteKind::Pauli(q), p));
                }
                bound.push(g);
            }
            if bound.is_empty() {
                continue;
            }
            for q in 0..n {
                let pa = calib.p_amplitude(physical[q], duration);
                let pp = calib.p_phase(physical[q], duration)?;
                ops.push(Op::Site(sites.len()));
                sites.push((SiteKind::Relax(q), pa));
                ops.push(Op::Site(sites.len()));
                sites.push((SiteKind::Dephase(q), pp));
            }
            layers.push((bound, duration));
        }
        let mut readout = vec![0.0; n_clbits];
        for &(q, c) in &measured {
            readout[c] = calib.omega[physical[q]];
        }
        let mut site_op = vec![0; sites.len()];
        for (i, op) in ops.iter().enumerate() {
            if let Op::Site(sid) = op {
                site_op[*sid] = i;
            }
        }
        Ok(NoisyProgram { n, physical, layers, ops, sites, site_op, measured, n_clbits, readout })
    }

    pub fn n_clbits(&self) -> usize {
        self.n_clbits
    }

    fn clbit_index(&self, k: usize) -> usize {
        self.measured.iter().fold(0, |acc, &(q, c)| acc | ((k >> q) & 1) << c)
    }

    fn marginal(&self, state: &StateVector) -> Vec<f64> {
        let mut out = vec![0.0; 1 << self.n_clbits];
        for (k, p) in state.probabilities().into_iter().enumerate() {
            out[self.clbit_index(k)] += p;
        }
        out
    }

    /// One trajectory per shot using the per-step channel functions; the reference
    /// against which the batched sampler is checked.
    pub fn run_per_shot<R: Rng + ?Sized>(&self, calib: &CalibrationSnapshot, shots: u64, rng: &mut R) -> Result<Counts> {
        let mut counts = Counts::new(self.n_clbits);
        for _ in 0..shots {
            let mut s = StateVector::zero(self.n)?;
            for (gates, duration) in &self.layers {
                for g in gates {
                    s.apply(g, None)?;
                    apply_gate_noise(&mut s, g, calib, &self.physical, rng)?;
                }
                for q in 0..self.n {
                    apply_idle_decay(&mut s, q, self.physical[q], *duration, calib, rng)?;
                }
            }
            let probs = self.marginal(&s);
            let draw = multinomial(rng, 1, &probs);
            let bits = draw.iter().position(|&c| c == 1).unwrap_or(0) as u64;
            counts.add(apply_readout_error(bits, &self.readout, rng), 1);
        }
        Ok(counts)
    }

    /// Shot-batched trajectories: every noise site fires on a Binomial(shots, p)
    /// subset of shots, shots with identical event lists share one simulation, and
    /// relaxation events split their group binomially by outcome.
    pub fn run<R: Rng + ?Sized>(&self, shots: u64, rng: &mut R) -> Result<Counts> {
        if shots == 0 {
            return Err(Error::ZeroShots);
        }
        let mut per_shot: BTreeMap<usize, Vec<(u32, u8)>> = BTreeMap::new();
        for (sid, &(kind, p)) in self.sites.iter().enumerate() {
            let hits = binomial(rng, shots, p);
            if hits == 0 {
                continue;
            }
            for shot in index::sample(rng, shots as usize, hits as usize).into_iter() {
                let variant = match kind {
                    SiteKind::Pauli(_) => rng.random_range(1..=3u8),
                    _ => 0,
                };
                per_shot.entry(shot).or_default().push((sid as u32, variant));
            }
        }
        let mut groups: BTreeMap<Vec<(u32, u8)>, u64> = BTreeMap::new();
        let clean = shots - per_shot.len() as u64;
        if clean > 0 {
            groups.insert(Vec::new(), clean);
        }
        for (_, mut events) in per_shot {
            events.sort_unstable();
            *groups.entry(events).or_insert(0) += 1;
        }
        // noiseless state before each op, so a group starts at its first event
        let mut prefix = Vec::with_capacity(self.ops.len() + 1);
        let mut s = StateVector::zero(self.n)?;
        for op in &self.ops {
            prefix.push(s.clone());
            match op {
                Op::Gate(g) => s.apply(g, None)?,
                Op::Matrix(q, m) => s.apply_matrix(*q, m),
                Op::Site(_) => {}
            }
        }
        prefix.push(s);
        let mut raw = vec![0u64; 1 << self.n_clbits];
        for (events, count) in &groups {
            let start = events.first().map_or(self.ops.len(), |e| self.site_op[e.0 as usize]);
            self.walk(prefix[start].clone(), start, events, 0, *count, &mut raw, rng)?;
        }
        Ok(self.readout_split(raw, rng))
    }

    #[allow(clippy::too_many_arguments)]
    fn walk<R: Rng + ?Sized>(
        &self,
        mut s: StateVector,
        mut op: usize,
        events: &[(u32, u8)],
        mut cursor: usize,
        count: u64,
        raw: &mut [u64],
        rng: &mut R,
    ) -> Result<()> {
        while op < self.ops.len() {
            match self.ops[op] {
                Op::Gate(g) => s.apply(&g, None)?,
                Op::Matrix(q, ref m) => s.apply_matrix(q, m),
                Op::Site(sid) => {
                    if cursor < events.len() && events[cursor].0 as usize == sid {
                        let variant = events[cursor].1;
                        cursor += 1;
                        match self.sites[sid].0 {
                            SiteKind::Pauli(q) => apply_pauli(&mut s, q, variant),
                            SiteKind::Dephase(q) => s.apply_z(q),
                            SiteKind::Relax(q) => {
                                let p1 = s.prob_one(q);
                                let k1 = binomial(rng, count, p1.clamp(0.0, 1.0));
                                if k1 > 0 {
                                    let mut up = s.clone();
                                    up.project(q, true);
                                    up.apply_x(q);
                                    self.walk(up, op + 1, events, cursor, k1, raw, rng)?;
                                }
                                if count - k1 == 0 {
                                    return Ok(());
                                }
                                s.project(q, false);
                                return self.walk(s, op + 1, events, cursor, count - k1, raw, rng);
                            }
                        }
                    }
                }
            }
            op += 1;
        }
        let draws = multinomial(rng, count, &self.marginal(&s));
        for (k, c) in draws.into_iter().enumerate() {
            raw[k] += c;
        }
        Ok(())
    }

    /// Symmetric readout flips applied to a histogram by splitting each outcome's
    /// shots bit by bit.
    fn readout_split<R: Rng + ?Sized>(&self, raw: Vec<u64>, rng: &mut R) -> Counts {
        let mut cur: BTreeMap<u64, u64> =
            raw.into_iter().enumerate().filter(|(_, c)| *c > 0).map(|(k, c)| (k as u64, c)).collect();
        for (bit, &w) in self.readout.iter().enumerate() {
            if w <= 0.0 {
                continue;
            }
            let mut next: BTreeMap<u64, u64> = BTreeMap::new();
            for (k, c) in cur {
                let flips = binomial(rng, c, w);
                if c - flips > 0 {
                    *next.entry(k).or_insert(0) += c - flips;
                }
                if flips > 0 {
                    *next.entry(k ^ (1 << bit)).or_insert(0) += flips;
                }
            }
            cur = next;
        }
        let mut counts = Counts::new(self.n_clbits);
        for (k, c) in cur {
            counts.add(k, c);
        }
        counts
    }

    /// Compact circuit without noise sites, angles bound.
    pub fn ideal_circuit(&self) -> Result<Circuit> {
        let mut c = Circuit::new(self.n);
        for (gates, _) in &self.layers {
            for g in gates {
                c.push(*g)?;
            }
        }
        Ok(c)
    }

    pub(crate) fn layers(&self) -> &[(Vec<Gate>, f64)] {
        &self.layers
    }

    pub(crate) fn physical(&self) -> &[usize] {
        &self.physical
    }

    pub(crate) fn measured(&self) -> &[(usize, usize)] {
        &self.measured
    }

    pub(crate) fn readout(&self) -> &[f64] {
        &self.readout
    }

    pub(crate) fn n_qubits(&self) -> usize {
        self.n
    }
}

/// Noisy execution of a transpiled circuit: gate depolarization, per-layer
/// relaxation/dephasing, then readout flips. Counts are over logical classical bits.
pub fn run_noisy<R: Rng + ?Sized>(
    tc: &TranspiledCircuit,
    bindings: &Bindings<'_>,
    calib: &CalibrationSnapshot,
    shots: u64,
    rng: &mut R,
) -> Result<Counts> {
    NoisyProgram::build(tc, bindings, calib)?.run(shots, rng)
}
