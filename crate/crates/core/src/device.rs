//! Virtual devices: profile documents, calibration drift, and the job latency model.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::{run_noisy, CalibrationSnapshot};
use crate::sampling::{derive_seed, rng_for};
use crate::sim::{Bindings, Counts, GateKind};
use crate::transpiler::{Basis, CouplingMap, TranspiledCircuit, REQUIRED_BASIS};

pub const PROFILE_SCHEMA_VERSION: u32 = 1;

/// Which calibration parameters degrade between calibrations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DriftTarget {
    Gamma,
    Beta,
    Omega,
}

/// Linear multiplicative degradation with time since calibration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriftModel {
    pub rate_per_hour: f64,
    pub affected: BTreeSet<DriftTarget>,
}

impl DriftModel {
    pub fn none() -> Self {
        DriftModel { rate_per_hour: 0.0, affected: BTreeSet::new() }
    }

    pub fn factor(&self, staleness_s: f64) -> f64 {
        1.0 + self.rate_per_hour * staleness_s / 3600.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatencyModel {
    pub queue_wait_s: f64,
    pub jitter_s: f64,
    pub exec_per_shot_s: f64,
}

impl LatencyModel {
    pub fn zero() -> Self {
        LatencyModel { queue_wait_s: 0.0, jitter_s: 0.0, exec_per_shot_s: 0.0 }
    }

    /// Queue wait drawn uniformly from `mean ± jitter`, floored at zero.
    pub fn sample_wait<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.jitter_s <= 0.0 {
            return self.queue_wait_s;
        }
        (self.queue_wait_s + rng.random_range(-self.jitter_s..=self.jitter_s)).max(0.0)
    }
}

/// Optional descriptive fields carried through but never used in computation.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileMetadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub processor: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topology: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quantum_volume: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anharmonicity_ghz: Option<Vec<f64>>,
}

/// On-disk device profile.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileDocument {
    #[serde(default = "default_schema")]
    pub schema_version: u32,
    pub name: String,
    pub n_qubits: usize,
    pub coupling: Vec<[usize; 2]>,
    pub basis_gates: Vec<String>,
    pub gamma: BTreeMap<String, f64>,
    pub beta: BTreeMap<String, f64>,
    pub omega: Vec<f64>,
    pub t1_us: Vec<f64>,
    pub t2_us: Vec<f64>,
    pub gate_time_1q_ns: f64,
    pub gate_time_2q_ns: f64,
    pub calibration_period_s: f64,
    pub drift: DriftModel,
    pub latency: LatencyModel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<ProfileMetadata>,
}

fn default_schema() -> u32 {
    PROFILE_SCHEMA_VERSION
}

/// One validated virtual QPU.
#[derive(Clone, Debug, PartialEq)]
pub struct DeviceProfile {
    pub name: String,
    pub n_qubits: usize,
    pub coupling: CouplingMap,
    pub basis_gates: Basis,
    pub base_calibration: CalibrationSnapshot,
    pub drift: DriftModel,
    pub latency: LatencyModel,
    pub calibration_period_s: f64,
    pub metadata: Option<ProfileMetadata>,
}

fn parse_pair(key: &str) -> Result<(usize, usize)> {
    let bad = || Error::InvalidProfile(format!("beta key {key:?} is not of the form \"i-j\""));
    let (a, b) = key.split_once('-').ok_or_else(bad)?;
    let a: usize = a.trim().parse().map_err(|_| bad())?;
    let b: usize = b.trim().parse().map_err(|_| bad())?;
    Ok((a.min(b), a.max(b)))
}

fn check_nonneg(what: &str, v: f64) -> Result<()> {
    if !(v >= 0.0) || !v.is_finite() {
        return Err(Error::InvalidProfile(format!("{what} must be finite and >= 0, got {v}")));
    }
    Ok(())
}

impl DeviceProfile {
    pub fn from_document(doc: ProfileDocument) -> Result<DeviceProfile> {
        if doc.schema_version != PROFILE_SCHEMA_VERSION {
            return Err(Error::InvalidProfile(format!(
                "unsupported schema_version {}",
                doc.schema_version
            )));
        }
        let n = doc.n_qubits;
        if n == 0 {
            return Err(Error::InvalidProfile("n_qubits must be positive".into()));
        }
        let edges: Vec<(usize, usize)> = doc.coupling.iter().map(|e| (e[0], e[1])).collect();
        let coupling = CouplingMap::new(n, &edges)
            .map_err(|e| Error::InvalidProfile(format!("coupling: {e}")))?;
        if !coupling.is_connected() {
            return Err(Error::DisconnectedCoupling);
        }
        let mut basis = Basis::new();
        for g in &doc.basis_gates {
            let k = GateKind::parse(g).map_err(|_| Error::InvalidProfile(format!("unknown basis gate {g:?}")))?;
            if k == GateKind::Measure {
                return Err(Error::InvalidProfile("measure is not a basis gate".into()));
            }
            basis.insert(k);
        }
        for k in REQUIRED_BASIS {
            if !basis.contains(&k) {
                return Err(Error::InvalidProfile(format!("basis_gates lacks {}", k.name())));
            }
        }
        let mut gamma = BTreeMap::new();
        for (g, &p) in &doc.gamma {
            let k = GateKind::parse(g).map_err(|_| Error::InvalidProfile(format!("unknown gamma gate {g:?}")))?;
            if k.arity() != 1 || k == GateKind::Measure || !basis.contains(&k) {
                return Err(Error::InvalidProfile(format!("gamma key {g:?} is not a single-qubit basis gate")));
            }
            gamma.insert(k, p);
        }
        let mut beta = BTreeMap::new();
        for (key, &p) in &doc.beta {
            let pair = parse_pair(key)?;
            if !coupling.adjacent(pair.0, pair.1) {
                return Err(Error::InvalidProfile(format!("beta key {key:?} is not a coupling edge")));
            }
            beta.insert(pair, p);
        }
        if let Some(&(a, b)) = coupling.edges().iter().find(|e| !beta.contains_key(e)) {
            return Err(Error::InvalidProfile(format!("beta missing for edge {a}-{b}")));
        }
        for (what, list) in [("omega", &doc.omega), ("t1_us", &doc.t1_us), ("t2_us", &doc.t2_us)] {
            if list.len() != n {
                return Err(Error::InvalidProfile(format!("{what} has {} entries, expected {n}", list.len())));
            }
        }
        let calib = CalibrationSnapshot {
            gamma,
            beta,
            omega: doc.omega,
            t1_us: doc.t1_us,
            t2_us: doc.t2_us,
            gate_time_1q_ns: doc.gate_time_1q_ns,
            gate_time_2q_ns: doc.gate_time_2q_ns,
            calibrated_at: 0.0,
        };
        calib.validate()?;
        if !(doc.calibration_period_s > 0.0) {
            return Err(Error::InvalidProfile("calibration_period_s must be positive".into()));
        }
        check_nonneg("drift.rate_per_hour", doc.drift.rate_per_hour)?;
        check_nonneg("latency.queue_wait_s", doc.latency.queue_wait_s)?;
        check_nonneg("latency.jitter_s", doc.latency.jitter_s)?;
        check_nonneg("latency.exec_per_shot_s", doc.latency.exec_per_shot_s)?;
        Ok(DeviceProfile {
            name: doc.name,
            n_qubits: n,
            coupling,
            basis_gates: basis,
            base_calibration: calib,
            drift: doc.drift,
            latency: doc.latency,
            calibration_period_s: doc.calibration_period_s,
            metadata: doc.metadata,
        })
    }

    pub fn to_document(&self) -> ProfileDocument {
        let c = &self.base_calibration;
        ProfileDocument {
            schema_version: PROFILE_SCHEMA_VERSION,
            name: self.name.clone(),
            n_qubits: self.n_qubits,
            coupling: self.coupling.edges().iter().map(|&(a, b)| [a, b]).collect(),
            basis_gates: self.basis_gates.iter().map(|k| k.name().to_string()).collect(),
            gamma: c.gamma.iter().map(|(k, &p)| (k.name().to_string(), p)).collect(),
            beta: c.beta.iter().map(|(&(a, b), &p)| (format!("{a}-{b}"), p)).collect(),
            omega: c.omega.clone(),
            t1_us: c.t1_us.clone(),
            t2_us: c.t2_us.clone(),
            gate_time_1q_ns: c.gate_time_1q_ns,
            gate_time_2q_ns: c.gate_time_2q_ns,
            calibration_period_s: self.calibration_period_s,
            drift: self.drift.clone(),
            latency: self.latency.clone(),
            metadata: self.metadata.clone(),
        }
    }

    /// Device with uniform calibration, no drift and the given latency.
    pub fn uniform(
        name: &str,
        coupling: CouplingMap,
        calib: CalibrationSnapshot,
        latency: LatencyModel,
    ) -> Result<DeviceProfile> {
        if calib.n_qubits() != coupling.n_qubits() {
            return Err(Error::InvalidProfile("calibration size differs from coupling".into()));
        }
        calib.validate()?;
        if !coupling.is_connected() {
            return Err(Error::DisconnectedCoupling);
        }
        let mut calib = calib;
        let edges: BTreeSet<(usize, usize)> = coupling.edges().iter().copied().collect();
        calib.beta.retain(|k, _| edges.contains(k));
        Ok(DeviceProfile {
            name: name.into(),
            n_qubits: coupling.n_qubits(),
            coupling,
            basis_gates: crate::transpiler::default_basis(),
            base_calibration: calib,
            drift: DriftModel::none(),
            latency,
            calibration_period_s: 86_400.0,
            metadata: None,
        })
    }

    /// Noiseless, zero-latency, fully connected device.
    pub fn ideal(name: &str, n_qubits: usize) -> DeviceProfile {
        DeviceProfile::uniform(
            name,
            CouplingMap::full(n_qubits),
            CalibrationSnapshot::noiseless(n_qubits),
            LatencyModel::zero(),
        )
        .expect("ideal profile is valid")
    }

    /// Calibration in effect at virtual time `now`, with drift applied.
    pub fn current_calibration(&self, now: f64) -> CalibrationSnapshot {
        let now = now.max(0.0);
        let s = now % self.calibration_period_s;
        let mut c = self.base_calibration.clone();
        c.calibrated_at = now - s;
        let f = self.drift.factor(s);
        if f == 1.0 {
            return c;
        }
        let scale = |p: &mut f64| *p = (*p * f).min(1.0);
        for t in &self.drift.affected {
            match t {
                DriftTarget::Gamma => c.gamma.values_mut().for_each(scale),
                DriftTarget::Beta => c.beta.values_mut().for_each(scale),
                DriftTarget::Omega => c.omega.iter_mut().for_each(scale),
            }
        }
        c
    }

    /// Reject circuits not built for this device's register, coupling and basis.
    pub fn check_layout(&self, tc: &TranspiledCircuit) -> Result<()> {
        if tc.n_physical() != self.n_qubits {
            return Err(Error::DeviceTooSmall {
                needed: tc.n_physical(),
                available: self.n_qubits,
                device: self.name.clone(),
            });
        }
        if let Some((a, b)) = tc.used_pairs().into_iter().find(|&(a, b)| !self.coupling.adjacent(a, b)) {
            return Err(Error::LayoutMismatch(a, b, self.name.clone()));
        }
        if let Some(k) = tc.kinds().into_iter().find(|k| !self.basis_gates.contains(k)) {
            return Err(Error::NotInBasis(k.name().into()));
        }
        Ok(())
    }

    /// Completion time of a job of `total_shots` submitted at `submit_time`.
    pub fn completion_time<R: Rng + ?Sized>(&self, submit_time: f64, total_shots: u64, rng: &mut R) -> f64 {
        submit_time + self.latency.sample_wait(rng) + total_shots as f64 * self.latency.exec_per_shot_s
    }

    /// Run one circuit under the calibration at `submit_time`.
    pub fn submit_job<R: Rng + ?Sized>(
        &self,
        tc: &TranspiledCircuit,
        bindings: &Bindings<'_>,
        shots: u64,
        submit_time: f64,
        rng: &mut R,
    ) -> Result<JobResult> {
        self.check_layout(tc)?;
        let calib = self.current_calibration(submit_time);
        let counts = run_noisy(tc, bindings, &calib, shots, rng)?;
        let completion_time = self.completion_time(submit_time, shots, rng);
        Ok(JobResult { counts: vec![counts], submit_time, completion_time, calibration: calib })
    }

    /// Run several circuits as one job. Circuits are simulated in parallel, each
    /// with its own generator derived from `job_seed`, so results do not depend on
    /// the thread count.
    pub fn submit_batch(
        &self,
        circuits: &[(&TranspiledCircuit, Bindings<'_>)],
        shots: u64,
        submit_time: f64,
        job_seed: u64,
    ) -> Result<JobResult> {
        for (tc, _) in circuits {
            self.check_layout(tc)?;
        }
        let calib = self.current_calibration(submit_time);
        let counts = circuits
            .par_iter()
            .enumerate()
            .map(|(i, (tc, b))| {
                let mut rng = rng_for(derive_seed(job_seed, &[i as u64]), 0);
                run_noisy(tc, b, &calib, shots, &mut rng)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut rng = rng_for(derive_seed(job_seed, &[u64::MAX]), 0);
        let completion_time = self.completion_time(submit_time, shots * circuits.len() as u64, &mut rng);
        Ok(JobResult { counts, submit_time, completion_time, calibration: calib })
    }
}

#[derive(Clone, Debug)]
pub struct JobResult {
    pub counts: Vec<Counts>,
    pub submit_time: f64,
    pub completion_time: f64,
    pub calibration: CalibrationSnapshot,
}

pub fn parse_profile(text: &str) -> Result<DeviceProfile> {
    let doc: ProfileDocument =
        serde_json::from_str(text).map_err(|e| Error::InvalidProfile(e.to_string()))?;
    DeviceProfile::from_document(doc)
}

pub fn load_profile(path: &Path) -> Result<DeviceProfile> {
    let text = fs::read_to_string(path)?;
    parse_profile(&text)
}

/// Every `*.json` profile in `dir`, sorted by device name.
pub fn fleet_from_dir(dir: &Path) -> Result<Vec<DeviceProfile>> {
    let mut paths: Vec<_> = fs::read_dir(dir)
        .map_err(|e| Error::Fleet(format!("{}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Error::Fleet(format!("no profiles in {}", dir.display())));
    }
    let mut fleet = Vec::with_capacity(paths.len());
    let mut seen = BTreeMap::new();
    for p in paths {
        let dev = load_profile(&p).map_err(|e| Error::Fleet(format!("{}: {e}", p.display())))?;
        if let Some(prev) = seen.insert(dev.name.clone(), p.clone()) {
            return Err(Error::Fleet(format!(
                "duplicate device name {:?} in {} and {}",
                dev.name,
                prev.display(),
                p.display()
            )));
        }
        fleet.push(dev);
    }
    fleet.sort_by(|a, b| a.name.cmp(&b.name));
    Ok(fleet)
}
