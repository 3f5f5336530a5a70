use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use std::sync::mpsc;
use std::sync::Arc;
use std::thread;

use rand::Rng;

use crate::device::DeviceProfile;
use crate::ensemble::client::Client;
use crate::ensemble::history::{DeviceStats, TrainingHistory};
use crate::ensemble::master::MasterState;
use crate::ensemble::{GradientReport, Mode, TaskAssignment, TrainingConfig};
use crate::error::{Error, Result};
use crate::fidelity::normalize_weights;
use crate::sampling::{derive_seed, rng_for};
use crate::vqa::Problem;

const INIT_STREAM: u64 = 0x1A17;

fn initial_params(problem: &Problem, cfg: &TrainingConfig) -> Result<Vec<f64>> {
    if let Some(p) = &cfg.initial_params {
        if p.len() != problem.n_params() {
            return Err(Error::LengthMismatch { expected: problem.n_params(), got: p.len() });
        }
        return Ok(p.clone());
    }
    let mut rng = rng_for(derive_seed(cfg.seed, &[INIT_STREAM]), 0);
    let s = cfg.init_scale;
    Ok((0..problem.n_params())
        .map(|_| if s > 0.0 { rng.random_range(-s..s) } else { 0.0 })
        .collect())
}

fn build_clients(problem: &Problem, fleet: &[DeviceProfile]) -> Result<Vec<Client>> {
    if fleet.is_empty() {
        return Err(Error::Fleet("fleet is empty".into()));
    }
    let mut names = BTreeSet::new();
    for d in fleet {
        if !names.insert(d.name.as_str()) {
            return Err(Error::Fleet(format!("duplicate device name {:?}", d.name)));
        }
    }
    let mut clients = fleet
        .iter()
        .map(|d| Client::new(d.clone(), problem))
        .collect::<Result<Vec<_>>>()?;
    clients.sort_by(|a, b| a.name().cmp(b.name()));
    Ok(clients)
}

/// Completion event ordered by time, then device name.
struct Event {
    time: f64,
    client: usize,
    name: String,
    shots: u64,
    report: GradientReport,
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Event {}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Event {
    // reversed: BinaryHeap pops the earliest event
    fn cmp(&self, other: &Self) -> Ordering {
        other.time.total_cmp(&self.time).then_with(|| other.name.cmp(&self.name))
    }
}

struct Ledger {
    stats: BTreeMap<String, DeviceStats>,
    makespan: f64,
}

impl Ledger {
    fn new(clients: &[Client]) -> Ledger {
        Ledger {
            stats: clients.iter().map(|c| (c.name().to_string(), DeviceStats::default())).collect(),
            makespan: 0.0,
        }
    }

    fn record(&mut self, r: &GradientReport, shots: u64) {
        let s = self.stats.entry(r.device.clone()).or_default();
        s.tasks += 1;
        s.shots += shots;
        s.busy_s += r.complete_time - r.submit_time;
        self.makespan = self.makespan.max(r.complete_time);
    }

    fn finish(mut self, problem: &Problem, master: MasterState, init: Vec<f64>) -> Result<TrainingHistory> {
        for s in self.stats.values_mut() {
            s.tasks_per_hour = (self.makespan > 0.0).then(|| s.tasks as f64 * 3600.0 / self.makespan);
        }
        Ok(TrainingHistory {
            initial_loss: problem.ideal_loss(&init)?,
            initial_params: init,
            final_params: master.params().to_vec(),
            updates: master.updates,
            epochs: master.epochs,
            devices: self.stats,
            makespan_s: self.makespan,
            reports_accepted: master.reports_accepted,
        })
    }
}

fn task_shots(problem: &Problem, task: &TaskAssignment, shots: u64) -> u64 {
    problem
        .task_circuits(task.param_index, task.term_index)
        .map_or(0, |p| 2 * p.shifts.len() as u64 * shots)
}

/// Train `problem` on `fleet` for `cfg.epochs` passes over the parameters.
pub fn run_training(problem: &Problem, fleet: &[DeviceProfile], cfg: &TrainingConfig) -> Result<TrainingHistory> {
    cfg.validate()?;
    let clients = build_clients(problem, fleet)?;
    let init = initial_params(problem, cfg)?;
    let master = MasterState::new(problem, init.clone(), cfg.epochs)?;
    match cfg.mode {
        Mode::Deterministic => run_deterministic(problem, clients, master, cfg, init),
        Mode::Concurrent => run_concurrent(problem, clients, master, cfg, init),
    }
}

fn next_or_idle(master: &mut MasterState) -> Result<Option<TaskAssignment>> {
    match master.next_task() {
        Ok(t) => Ok(Some(t)),
        Err(Error::TrainingFinished) => Ok(None),
        Err(e) => Err(e),
    }
}

fn run_deterministic(
    problem: &Problem,
    mut clients: Vec<Client>,
    mut master: MasterState,
    cfg: &TrainingConfig,
    init: Vec<f64>,
) -> Result<TrainingHistory> {
    let mut ledger = Ledger::new(&clients);
    let mut queue = BinaryHeap::new();
    let dispatch = |client: &mut Client, idx: usize, now: f64, master: &mut MasterState| -> Result<Option<Event>> {
        let Some(task) = next_or_idle(master)? else {
            return Ok(None);
        };
        let report = client.client_step(&task, problem, cfg.shots, cfg.seed, now)?;
        Ok(Some(Event {
            time: report.complete_time,
            client: idx,
            name: report.device.clone(),
            shots: task_shots(problem, &task, cfg.shots),
            report,
        }))
    };
    for (idx, client) in clients.iter_mut().enumerate() {
        if let Some(ev) = dispatch(client, idx, 0.0, &mut master)? {
            queue.push(ev);
        }
    }
    while let Some(ev) = queue.pop() {
        ledger.record(&ev.report, ev.shots);
        master.apply_update(ev.report, cfg, |p| problem.ideal_loss(p))?;
        if let Some(next) = dispatch(&mut clients[ev.client], ev.client, ev.time, &mut master)? {
            queue.push(next);
        }
    }
    debug_assert!(master.finished());
    ledger.finish(problem, master, init)
}

fn run_concurrent(
    problem: &Problem,
    clients: Vec<Client>,
    mut master: MasterState,
    cfg: &TrainingConfig,
    init: Vec<f64>,
) -> Result<TrainingHistory> {
    let mut ledger = Ledger::new(&clients);
    let problem_ref = problem;
    thread::scope(|scope| -> Result<TrainingHistory> {
        let (report_tx, report_rx) = mpsc::channel::<(usize, u64, Result<GradientReport>)>();
        let mut task_txs = Vec::with_capacity(clients.len());
        for (idx, mut client) in clients.into_iter().enumerate() {
            let (task_tx, task_rx) = mpsc::channel::<TaskAssignment>();
            task_txs.push(Some(task_tx));
            let report_tx = report_tx.clone();
            let (shots, seed) = (cfg.shots, cfg.seed);
            scope.spawn(move || {
                let mut clock = 0.0;
                for task in task_rx {
                    let report = client.client_step(&task, problem_ref, shots, seed, clock);
                    if let Ok(r) = &report {
                        clock = r.complete_time;
                    }
                    let failed = report.is_err();
                    let n = task_shots(problem_ref, &task, shots);
                    if report_tx.send((idx, n, report)).is_err() || failed {
                        break;
                    }
                }
            });
        }
        drop(report_tx);
        let mut outstanding = 0usize;
        for tx in task_txs.iter_mut() {
            match next_or_idle(&mut master)? {
                Some(task) => {
                    tx.as_ref().expect("open channel").send(task).map_err(|_| worker_lost())?;
                    outstanding += 1;
                }
                None => *tx = None,
            }
        }
        while outstanding > 0 {
            let (idx, shots, report) = report_rx.recv().map_err(|_| worker_lost())?;
            outstanding -= 1;
            let report = report?;
            ledger.record(&report, shots);
            master.apply_update(report, cfg, |p| problem.ideal_loss(p))?;
            match next_or_idle(&mut master)? {
                Some(task) => {
                    task_txs[idx].as_ref().expect("open channel").send(task).map_err(|_| worker_lost())?;
                    outstanding += 1;
                }
                None => task_txs[idx] = None,
            }
        }
        task_txs.clear();
        ledger.finish(problem, master, init)
    })
}

fn worker_lost() -> Error {
    Error::Fleet("client worker stopped unexpectedly".into())
}

/// Plain cyclic SGD on one device with every gradient applied before the next is
/// computed; the reference trace for the single-device ensemble.
pub fn synchronous_sgd(problem: &Problem, device: &DeviceProfile, cfg: &TrainingConfig) -> Result<Vec<Vec<f64>>> {
    cfg.validate()?;
    let mut client = Client::new(device.clone(), problem)?;
    let mut params = initial_params(problem, cfg)?;
    let mut trace = Vec::new();
    let mut clock = 0.0;
    let mut task_id = 0;
    let mut step = 0u64;
    for _ in 0..cfg.epochs {
        for i in 0..problem.n_params() {
            let snapshot = Arc::new(params.clone());
            let terms: Vec<Option<usize>> = match problem.kind {
                crate::vqa::ProblemKind::Vqe => (0..problem.tasks_per_step()).map(Some).collect(),
                crate::vqa::ProblemKind::Qaoa => vec![None],
            };
            let mut g = 0.0;
            let mut p_of = Vec::new();
            for term in terms {
                let task = TaskAssignment {
                    task_id,
                    step_id: step,
                    param_index: i,
                    term_index: term,
                    params_snapshot: snapshot.clone(),
                    issue_step: step,
                };
                task_id += 1;
                let r = client.client_step(&task, problem, cfg.shots, cfg.seed, clock)?;
                clock = r.complete_time;
                g += r.value;
                p_of.push(r.p_correct);
            }
            if let Some(c) = cfg.gradient_clip {
                g = g.clamp(-c, c);
            }
            let last = BTreeMap::from([(device.name.clone(), *p_of.last().expect("one task"))]);
            let w = normalize_weights(&last, &cfg.weighting)?[&device.name];
            params[i] -= w * cfg.learning_rate * g;
            trace.push(params.clone());
            step += 1;
        }
    }
    Ok(trace)
}
