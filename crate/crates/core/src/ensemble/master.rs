use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::ensemble::history::{checksum, EpochRecord, UpdateRecord};
use crate::ensemble::{GradientReport, TaskAssignment, TrainingConfig};
use crate::error::{Error, Result};
use crate::fidelity::normalize_weights;
use crate::vqa::{Problem, ProblemKind};

#[derive(Clone, Debug)]
struct PendingStep {
    param: usize,
    expected: usize,
    issued: usize,
    reports: BTreeMap<Option<usize>, GradientReport>,
}

/// Single writer of parameters, weights and history.
#[derive(Clone, Debug)]
pub struct MasterState {
    params: Vec<f64>,
    epochs_end: u64,
    stopped: bool,
    /// Issue-side epoch: completed wraps of the cursor.
    epoch: u64,
    cursor: usize,
    next_term: usize,
    next_step: u64,
    next_task: u64,
    updates_applied: u64,
    kind: ProblemKind,
    terms: usize,
    pending: BTreeMap<u64, PendingStep>,
    applied_steps: BTreeSet<u64>,
    latest_p: BTreeMap<String, f64>,
    weight_table: BTreeMap<String, f64>,
    pub(crate) updates: Vec<UpdateRecord>,
    pub(crate) epochs: Vec<EpochRecord>,
    pub(crate) reports_accepted: u64,
}

impl MasterState {
    pub fn new(problem: &Problem, initial_params: Vec<f64>, epochs_end: u64) -> Result<MasterState> {
        if initial_params.len() != problem.n_params() {
            return Err(Error::LengthMismatch { expected: problem.n_params(), got: initial_params.len() });
        }
        if problem.n_params() == 0 {
            return Err(Error::InvalidArgument("problem has no parameters".into()));
        }
        Ok(MasterState {
            params: initial_params,
            epochs_end,
            stopped: false,
            epoch: 0,
            cursor: 0,
            next_term: 0,
            next_step: 0,
            next_task: 0,
            updates_applied: 0,
            kind: problem.kind,
            terms: problem.tasks_per_step(),
            pending: BTreeMap::new(),
            applied_steps: BTreeSet::new(),
            latest_p: BTreeMap::new(),
            weight_table: BTreeMap::new(),
            updates: Vec::new(),
            epochs: Vec::new(),
            reports_accepted: 0,
        })
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn epoch(&self) -> u64 {
        self.epoch
    }

    pub fn cursor(&self) -> usize {
        self.cursor
    }

    pub fn updates_applied(&self) -> u64 {
        self.updates_applied
    }

    pub fn weight_table(&self) -> &BTreeMap<String, f64> {
        &self.weight_table
    }

    /// True once every step has been issued and applied.
    pub fn finished(&self) -> bool {
        (self.epoch >= self.epochs_end || self.stopped) && self.pending.is_empty()
    }

    /// True once an early-stop target was reached.
    pub fn stopped(&self) -> bool {
        self.stopped
    }

    pub fn outstanding_steps(&self) -> usize {
        self.pending.len()
    }

    /// Next task in cyclic order: every term of the cursor parameter, then the next
    /// parameter; the epoch counter advances when the cursor wraps.
    pub fn next_task(&mut self) -> Result<TaskAssignment> {
        if self.epoch >= self.epochs_end || (self.stopped && self.next_term == 0) {
            return Err(Error::TrainingFinished);
        }
        let n = self.params.len();
        let step_id = self.next_step;
        let term_index = match self.kind {
            ProblemKind::Vqe => Some(self.next_term),
            ProblemKind::Qaoa => None,
        };
        let pending = self.pending.entry(step_id).or_insert_with(|| PendingStep {
            param: self.cursor,
            expected: self.terms,
            issued: 0,
            reports: BTreeMap::new(),
        });
        pending.issued += 1;
        let task = TaskAssignment {
            task_id: self.next_task,
            step_id,
            param_index: self.cursor,
            term_index,
            params_snapshot: Arc::new(self.params.clone()),
            issue_step: self.updates_applied,
        };
        self.next_task += 1;
        self.next_term += 1;
        if self.next_term >= self.terms {
            self.next_term = 0;
            self.next_step += 1;
            self.cursor += 1;
            if self.cursor >= n {
                self.cursor = 0;
                self.epoch += 1;
            }
        }
        Ok(task)
    }

    fn refresh_weights(&mut self, cfg: &TrainingConfig) -> Result<()> {
        self.weight_table = normalize_weights(&self.latest_p, &cfg.weighting)?;
        Ok(())
    }

    /// Record a report; once its parameter step is complete, apply
    /// `θ_i ← θ_i − w·α·g` and return the update.
    pub fn apply_update(
        &mut self,
        mut report: GradientReport,
        cfg: &TrainingConfig,
        ideal_loss: impl Fn(&[f64]) -> Result<f64>,
    ) -> Result<Option<UpdateRecord>> {
        let dup = Error::DuplicateReport { step: report.step_id, term: report.term_index };
        if self.applied_steps.contains(&report.step_id) {
            return Err(dup);
        }
        let step = self
            .pending
            .get_mut(&report.step_id)
            .ok_or_else(|| Error::InvalidArgument(format!("report for unknown step {}", report.step_id)))?;
        if report.param_index != step.param {
            return Err(Error::InvalidArgument(format!(
                "report for step {} names parameter {}, expected {}",
                report.step_id, report.param_index, step.param
            )));
        }
        if step.reports.contains_key(&report.term_index) {
            return Err(dup);
        }
        if !report.value.is_finite() || !(0.0..=1.0).contains(&report.p_correct) {
            return Err(Error::InvalidArgument(format!("malformed report from {}", report.device)));
        }
        self.reports_accepted += 1;
        self.latest_p.insert(report.device.clone(), report.p_correct);
        report.apply_step = Some(self.updates_applied);
        let step_id = report.step_id;
        step.reports.insert(report.term_index, report);
        if step.reports.len() < step.expected || step.issued < step.expected {
            return Ok(None);
        }
        let step = self.pending.remove(&step_id).expect("pending step");
        self.applied_steps.insert(step_id);
        self.refresh_weights(cfg)?;

        let reports: Vec<&GradientReport> = step.reports.values().collect();
        let mut g: f64 = reports.iter().map(|r| r.value).sum();
        if let Some(c) = cfg.gradient_clip {
            g = g.clamp(-c, c);
        }
        let p_sum: f64 = reports.iter().map(|r| r.p_correct).sum();
        let weight_of = |r: &GradientReport| self.weight_table.get(&r.device).copied().unwrap_or(1.0);
        let weight = if p_sum > 0.0 {
            reports.iter().map(|r| r.p_correct * weight_of(r)).sum::<f64>() / p_sum
        } else {
            reports.iter().map(|r| weight_of(r)).sum::<f64>() / reports.len() as f64
        };
        let p_mean = p_sum / reports.len() as f64;
        let tau = reports.iter().map(|r| r.issue_step).min().unwrap_or(self.updates_applied);
        let devices: BTreeSet<&str> = reports.iter().map(|r| r.device.as_str()).collect();
        let time = reports.iter().map(|r| r.complete_time).fold(0.0, f64::max);

        self.params[step.param] -= weight * cfg.learning_rate * g;
        let t = self.updates_applied;
        self.updates_applied += 1;
        let loss = ideal_loss(&self.params)?;
        let n = self.params.len() as u64;
        let record = UpdateRecord {
            step: t,
            epoch: t / n,
            param_index: step.param,
            device: devices.into_iter().collect::<Vec<_>>().join("+"),
            gradient: g,
            weight,
            p_correct: p_mean,
            staleness: t - tau,
            virtual_time_s: time,
            ideal_loss: loss,
        };
        self.updates.push(record.clone());
        if self.updates_applied % n == 0 {
            self.epochs.push(EpochRecord {
                epoch: self.updates_applied / n,
                ideal_loss: loss,
                params_checksum: checksum(&self.params),
                weights: self.weight_table.clone(),
                virtual_time_s: time,
            });
            if cfg.stop_at_loss.is_some_and(|target| loss <= target) {
                self.stopped = true;
            }
        }
        Ok(Some(record))
    }
}
