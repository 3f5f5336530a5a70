use crate::device::DeviceProfile;
use crate::ensemble::{GradientReport, TaskAssignment};
use crate::error::{Error, Result};
use crate::fidelity::p_correct;
use crate::sampling::{derive_seed, label_hash};
use crate::sim::{Bindings, Counts};
use crate::transpiler::{transpile, TranspiledCircuit};
use crate::vqa::Problem;

/// One device and its circuits, transpiled once at start-up.
#[derive(Clone, Debug)]
pub struct Client {
    pub device: DeviceProfile,
    /// One per problem measurement circuit.
    pub templates: Vec<TranspiledCircuit>,
    jobs: u64,
}

impl Client {
    pub fn new(device: DeviceProfile, problem: &Problem) -> Result<Client> {
        if device.n_qubits < problem.n_qubits() {
            return Err(Error::DeviceTooSmall {
                needed: problem.n_qubits(),
                available: device.n_qubits,
                device: device.name.clone(),
            });
        }
        let templates = problem
            .measurement_circuits
            .iter()
            .map(|c| transpile(c, &device))
            .collect::<Result<Vec<_>>>()?;
        Ok(Client { device, templates, jobs: 0 })
    }

    pub fn name(&self) -> &str {
        &self.device.name
    }

    pub fn jobs_submitted(&self) -> u64 {
        self.jobs
    }

    /// Seed of this client's next job under the run seed.
    fn next_job_seed(&mut self, seed: u64) -> u64 {
        let s = derive_seed(seed, &[label_hash(&self.device.name), self.jobs]);
        self.jobs += 1;
        s
    }

    /// Run the forward and backward shifted circuits of `task` as one job
    /// submitted at `submit_time` and turn the histograms into a gradient report.
    pub fn client_step(
        &mut self,
        task: &TaskAssignment,
        problem: &Problem,
        shots: u64,
        seed: u64,
        submit_time: f64,
    ) -> Result<GradientReport> {
        let plan = problem.task_circuits(task.param_index, task.term_index)?;
        let job_seed = self.next_job_seed(seed);
        let tc = &self.templates[plan.circuit];
        let params = task.params_snapshot.as_slice();
        let mut jobs = Vec::with_capacity(2 * plan.shifts.len());
        for (fwd, bck) in &plan.shifts {
            debug_assert!(fwd != bck, "forward and backward bindings coincide");
            jobs.push((tc, Bindings::with_shift(params, *fwd)));
            jobs.push((tc, Bindings::with_shift(params, *bck)));
        }
        let result = self.device.submit_batch(&jobs, shots, submit_time, job_seed)?;
        let (fwd, bck): (Vec<Counts>, Vec<Counts>) = {
            let mut f = Vec::new();
            let mut b = Vec::new();
            for (i, c) in result.counts.into_iter().enumerate() {
                if i % 2 == 0 {
                    f.push(c);
                } else {
                    b.push(c);
                }
            }
            (f, b)
        };
        let value = problem.gradient(task.term_index, &fwd, &bck)?;
        let p = p_correct(tc, &result.calibration)?;
        Ok(GradientReport {
            task_id: task.task_id,
            step_id: task.step_id,
            param_index: task.param_index,
            term_index: task.term_index,
            value,
            p_correct: p,
            device: self.device.name.clone(),
            issue_step: task.issue_step,
            apply_step: None,
            submit_time,
            complete_time: result.completion_time,
        })
    }
}
