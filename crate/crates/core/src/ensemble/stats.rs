use std::collections::BTreeMap;

use serde::Serialize;

use crate::ensemble::TrainingHistory;
use crate::error::{Error, Result};

/// Probability that a parameter fails at most `n` times in `trials` independent
/// updates, each failing with probability `p`.
pub fn failure_cdf(trials: u64, p: f64, n: u64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("failure probability {p} outside [0, 1]")));
    }
    if n > trials {
        return Err(Error::InvalidArgument(format!("n = {n} exceeds trials = {trials}")));
    }
    if n == trials || p == 0.0 {
        return Ok(1.0);
    }
    if p == 1.0 {
        return Ok(0.0);
    }
    let (lp, lq) = (p.ln(), (-p).ln_1p());
    let mut ln_pmf = trials as f64 * lq;
    let mut total = ln_pmf.exp();
    for j in 0..n {
        ln_pmf += ((trials - j) as f64).ln() - ((j + 1) as f64).ln() + lp - lq;
        total += ln_pmf.exp();
    }
    Ok(total.min(1.0))
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct StalenessAudit {
    pub max: u64,
    /// Staleness value to number of updates.
    pub histogram: BTreeMap<u64, u64>,
}

pub fn staleness_audit(history: &TrainingHistory, cap: Option<u64>) -> Result<StalenessAudit> {
    let mut audit = StalenessAudit::default();
    for u in &history.updates {
        *audit.histogram.entry(u.staleness).or_default() += 1;
        audit.max = audit.max.max(u.staleness);
    }
    match cap {
        Some(cap) if audit.max > cap => Err(Error::StalenessExceeded { observed: audit.max, cap }),
        _ => Ok(audit),
    }
}
