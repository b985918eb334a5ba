use std::time::Instant;

use crate::fem::Model;

use super::plan::{BlockPlan, Subdomain};
use super::{checked_dt, BlockedError};

const REPETITIONS: usize = 2;
/// Smallest mean block size (elements) among default candidates.
const MIN_BLOCK_ELEMENTS: usize = 64;

/// Measured trial time of each candidate block count.
#[derive(Debug, Clone, PartialEq)]
pub struct TuneReport {
    pub candidates: Vec<usize>,
    /// Best-of-two wall time (s) of the trial steps, per candidate.
    pub seconds: Vec<f64>,
    pub chosen: usize,
    /// Wall time spent tuning, plan construction included.
    pub tuning_seconds: f64,
}

impl TuneReport {
    /// Picks the fastest candidate; the first one wins ties.
    pub fn from_timings(candidates: Vec<usize>, seconds: Vec<f64>, tuning_seconds: f64) -> Result<Self, BlockedError> {
        if candidates.is_empty() || candidates.len() != seconds.len() {
            return Err(BlockedError::NoCandidates);
        }
        let mut best = 0;
        for i in 1..seconds.len() {
            if seconds[i] < seconds[best] {
                best = i;
            }
        }
        Ok(TuneReport { chosen: candidates[best], candidates, seconds, tuning_seconds })
    }

    /// Tuning time as a fraction of a projected run of `steps` steps at the
    /// chosen count's per-step time.
    pub fn overhead_fraction(&self, trial_steps: u64, steps: u64) -> f64 {
        let i = self.candidates.iter().position(|&c| c == self.chosen).unwrap_or(0);
        let projected = self.seconds[i] / trial_steps.max(1) as f64 * steps as f64;
        self.tuning_seconds / (projected + self.tuning_seconds)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("blocks,seconds\n");
        for (b, s) in self.candidates.iter().zip(&self.seconds) {
            out.push_str(&format!("{b},{s:.6e}\n"));
        }
        out
    }
}

/// `1, 2, 4, …` while the mean block keeps at least 64 elements.
pub fn default_candidates(elements: usize) -> Vec<usize> {
    let mut out = vec![1];
    let mut b = 2;
    while elements / b >= MIN_BLOCK_ELEMENTS {
        out.push(b);
        b *= 2;
    }
    out
}

/// Times `trial_steps` local blocked steps per candidate on copies of the
/// subdomain state `(t, h)`. Nothing is exchanged with other subdomains.
pub fn autotune_block_count(
    model: &Model,
    sub: &Subdomain,
    t: &[f64],
    h: &[f64],
    time: f64,
    candidates: &[usize],
    trial_steps: u64,
) -> Result<TuneReport, BlockedError> {
    if candidates.is_empty() {
        return Err(BlockedError::NoCandidates);
    }
    let start = Instant::now();
    let safety = model.config().safety;
    let mut seconds = Vec::with_capacity(candidates.len());
    for &b in candidates {
        let plan = BlockPlan::partitioned(model, sub.clone(), b)?;
        let mut ws = plan.workspace();
        let mut best = f64::INFINITY;
        for _ in 0..REPETITIONS {
            let (mut tt, mut hh) = (t.to_vec(), h.to_vec());
            let mut now = time;
            let clock = Instant::now();
            for _ in 0..trial_steps {
                let bound = plan.assemble(&mut ws, &tt, &hh, now)?;
                let dt = checked_dt(safety * bound)?;
                now += dt;
                plan.update(&ws, &mut tt, &mut hh, dt, now)?;
            }
            best = best.min(clock.elapsed().as_secs_f64());
        }
        seconds.push(best);
    }
    TuneReport::from_timings(candidates.to_vec(), seconds, start.elapsed().as_secs_f64())
}

/// `t_reference / t_blocked`.
pub fn improvement_factor(t_reference: f64, t_blocked: f64) -> Result<f64, BlockedError> {
    if !(t_reference > 0.0 && t_blocked > 0.0) {
        return Err(BlockedError::NonPositiveTime(t_reference, t_blocked));
    }
    Ok(t_reference / t_blocked)
}
