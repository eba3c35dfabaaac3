//! Drives a policy over a trace and logs what happened at every request.

use alloc::vec::Vec;

use crate::policies::{Mode, Policy};
use crate::trace::Trace;
use crate::Result;

/// Per-request log of a run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunLog {
    pub hits: Vec<bool>,
    pub rewards: Vec<f64>,
    /// Items zeroed by the probability update of each request.
    pub removals: Vec<u32>,
    /// Integral cache size after each request.
    pub occupancy: Vec<u32>,
}

impl RunLog {
    pub fn len(&self) -> usize {
        self.hits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hits.is_empty()
    }

    /// Reward per request under `mode`: the hit indicator or the fraction held.
    pub fn rewards_for(&self, mode: Mode) -> Vec<f64> {
        match mode {
            Mode::Integral => self.hits.iter().map(|&h| if h { 1.0 } else { 0.0 }).collect(),
            Mode::Fractional => self.rewards.clone(),
        }
    }

    pub fn hit_count(&self) -> u64 {
        self.hits.iter().filter(|&&h| h).count() as u64
    }

    pub fn hit_ratio(&self, mode: Mode) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        let total: f64 = match mode {
            Mode::Integral => self.hit_count() as f64,
            Mode::Fractional => self.rewards.iter().sum(),
        };
        total / self.len() as f64
    }

    /// `(t, occupancy)` every `every` requests, `t` counted from 1.
    pub fn occupancy_samples(&self, every: usize) -> Vec<(u64, u32)> {
        let every = every.max(1);
        self.occupancy
            .iter()
            .enumerate()
            .filter(|(k, _)| (k + 1) % every == 0)
            .map(|(k, &o)| ((k + 1) as u64, o))
            .collect()
    }
}

/// Occupancy sampling period: `max(1, T / 10^4)`.
pub fn occupancy_interval(horizon: usize) -> usize {
    (horizon / 10_000).max(1)
}

pub fn run_policy(policy: &mut dyn Policy, trace: &Trace) -> Result<RunLog> {
    let t = trace.len();
    let mut log = RunLog {
        hits: Vec::with_capacity(t),
        rewards: Vec::with_capacity(t),
        removals: Vec::with_capacity(t),
        occupancy: Vec::with_capacity(t),
    };
    for &r in trace.requests() {
        let o = policy.request(r as usize)?;
        log.hits.push(o.hit);
        log.rewards.push(o.reward);
        log.removals.push(policy.removals_last() as u32);
        log.occupancy.push(policy.occupancy() as u32);
    }
    Ok(log)
}
