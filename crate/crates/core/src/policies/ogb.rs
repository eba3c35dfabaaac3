use alloc::vec;
use alloc::vec::Vec;

use super::{HitOutcome, Policy, RunConfig};
use crate::projection::{LazyState, UpdateReport};
use crate::sampling::SamplerState;
use crate::{Error, Result};

/// Online gradient policy with per-request lazy projection and batched,
/// coordinated resampling of the integral cache.
///
/// Probabilities move after every request; the integral cache only changes
/// when the request count reaches a multiple of the batch size.
#[derive(Debug, Clone)]
pub struct Ogb {
    state: LazyState,
    sampler: SamplerState,
    eta: f64,
    batch: u64,
    horizon: u64,
    t: u64,
    pending: Vec<u32>,
    pending_mark: Vec<bool>,
    last_update: UpdateReport,
}

impl Ogb {
    pub fn new(config: &RunConfig) -> Result<Self> {
        config.validate()?;
        let eta = config.resolved_eta()?;
        let state = LazyState::init_uniform(config.n, config.capacity)?;
        let sampler = SamplerState::new(&state, config.seeds.sampler);
        Ok(Self::from_parts(state, sampler, eta, config.batch, config.horizon))
    }

    /// Starts from an explicit state and sampler.
    pub fn from_parts(state: LazyState, sampler: SamplerState, eta: f64, batch: u64, horizon: u64) -> Self {
        let n = state.n();
        Self {
            state,
            sampler,
            eta,
            batch: batch.max(1),
            horizon,
            t: 0,
            pending: Vec::new(),
            pending_mark: vec![false; n],
            last_update: UpdateReport::default(),
        }
    }

    pub fn state(&self) -> &LazyState {
        &self.state
    }

    pub fn sampler(&self) -> &SamplerState {
        &self.sampler
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn last_update(&self) -> UpdateReport {
        self.last_update
    }

    /// Requests served so far.
    pub fn time(&self) -> u64 {
        self.t
    }

    /// True right after a resampling step.
    pub fn at_sync(&self) -> bool {
        self.pending.is_empty()
    }

    pub fn step(&mut self, j: usize) -> Result<HitOutcome> {
        if self.t >= self.horizon {
            return Err(Error::HorizonExceeded { horizon: self.horizon });
        }
        let hit = self.sampler.is_cached(j)?;
        let reward = self.state.effective_value(j)?;
        let outcome = HitOutcome { t: self.t, hit, reward };

        self.last_update = self.state.update_probabilities(j, self.eta)?;
        self.sampler.follow_rebase(&mut self.state);
        if !self.pending_mark[j] {
            self.pending_mark[j] = true;
            self.pending.push(j as u32);
        }
        self.t += 1;
        if self.t.is_multiple_of(self.batch) {
            self.sampler.update_sample(&self.state, &self.pending)?;
            for &id in &self.pending {
                self.pending_mark[id as usize] = false;
            }
            self.pending.clear();
        }
        Ok(outcome)
    }
}

impl Policy for Ogb {
    fn name(&self) -> &'static str {
        "ogb"
    }

    fn request(&mut self, item: usize) -> Result<HitOutcome> {
        self.step(item)
    }

    fn occupancy(&self) -> usize {
        self.sampler.occupancy()
    }

    fn removals_last(&self) -> usize {
        self.last_update.zeroed
    }
}
