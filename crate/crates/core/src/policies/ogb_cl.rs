use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{HitOutcome, Policy, RunConfig};
use crate::projection::exact_projection;
use crate::sampling::systematic_sample;
use crate::trace::Trace;
use crate::{Error, Result};

/// Classic batched online gradient ascent on a dense state: the batch's
/// accumulated gradient is added once every `B` requests and the result is
/// projected exactly. The integral cache is redrawn by systematic sampling
/// at each batch boundary. Reference implementation, `O(N log N)` per batch.
#[derive(Debug, Clone)]
pub struct OgbCl {
    f: Vec<f64>,
    capacity: f64,
    counts: Vec<u32>,
    touched: Vec<u32>,
    cached: Vec<bool>,
    occupancy: usize,
    eta: f64,
    batch: u64,
    horizon: u64,
    t: u64,
    rng: ChaCha8Rng,
}

impl OgbCl {
    pub fn new(config: &RunConfig) -> Result<Self> {
        config.validate()?;
        let n = config.n;
        let capacity = config.capacity;
        let mut policy = Self {
            f: vec![capacity / n as f64; n],
            capacity,
            counts: vec![0; n],
            touched: Vec::new(),
            cached: vec![false; n],
            occupancy: 0,
            eta: config.resolved_eta()?,
            batch: config.batch,
            horizon: config.horizon,
            t: 0,
            rng: ChaCha8Rng::seed_from_u64(config.seeds.sampler),
        };
        policy.resample()?;
        Ok(policy)
    }

    pub fn state(&self) -> &[f64] {
        &self.f
    }

    fn resample(&mut self) -> Result<()> {
        let u: f64 = self.rng.random();
        let chosen = systematic_sample(&self.f, self.capacity, u)?;
        self.cached.iter_mut().for_each(|c| *c = false);
        for &id in &chosen {
            self.cached[id as usize] = true;
        }
        self.occupancy = chosen.len();
        Ok(())
    }

    pub fn step(&mut self, j: usize) -> Result<HitOutcome> {
        if self.t >= self.horizon {
            return Err(Error::HorizonExceeded { horizon: self.horizon });
        }
        if j >= self.f.len() {
            return Err(Error::ItemOutOfRange { item: j, n: self.f.len() });
        }
        let outcome = HitOutcome { t: self.t, hit: self.cached[j], reward: self.f[j] };
        if self.counts[j] == 0 {
            self.touched.push(j as u32);
        }
        self.counts[j] += 1;
        self.t += 1;
        if self.t.is_multiple_of(self.batch) {
            let mut y = self.f.clone();
            for &id in &self.touched {
                y[id as usize] += self.eta * self.counts[id as usize] as f64;
                self.counts[id as usize] = 0;
            }
            self.touched.clear();
            self.f = exact_projection(&y, self.capacity)?;
            self.resample()?;
        }
        Ok(outcome)
    }
}

impl Policy for OgbCl {
    fn name(&self) -> &'static str {
        "ogb-cl"
    }

    fn request(&mut self, item: usize) -> Result<HitOutcome> {
        self.step(item)
    }

    fn occupancy(&self) -> usize {
        self.occupancy
    }
}

/// Per-step output of [`ogb_cl_run`].
#[derive(Debug, Clone, PartialEq)]
pub struct OgbClRun {
    pub rewards: Vec<f64>,
    pub hits: Vec<bool>,
    pub final_state: Vec<f64>,
}

/// Runs [`OgbCl`] over a whole trace.
pub fn ogb_cl_run(trace: &Trace, config: &RunConfig) -> Result<OgbClRun> {
    let mut policy = OgbCl::new(config)?;
    let mut rewards = Vec::with_capacity(trace.len());
    let mut hits = Vec::with_capacity(trace.len());
    for &r in trace.requests() {
        let o = policy.step(r as usize)?;
        rewards.push(o.reward);
        hits.push(o.hit);
    }
    Ok(OgbClRun { rewards, hits, final_state: policy.f })
}
