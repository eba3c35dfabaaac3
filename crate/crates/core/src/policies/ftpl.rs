use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{HitOutcome, Policy};
use crate::ordered::Key;
use crate::{Error, Result};

/// Follow-the-perturbed-leader with noise drawn once: request counters start
/// at `ζ g_i` with `g_i ~ N(0, 1)` and the cache holds the `C` largest
/// counters. With `ζ = 0` this is perfect LFU.
///
/// Only the requested counter changes, and only upwards, so keeping the top
/// set ordered and comparing against its minimum is enough. Ties at the
/// boundary keep the incumbent.
#[derive(Debug, Clone)]
pub struct Ftpl {
    counters: Vec<f64>,
    in_cache: Vec<bool>,
    top: BTreeSet<(Key, u32)>,
    capacity: usize,
    zeta: f64,
    t: u64,
}

impl Ftpl {
    pub fn new(n: usize, capacity: usize, zeta: f64, seed: u64) -> Result<Self> {
        if capacity == 0 || capacity >= n {
            return Err(Error::InvalidConfig("capacity must satisfy 0 < C < N"));
        }
        if !(zeta >= 0.0 && zeta.is_finite()) {
            return Err(Error::InvalidConfig("noise scale must be finite and >= 0"));
        }
        let mut policy = Self {
            counters: vec![0.0; n],
            in_cache: vec![false; n],
            top: BTreeSet::new(),
            capacity,
            zeta,
            t: 0,
        };
        if zeta > 0.0 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for c in policy.counters.iter_mut() {
                let g: f64 = StandardNormal.sample(&mut rng);
                *c = zeta * g;
            }
            let mut order: Vec<u32> = (0..n as u32).collect();
            order.sort_by(|&a, &b| {
                policy.counters[b as usize]
                    .total_cmp(&policy.counters[a as usize])
                    .then(a.cmp(&b))
            });
            for &id in &order[..capacity] {
                policy.admit(id);
            }
        }
        // Without noise the cache starts empty and fills with the first
        // distinct requests.
        Ok(policy)
    }

    /// Perfect LFU.
    pub fn lfu(n: usize, capacity: usize) -> Result<Self> {
        Self::new(n, capacity, 0.0, 0)
    }

    pub fn zeta(&self) -> f64 {
        self.zeta
    }

    pub fn counter(&self, i: usize) -> f64 {
        self.counters[i]
    }

    pub fn is_cached(&self, i: usize) -> bool {
        self.in_cache[i]
    }

    fn admit(&mut self, id: u32) {
        self.in_cache[id as usize] = true;
        self.top.insert((Key(self.counters[id as usize]), id));
    }

    pub fn step(&mut self, j: usize) -> Result<HitOutcome> {
        if j >= self.counters.len() {
            return Err(Error::ItemOutOfRange { item: j, n: self.counters.len() });
        }
        let hit = self.in_cache[j];
        let outcome = HitOutcome { t: self.t, hit, reward: if hit { 1.0 } else { 0.0 } };
        self.t += 1;

        let jid = j as u32;
        let old = self.counters[j];
        let new = old + 1.0;
        self.counters[j] = new;
        if hit {
            self.top.remove(&(Key(old), jid));
            self.top.insert((Key(new), jid));
        } else if self.top.len() < self.capacity {
            self.admit(jid);
        } else {
            let &(min, min_id) = self.top.first().expect("cache is full");
            if new > min.0 {
                self.top.pop_first();
                self.in_cache[min_id as usize] = false;
                self.admit(jid);
            }
        }
        Ok(outcome)
    }
}

impl Policy for Ftpl {
    fn name(&self) -> &'static str {
        if self.zeta == 0.0 {
            "lfu"
        } else {
            "ftpl"
        }
    }

    fn request(&mut self, item: usize) -> Result<HitOutcome> {
        self.step(item)
    }

    fn occupancy(&self) -> usize {
        self.top.len()
    }
}
