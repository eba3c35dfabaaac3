use alloc::vec;
use alloc::vec::Vec;

use super::{HitOutcome, Policy};
use crate::trace::Trace;
use crate::{Error, Result};

/// Best static allocation in hindsight.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OptAllocation {
    /// Chosen ids, in decreasing order of request count.
    pub items: Vec<u32>,
    pub hits: u64,
}

/// With unit rewards the best static cache is the `C` most requested items.
/// Ties go to the earlier first occurrence, then the smaller id.
pub fn opt_hindsight(trace: &Trace, capacity: usize) -> OptAllocation {
    let counts = trace.counts();
    let first = trace.first_occurrence();
    let mut order: Vec<u32> = (0..trace.n() as u32).filter(|&i| counts[i as usize] > 0).collect();
    order.sort_by(|&a, &b| {
        let (a, b) = (a as usize, b as usize);
        counts[b].cmp(&counts[a]).then(first[a].cmp(&first[b])).then(a.cmp(&b))
    });
    order.truncate(capacity);
    let hits = order.iter().map(|&i| counts[i as usize]).sum();
    OptAllocation { items: order, hits }
}

/// Replays a fixed allocation.
#[derive(Debug, Clone)]
pub struct OptStatic {
    in_cache: Vec<bool>,
    size: usize,
    t: u64,
}

impl OptStatic {
    pub fn new(trace: &Trace, capacity: usize) -> Self {
        Self::with_items(trace.n(), &opt_hindsight(trace, capacity).items)
    }

    pub fn with_items(n: usize, items: &[u32]) -> Self {
        let mut in_cache = vec![false; n];
        for &i in items {
            in_cache[i as usize] = true;
        }
        Self { in_cache, size: items.len(), t: 0 }
    }
}

impl Policy for OptStatic {
    fn name(&self) -> &'static str {
        "opt"
    }

    fn request(&mut self, item: usize) -> Result<HitOutcome> {
        let hit = *self
            .in_cache
            .get(item)
            .ok_or(Error::ItemOutOfRange { item, n: self.in_cache.len() })?;
        let outcome = HitOutcome { t: self.t, hit, reward: if hit { 1.0 } else { 0.0 } };
        self.t += 1;
        Ok(outcome)
    }

    fn occupancy(&self) -> usize {
        self.size
    }
}
