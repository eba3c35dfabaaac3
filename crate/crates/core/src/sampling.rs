//! Integral cache drawn from the fractional state.
//!
//! Each item carries a permanent random number `p_i ~ U[0,1)` and is cached
//! iff `f_i >= p_i` (Poisson sampling, so `E[x] = f`). Because `p_i` is fixed
//! and `f_i = f̃_i - ρ` for positive items, a cached item that was not
//! requested keeps a constant difference `d_i = f̃_i - p_i` and must leave the
//! cache exactly when `ρ` grows past it. Keeping the `d_i` ordered makes each
//! sync `O((|requested| + evictions) log N)`.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ordered::OrderedIndex;
use crate::projection::LazyState;
use crate::{Error, Result};

/// Insertions and evictions performed by one sync.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SampleChange {
    pub inserted: usize,
    pub evicted: usize,
}

#[derive(Debug, Clone)]
pub struct SamplerState {
    prn: Vec<f64>,
    /// `d_i = f̃_i - p_i`, meaningful only while `i` is cached.
    diff: Vec<f64>,
    cached: Vec<bool>,
    occupancy: usize,
    diff_index: OrderedIndex,
    last_sync_rho: f64,
    last_inserted: Vec<u32>,
    last_evicted: Vec<u32>,
    total_inserted: u64,
    total_evicted: u64,
    /// Rebase epoch of the state the differences are expressed against.
    epoch: u64,
}

impl SamplerState {
    /// Draws the permanent random numbers from a ChaCha stream seeded with
    /// `seed` and samples the initial cache from `state`.
    pub fn new(state: &LazyState, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::with_rng(state, &mut rng)
    }

    pub fn with_rng<R: Rng + ?Sized>(state: &LazyState, rng: &mut R) -> Self {
        let prn = (0..state.n()).map(|_| rng.random::<f64>()).collect();
        Self::with_prns(state, prn).expect("prn vector sized to the catalog")
    }

    /// Sampler with caller-provided permanent random numbers.
    pub fn with_prns(state: &LazyState, prn: Vec<f64>) -> Result<Self> {
        if prn.len() != state.n() {
            return Err(Error::LengthMismatch { left: prn.len(), right: state.n() });
        }
        if prn.iter().any(|p| !(0.0..1.0).contains(p)) {
            return Err(Error::InvalidArgument("permanent random numbers must lie in [0, 1)"));
        }
        let n = state.n();
        let mut sampler = Self {
            prn,
            diff: vec![0.0; n],
            cached: vec![false; n],
            occupancy: 0,
            diff_index: OrderedIndex::new(),
            last_sync_rho: state.rho(),
            last_inserted: Vec::new(),
            last_evicted: Vec::new(),
            total_inserted: 0,
            total_evicted: 0,
            epoch: state.epoch(),
        };
        sampler.rebuild(state);
        Ok(sampler)
    }

    fn rebuild(&mut self, state: &LazyState) {
        let mut entries = Vec::new();
        self.occupancy = 0;
        for i in 0..state.n() {
            let included = state.is_positive(i) && state.effective(i) >= self.prn[i];
            self.cached[i] = included;
            if included {
                let d = state.unadjusted(i) - self.prn[i];
                self.diff[i] = d;
                entries.push((d, i as u32));
                self.occupancy += 1;
            }
        }
        entries.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        self.diff_index.rebuild(entries.into_iter());
        self.last_sync_rho = state.rho();
    }

    pub fn n(&self) -> usize {
        self.prn.len()
    }

    pub fn prn(&self, i: usize) -> f64 {
        self.prn[i]
    }

    pub fn is_cached(&self, i: usize) -> Result<bool> {
        self.cached
            .get(i)
            .copied()
            .ok_or(Error::ItemOutOfRange { item: i, n: self.n() })
    }

    pub fn occupancy(&self) -> usize {
        self.occupancy
    }

    /// Cached ids in increasing order.
    pub fn cached_ids(&self) -> Vec<u32> {
        (0..self.n() as u32).filter(|&i| self.cached[i as usize]).collect()
    }

    pub fn last_sync_rho(&self) -> f64 {
        self.last_sync_rho
    }

    pub fn last_inserted(&self) -> &[u32] {
        &self.last_inserted
    }

    pub fn last_evicted(&self) -> &[u32] {
        &self.last_evicted
    }

    pub fn total_inserted(&self) -> u64 {
        self.total_inserted
    }

    pub fn total_evicted(&self) -> u64 {
        self.total_evicted
    }

    /// Brings the cache in line with `state`. `requested` lists the distinct
    /// ids requested since the previous sync.
    pub fn update_sample(&mut self, state: &LazyState, requested: &[u32]) -> Result<SampleChange> {
        if state.n() != self.n() {
            return Err(Error::LengthMismatch { left: state.n(), right: self.n() });
        }
        if let Some(&bad) = requested.iter().find(|&&j| j as usize >= self.n()) {
            return Err(Error::ItemOutOfRange { item: bad as usize, n: self.n() });
        }
        if state.epoch() != self.epoch {
            return Err(Error::Inconsistent("state was rebased without follow_rebase"));
        }
        self.last_inserted.clear();
        self.last_evicted.clear();

        for &j in requested {
            let ju = j as usize;
            if self.cached[ju] {
                let old = self.diff[ju];
                self.diff_index.remove(old, j);
                let d = state.unadjusted(ju) - self.prn[ju];
                self.diff[ju] = d;
                self.diff_index.insert(d, j);
            } else if state.is_positive(ju) && state.effective(ju) >= self.prn[ju] {
                let d = state.unadjusted(ju) - self.prn[ju];
                self.diff[ju] = d;
                self.diff_index.insert(d, j);
                self.cached[ju] = true;
                self.occupancy += 1;
                self.last_inserted.push(j);
            }
        }

        let rho = state.rho();
        while let Some((d, id)) = self.diff_index.first() {
            if d >= rho {
                break;
            }
            self.diff_index.pop_first();
            self.cached[id as usize] = false;
            self.occupancy -= 1;
            self.last_evicted.push(id);
        }
        self.last_sync_rho = rho;
        self.total_inserted += self.last_inserted.len() as u64;
        self.total_evicted += self.last_evicted.len() as u64;
        Ok(SampleChange {
            inserted: self.last_inserted.len(),
            evicted: self.last_evicted.len(),
        })
    }

    /// Claims the shift of any rebases `state` performed since the last call
    /// and moves the differences into the new frame. Must run after every
    /// probability update of a paired state, before the next sync.
    pub fn follow_rebase(&mut self, state: &mut LazyState) {
        let shift = state.take_unclaimed_shift();
        self.epoch = state.epoch();
        if shift == 0.0 {
            return;
        }
        let entries: Vec<(f64, u32)> = self.diff_index.iter().map(|(d, id)| (d - shift, id)).collect();
        for &(d, id) in &entries {
            self.diff[id as usize] = d;
        }
        self.diff_index.rebuild(entries.into_iter());
        self.last_sync_rho -= shift;
    }

    /// Draws fresh permanent random numbers and resamples the cache, `O(N)`.
    pub fn redraw_prns(&mut self, state: &LazyState, seed: u64) -> SampleChange {
        let before = self.cached.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for p in self.prn.iter_mut() {
            *p = rng.random::<f64>();
        }
        self.rebuild(state);
        self.last_inserted.clear();
        self.last_evicted.clear();
        for (i, (&was, &now)) in before.iter().zip(&self.cached).enumerate() {
            match (was, now) {
                (false, true) => self.last_inserted.push(i as u32),
                (true, false) => self.last_evicted.push(i as u32),
                _ => {}
            }
        }
        self.total_inserted += self.last_inserted.len() as u64;
        self.total_evicted += self.last_evicted.len() as u64;
        SampleChange {
            inserted: self.last_inserted.len(),
            evicted: self.last_evicted.len(),
        }
    }
}

/// Upper tail of the standard normal, `Ψ(x) = P(Z > x)`.
pub fn normal_tail(x: f64) -> f64 {
    0.5 * libm::erfc(x / core::f64::consts::SQRT_2)
}

/// Gaussian-approximation bound on `P(occupancy > (1 + ε) C)`: `Ψ(ε √C)`.
pub fn occupancy_exceedance_bound(capacity: f64, epsilon: f64) -> Result<f64> {
    if capacity.is_nan() || capacity <= 0.0 || epsilon.is_nan() || epsilon < 0.0 {
        return Err(Error::InvalidArgument("capacity must be positive and epsilon non-negative"));
    }
    Ok(normal_tail(epsilon * libm::sqrt(capacity)))
}

/// Madow systematic sampling: exactly `C` distinct items, item `i` included
/// with probability `f_i` over `u ~ U[0,1)`. Item `i` is selected when one of
/// the thresholds `u, u+1, ..., u+C-1` falls in `[S_{i-1}, S_i)`, where `S` is
/// the running sum of `f`.
pub fn systematic_sample(f: &[f64], capacity: f64, u: f64) -> Result<Vec<u32>> {
    let target = libm::round(capacity);
    if (capacity - target).abs() > 1e-9 || target < 0.0 {
        return Err(Error::InvalidArgument("systematic sampling needs an integral capacity"));
    }
    if !(0.0..1.0).contains(&u) {
        return Err(Error::InvalidArgument("u must lie in [0, 1)"));
    }
    if f.iter().any(|&v| !(-1e-12..=1.0 + 1e-12).contains(&v)) {
        return Err(Error::InvalidArgument("inclusion probabilities must lie in [0, 1]"));
    }
    let total: f64 = f.iter().sum();
    if (total - target).abs() > 1e-9 * (f.len().max(1) as f64) {
        return Err(Error::InvalidArgument("inclusion probabilities must sum to the capacity"));
    }
    let c = target as i64;
    // Thresholds strictly below x: ceil(x - u), clamped to [0, C].
    let crossed = |x: f64| -> i64 { (libm::ceil(x - u) as i64).clamp(0, c) };
    let mut out = Vec::with_capacity(c as usize);
    let mut cumulative = 0.0;
    let mut before = 0;
    for (i, &v) in f.iter().enumerate() {
        cumulative += v.max(0.0);
        let after = if i + 1 == f.len() { c } else { crossed(cumulative) };
        if after > before {
            out.push(i as u32);
        }
        before = after;
    }
    Ok(out)
}
