//! Fractional cache state on the capped simplex.
//!
//! [`LazyState`] stores the state as unadjusted coefficients `f̃` plus a
//! global offset `ρ`: item `i` holds `max(f̃_i - ρ, 0)` when it is indexed and
//! `0` otherwise. A gradient step on item `j` followed by the Euclidean
//! projection is then a uniform shave of the excess over the positive items,
//! which is a change of `ρ` plus index maintenance for the items driven to
//! zero. [`exact_projection`] is the dense `O(N log N)` reference.

use alloc::vec;
use alloc::vec::Vec;

use crate::ordered::OrderedIndex;
use crate::{Error, Result};

/// Absolute tolerance for equality tests on effective values.
pub const EPS_EQ: f64 = 1e-12;

/// Offset above which the state is rebased (`f̃ -= ρ`, `ρ = 0`). Effective
/// values are differences `f̃ - ρ`, so their absolute precision degrades with
/// the magnitude of `ρ`; keeping `ρ` of order one keeps them exact to a few
/// ulps of 1.
pub const REBASE_THRESHOLD: f64 = 1.0;

/// What a single [`LazyState::update_probabilities`] call did.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct UpdateReport {
    /// Items whose probability was set to zero by this update.
    pub zeroed: usize,
    /// Passes over the removal loop (0 when the item was already at 1).
    pub loop_iterations: usize,
    /// Index entries popped by the removal loop, including any later
    /// restored by the cap branch.
    pub popped: usize,
    /// The requested item was clipped to 1.
    pub capped: bool,
    /// Ordered-index inserts and removals performed.
    pub mutations: u64,
}

/// Running totals over the lifetime of a [`LazyState`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ProjectionStats {
    pub updates: u64,
    pub zeroed: u64,
    pub loop_iterations: u64,
    pub max_loop_iterations: usize,
    pub cap_branches: u64,
    pub rebases: u64,
}

#[derive(Debug, Clone)]
pub struct LazyState {
    capacity: f64,
    /// Unadjusted coefficients; `0.0` marks an item outside the index.
    f_tilde: Vec<f64>,
    rho: f64,
    positive: OrderedIndex,
    zeroed_last: Vec<u32>,
    /// `(id, f̃)` of items removed during the current call, for the cap branch.
    removed: Vec<(u32, f64)>,
    /// Number of rebases so far.
    epoch: u64,
    /// Sum of rebase shifts not yet claimed by a paired sampler.
    unclaimed_shift: f64,
    stats: ProjectionStats,
}

impl LazyState {
    /// Uniform state `f_i = C/N`.
    pub fn init_uniform(n: usize, capacity: f64) -> Result<Self> {
        validate_capacity(n, capacity)?;
        let value = capacity / n as f64;
        let f_tilde = vec![value; n];
        let positive = OrderedIndex::from_sorted_iter((0..n as u32).map(|i| (value, i)));
        Ok(Self::from_parts(capacity, f_tilde, positive))
    }

    /// State holding an arbitrary feasible fractional vector.
    pub fn from_fractional(f: &[f64], capacity: f64) -> Result<Self> {
        validate_capacity(f.len(), capacity)?;
        if f.iter().any(|&v| !(-EPS_EQ..=1.0 + EPS_EQ).contains(&v)) {
            return Err(Error::InvalidArgument("fractional state must lie in [0, 1]"));
        }
        let total: f64 = f.iter().sum();
        if (total - capacity).abs() > 1e-9 * f.len() as f64 {
            return Err(Error::InvalidArgument("fractional state must sum to the capacity"));
        }
        let mut f_tilde = vec![0.0; f.len()];
        let mut positive = OrderedIndex::new();
        for (i, &v) in f.iter().enumerate() {
            if v > EPS_EQ {
                let v = v.min(1.0);
                f_tilde[i] = v;
                positive.insert(v, i as u32);
            }
        }
        Ok(Self::from_parts(capacity, f_tilde, positive))
    }

    fn from_parts(capacity: f64, f_tilde: Vec<f64>, positive: OrderedIndex) -> Self {
        Self {
            capacity,
            f_tilde,
            rho: 0.0,
            positive,
            zeroed_last: Vec::new(),
            removed: Vec::new(),
            epoch: 0,
            unclaimed_shift: 0.0,
            stats: ProjectionStats::default(),
        }
    }

    pub fn n(&self) -> usize {
        self.f_tilde.len()
    }

    pub fn capacity(&self) -> f64 {
        self.capacity
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Unadjusted coefficient of `i` (`0.0` when not indexed).
    pub fn unadjusted(&self, i: usize) -> f64 {
        self.f_tilde[i]
    }

    pub fn is_positive(&self, i: usize) -> bool {
        self.f_tilde[i] > 0.0
    }

    /// Number of items with a positive probability.
    pub fn positive_count(&self) -> usize {
        self.positive.len()
    }

    pub fn zeroed_last_step(&self) -> &[u32] {
        &self.zeroed_last
    }

    pub fn stats(&self) -> ProjectionStats {
        self.stats
    }

    /// Total ordered-index mutations since construction.
    pub fn index_mutations(&self) -> u64 {
        self.positive.mutations()
    }

    pub fn effective_value(&self, i: usize) -> Result<f64> {
        self.check_item(i)?;
        Ok(self.effective(i))
    }

    #[inline]
    pub(crate) fn effective(&self, i: usize) -> f64 {
        let v = self.f_tilde[i];
        if v > 0.0 {
            (v - self.rho).max(0.0)
        } else {
            0.0
        }
    }

    /// Dense vector of effective values, `O(N)`.
    pub fn densify(&self) -> Vec<f64> {
        (0..self.n()).map(|i| self.effective(i)).collect()
    }

    fn check_item(&self, i: usize) -> Result<()> {
        if i < self.n() {
            Ok(())
        } else {
            Err(Error::ItemOutOfRange { item: i, n: self.n() })
        }
    }

    fn tolerance(&self) -> f64 {
        EPS_EQ * (1.0 + self.rho)
    }

    /// Gradient step of size `eta` on item `j` followed by the exact
    /// Euclidean projection back onto the capped simplex.
    pub fn update_probabilities(&mut self, j: usize, eta: f64) -> Result<UpdateReport> {
        self.check_item(j)?;
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::InvalidArgument("step size must be positive and finite"));
        }
        self.zeroed_last.clear();
        self.removed.clear();
        self.stats.updates += 1;
        let mutations_before = self.positive.mutations();
        let tol = self.tolerance();
        let jid = j as u32;

        let prev = self.effective(j);
        if self.is_positive(j) && prev >= 1.0 - tol {
            return Ok(UpdateReport::default());
        }

        if self.is_positive(j) {
            let old = self.f_tilde[j];
            self.positive.remove(old, jid);
            self.f_tilde[j] = old + eta;
        } else {
            self.f_tilde[j] = self.rho + eta;
        }
        self.positive.insert(self.f_tilde[j], jid);

        let mut report = UpdateReport::default();
        let mut excess = eta;
        let mut excluded = false;
        let shave = loop {
            let shave = self.shave_and_drain(j, &mut excess, &mut report)?;
            if !excluded && self.f_tilde[j] - self.rho - shave > 1.0 + tol {
                // Requested item overflows: pin it at 1, undo this call's
                // removals and spread only what is left of the step.
                report.capped = true;
                self.stats.cap_branches += 1;
                excess = 1.0 - prev;
                for (id, value) in self.removed.drain(..) {
                    self.f_tilde[id as usize] = value;
                    self.positive.insert(value, id);
                }
                self.zeroed_last.clear();
                let value = self.f_tilde[j];
                self.positive.remove(value, jid);
                excluded = true;
                continue;
            }
            break shave;
        };

        self.rho += shave;
        if excluded {
            self.f_tilde[j] = 1.0 + self.rho;
            self.positive.insert(self.f_tilde[j], jid);
        }

        report.zeroed = self.zeroed_last.len();
        report.mutations = self.positive.mutations() - mutations_before;
        if self.needs_rebase() {
            self.rebase();
        }
        self.stats.zeroed += report.zeroed as u64;
        self.stats.loop_iterations += report.loop_iterations as u64;
        self.stats.max_loop_iterations = self.stats.max_loop_iterations.max(report.loop_iterations);
        Ok(report)
    }

    /// Removal loop: shave `excess` uniformly, dropping items that would go
    /// to (or within tolerance of) zero until the shave is stable. Returns the
    /// final per-item shave.
    fn shave_and_drain(&mut self, j: usize, excess: &mut f64, report: &mut UpdateReport) -> Result<f64> {
        let tol = self.tolerance();
        loop {
            report.loop_iterations += 1;
            if self.positive.is_empty() {
                if *excess <= tol {
                    return Ok(0.0);
                }
                return Err(Error::Inconsistent("no positive items left to absorb the excess"));
            }
            let shave = *excess / self.positive.len() as f64;
            let mut removed_any = false;
            while let Some((value, id)) = self.positive.first() {
                if id as usize == j || value - self.rho - shave > tol {
                    break;
                }
                self.positive.pop_first();
                report.popped += 1;
                *excess -= value - self.rho;
                self.f_tilde[id as usize] = 0.0;
                self.removed.push((id, value));
                self.zeroed_last.push(id);
                removed_any = true;
            }
            if !removed_any {
                return Ok(shave);
            }
        }
    }

    pub fn needs_rebase(&self) -> bool {
        self.rho > REBASE_THRESHOLD
    }

    /// Rebase count; a paired sampler compares it against its own.
    pub fn epoch(&self) -> u64 {
        self.epoch
    }

    /// Returns and clears the total shift applied by rebases since the last
    /// call. A sampler paired with this state must subtract it from its
    /// differences (see [`crate::SamplerState::follow_rebase`]).
    pub fn take_unclaimed_shift(&mut self) -> f64 {
        core::mem::take(&mut self.unclaimed_shift)
    }

    /// Folds `ρ` into the coefficients and resets it to zero. Runs
    /// automatically once `ρ` exceeds [`REBASE_THRESHOLD`]. Returns the shift.
    pub fn rebase(&mut self) -> f64 {
        let shift = self.rho;
        if shift == 0.0 {
            return 0.0;
        }
        let entries: Vec<(f64, u32)> = self.positive.iter().map(|(v, id)| (v - shift, id)).collect();
        for &(v, id) in &entries {
            self.f_tilde[id as usize] = v;
        }
        self.positive.rebuild(entries.into_iter());
        self.rho = 0.0;
        self.epoch += 1;
        self.unclaimed_shift += shift;
        self.stats.rebases += 1;
        shift
    }
}

fn validate_capacity(n: usize, capacity: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidConfig("catalog must not be empty"));
    }
    if !(capacity > 0.0 && capacity < n as f64) {
        return Err(Error::InvalidConfig("capacity must satisfy 0 < C < N"));
    }
    Ok(())
}

/// Euclidean projection of `y` onto `{f in [0,1]^N : sum f = C}`.
///
/// The solution is `f_i = clip(y_i - λ, 0, 1)` with `λ` chosen so the
/// components sum to `C`. The sum is piecewise linear and non-increasing in
/// `λ` with breakpoints at `y_i` and `y_i - 1`; the segment containing `C` is
/// found by binary search over the sorted breakpoints and `λ` is interpolated
/// exactly on it. `O(N log N)`.
pub fn exact_projection(y: &[f64], capacity: f64) -> Result<Vec<f64>> {
    validate_capacity(y.len(), capacity)?;
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("projection input must be finite"));
    }
    let mass = |lambda: f64| -> f64 { y.iter().map(|&v| (v - lambda).clamp(0.0, 1.0)).sum() };

    let mut breaks: Vec<f64> = y.iter().flat_map(|&v| [v - 1.0, v]).collect();
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();

    // mass(breaks[0]) = N > C and mass(last) = 0 < C.
    let (mut lo, mut hi) = (0usize, breaks.len() - 1);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if mass(breaks[mid]) >= capacity {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (a, b) = (breaks[lo], breaks[hi]);
    let (ma, mb) = (mass(a), mass(b));
    let lambda = if ma > mb { a + (ma - capacity) * (b - a) / (ma - mb) } else { a };
    Ok(y.iter().map(|&v| (v - lambda).clamp(0.0, 1.0)).collect())
}
