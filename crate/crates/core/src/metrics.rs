//! Windowed ratios, best-static-prefix regret and occupancy statistics.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use crate::policies::Mode;
use crate::run::RunLog;
use crate::trace::Trace;
use crate::{Error, Result};

/// Means over non-overlapping windows.
#[derive(Debug, Clone, PartialEq)]
pub struct Windowed {
    pub full: Vec<f64>,
    /// Mean and length of the trailing partial window, if any.
    pub partial: Option<(f64, usize)>,
}

pub fn windowed_mean(values: &[f64], w: usize) -> Result<Windowed> {
    if w == 0 {
        return Err(Error::InvalidArgument("window must be at least 1"));
    }
    let mean = |c: &[f64]| c.iter().sum::<f64>() / c.len() as f64;
    let chunks = values.chunks_exact(w);
    let rest = chunks.remainder();
    Ok(Windowed {
        full: chunks.map(mean).collect(),
        partial: (!rest.is_empty()).then(|| (mean(rest), rest.len())),
    })
}

pub fn windowed_hit_ratio(hits: &[bool], w: usize) -> Result<Windowed> {
    let values: Vec<f64> = hits.iter().map(|&h| if h { 1.0 } else { 0.0 }).collect();
    windowed_mean(&values, w)
}

/// Mean removals per request in each window.
pub fn removal_rate(removals: &[u32], w: usize) -> Result<Windowed> {
    let values: Vec<f64> = removals.iter().map(|&r| r as f64).collect();
    windowed_mean(&values, w)
}

/// `series[t]` is the number of hits the best static cache of size `C`
/// would score on the first `t + 1` requests, i.e. the sum of the `C`
/// largest counts of that prefix. Counts only grow by one at a time, so the
/// top set changes by at most one swap per request.
pub fn opt_prefix_series(trace: &Trace, capacity: usize) -> Vec<u64> {
    let mut counts = vec![0u64; trace.n()];
    let mut in_top = vec![false; trace.n()];
    let mut top: BTreeSet<(u64, u32)> = BTreeSet::new();
    let mut sum = 0u64;
    let mut out = Vec::with_capacity(trace.len());
    for &r in trace.requests() {
        let j = r as usize;
        let old = counts[j];
        counts[j] += 1;
        if in_top[j] {
            top.remove(&(old, r));
            top.insert((old + 1, r));
            sum += 1;
        } else if top.len() < capacity {
            top.insert((old + 1, r));
            in_top[j] = true;
            sum += old + 1;
        } else if let Some(&(min, min_id)) = top.first() {
            if old + 1 > min {
                top.pop_first();
                in_top[min_id as usize] = false;
                top.insert((old + 1, r));
                in_top[j] = true;
                sum = sum - min + old + 1;
            }
        }
        out.push(sum);
    }
    out
}

/// Prefix value of the best static fractional allocation of a possibly
/// non-integral capacity: the `⌊C⌋` largest counts plus the fractional part
/// of `C` times the next largest.
pub fn opt_prefix_series_frac(trace: &Trace, capacity: f64) -> Vec<f64> {
    let whole = libm::floor(capacity) as usize;
    let part = capacity - whole as f64;
    let lower = opt_prefix_series(trace, whole);
    if part == 0.0 {
        return lower.iter().map(|&v| v as f64).collect();
    }
    let upper = opt_prefix_series(trace, whole + 1);
    lower.iter().zip(&upper).map(|(&a, &b)| a as f64 + part * (b - a) as f64).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegretPoint {
    /// Requests served (1-based).
    pub t: u64,
    pub regret: f64,
    pub bound: f64,
}

/// Regret against the best static prefix allocation, alongside the
/// `sqrt(C (1 - C/N) t B)` bound. Regret can be negative.
pub fn regret_series(
    rewards: &[f64],
    opt_series: &[f64],
    capacity: f64,
    n: usize,
    batch: u64,
) -> Result<Vec<RegretPoint>> {
    if rewards.len() != opt_series.len() {
        return Err(Error::LengthMismatch { left: rewards.len(), right: opt_series.len() });
    }
    let spread = capacity * (1.0 - capacity / n as f64);
    let mut cumulative = 0.0;
    Ok(rewards
        .iter()
        .zip(opt_series)
        .enumerate()
        .map(|(k, (&r, &opt))| {
            cumulative += r;
            let t = (k + 1) as u64;
            RegretPoint {
                t,
                regret: opt - cumulative,
                bound: libm::sqrt(spread * t as f64 * batch as f64),
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OccupancyStats {
    pub mean: f64,
    /// Standard deviation over mean.
    pub cov: f64,
    /// Largest `|sample - C| / C`.
    pub max_rel_dev: f64,
}

pub fn occupancy_stats(samples: &[f64], capacity: f64) -> Result<OccupancyStats> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument("no occupancy samples"));
    }
    let m = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / m;
    let var = samples.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / m;
    let max_rel_dev = samples.iter().map(|s| (s - capacity).abs() / capacity).fold(0.0, f64::max);
    Ok(OccupancyStats {
        mean,
        cov: if mean > 0.0 { libm::sqrt(var) / mean } else { 0.0 },
        max_rel_dev,
    })
}

/// One row of the per-window series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowRow {
    pub start: u64,
    pub len: u64,
    pub hit_ratio: f64,
    /// Mean integral occupancy over the window.
    pub occupancy: f64,
    pub removals_per_req: f64,
    /// Regret and bound at the end of the window.
    pub regret: f64,
    pub regret_bound: f64,
}

/// Parameters the per-window series depends on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesParams {
    pub mode: Mode,
    pub capacity: f64,
    pub n: usize,
    pub batch: u64,
    pub window: usize,
}

/// Aggregates a run log into windows; the trailing partial window, if any,
/// is the last row.
pub fn window_rows(log: &RunLog, opt_series: &[f64], params: SeriesParams) -> Result<Vec<WindowRow>> {
    if params.window == 0 {
        return Err(Error::InvalidArgument("window must be at least 1"));
    }
    let rewards = log.rewards_for(params.mode);
    let regret = regret_series(&rewards, opt_series, params.capacity, params.n, params.batch)?;
    let mut rows = Vec::new();
    let mut start = 0usize;
    while start < rewards.len() {
        let end = (start + params.window).min(rewards.len());
        let len = (end - start) as f64;
        let last = regret[end - 1];
        rows.push(WindowRow {
            start: start as u64,
            len: (end - start) as u64,
            hit_ratio: rewards[start..end].iter().sum::<f64>() / len,
            occupancy: log.occupancy[start..end].iter().map(|&o| o as f64).sum::<f64>() / len,
            removals_per_req: log.removals[start..end].iter().map(|&r| r as f64).sum::<f64>() / len,
            regret: last.regret,
            regret_bound: last.bound,
        });
        start = end;
    }
    Ok(rows)
}
