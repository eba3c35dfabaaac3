//! Request traces over a dense catalog, synthetic generators, and locality
//! statistics (item lifetimes and reuse distances).

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Zipf};

use crate::{Error, Result};

/// A request sequence over dense ids `0..n`. The timestamp of a request is
/// its position in the sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    requests: Vec<u32>,
    n: usize,
    /// Original key of each dense id; `None` for generated traces, whose
    /// keys are the ids themselves.
    keys: Option<Vec<String>>,
}

impl Trace {
    /// Wraps dense ids. `n` becomes the number of distinct ids, which must
    /// cover `0..n` exactly.
    pub fn from_dense(requests: Vec<u32>) -> Result<Self> {
        if requests.is_empty() {
            return Err(Error::EmptyTrace);
        }
        let max = *requests.iter().max().unwrap() as usize;
        let mut seen = vec![false; max + 1];
        for &r in &requests {
            seen[r as usize] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidArgument("dense ids must cover 0..n without gaps"));
        }
        Ok(Self { requests, n: max + 1, keys: None })
    }

    /// Remaps arbitrary keys to dense ids in order of first appearance.
    pub fn from_keys<I, S>(keys: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut builder = TraceBuilder::default();
        for k in keys {
            builder.push(k.as_ref());
        }
        builder.finish()
    }

    /// The same requests with ids renumbered in order of first appearance
    /// and `n` reduced to the ids actually requested: what parsing a written
    /// copy of the trace would give. Original keys are kept.
    pub fn canonical(&self) -> Trace {
        let mut map = vec![u32::MAX; self.n];
        let mut order = Vec::new();
        let requests = self
            .requests
            .iter()
            .map(|&r| {
                let slot = &mut map[r as usize];
                if *slot == u32::MAX {
                    *slot = order.len() as u32;
                    order.push(r);
                }
                *slot
            })
            .collect();
        let keys = order.iter().map(|&old| self.key(old)).collect();
        Trace { requests, n: order.len(), keys: Some(keys) }
    }

    pub fn requests(&self) -> &[u32] {
        &self.requests
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.requests.len()
    }

    pub fn is_empty(&self) -> bool {
        self.requests.is_empty()
    }

    /// Original key of a dense id.
    pub fn key(&self, id: u32) -> String {
        match &self.keys {
            Some(keys) => keys[id as usize].clone(),
            None => id.to_string(),
        }
    }

    /// Request count per item.
    pub fn counts(&self) -> Vec<u64> {
        let mut counts = vec![0u64; self.n];
        for &r in &self.requests {
            counts[r as usize] += 1;
        }
        counts
    }

    /// Index of the first request of each item.
    pub fn first_occurrence(&self) -> Vec<usize> {
        let mut first = vec![usize::MAX; self.n];
        for (t, &r) in self.requests.iter().enumerate() {
            let slot = &mut first[r as usize];
            if *slot == usize::MAX {
                *slot = t;
            }
        }
        first
    }
}

/// Incremental key-to-dense-id remapping.
#[derive(Debug, Default)]
pub struct TraceBuilder {
    ids: BTreeMap<String, u32>,
    keys: Vec<String>,
    requests: Vec<u32>,
}

impl TraceBuilder {
    pub fn push(&mut self, key: &str) -> u32 {
        if let Some(&id) = self.ids.get(key) {
            self.requests.push(id);
            return id;
        }
        let id = self.keys.len() as u32;
        self.ids.insert(key.to_string(), id);
        self.keys.push(key.to_string());
        self.requests.push(id);
        id
    }

    pub fn len(&self) -> usize {
        self.requests.len()
    }

    pub fn is_empty(&self) -> bool {
        self.requests.is_empty()
    }

    pub fn finish(self) -> Result<Trace> {
        if self.requests.is_empty() {
            return Err(Error::EmptyTrace);
        }
        Ok(Trace {
            n: self.keys.len(),
            requests: self.requests,
            keys: Some(self.keys),
        })
    }
}

/// `rounds` rounds over the whole catalog, each an independent uniform
/// permutation of `0..n`.
pub fn gen_adversarial(n: usize, rounds: usize, seed: u64) -> Result<Trace> {
    if n == 0 || rounds == 0 {
        return Err(Error::InvalidConfig("adversarial trace needs n >= 1 and rounds >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut perm: Vec<u32> = (0..n as u32).collect();
    let mut requests = Vec::with_capacity(n * rounds);
    for _ in 0..rounds {
        perm.shuffle(&mut rng);
        requests.extend_from_slice(&perm);
    }
    Ok(Trace { requests, n, keys: None })
}

/// `t` i.i.d. requests with `P(i) ∝ (i + 1)^-alpha`.
///
/// The catalog is `0..n` even if some items are never drawn.
pub fn gen_zipf(n: usize, t: usize, alpha: f64, seed: u64) -> Result<Trace> {
    if n == 0 || t == 0 || !alpha.is_finite() || alpha < 0.0 {
        return Err(Error::InvalidConfig("zipf trace needs n >= 1, t >= 1, alpha >= 0"));
    }
    let zipf = Zipf::new(n as f64, alpha).map_err(|_| Error::InvalidConfig("bad zipf parameters"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let requests = (0..t)
        .map(|_| {
            let rank: f64 = zipf.sample(&mut rng);
            (rank as usize - 1).min(n - 1) as u32
        })
        .collect();
    Ok(Trace { requests, n, keys: None })
}

/// Uniformly random trace, mostly useful in tests.
pub fn gen_uniform(n: usize, t: usize, seed: u64) -> Result<Trace> {
    if n == 0 || t == 0 {
        return Err(Error::InvalidConfig("uniform trace needs n >= 1 and t >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let requests = (0..t).map(|_| rng.random_range(0..n as u32)).collect();
    Ok(Trace { requests, n, keys: None })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ItemLifetime {
    pub id: u32,
    pub first: usize,
    pub last: usize,
    pub count: u64,
}

impl ItemLifetime {
    pub fn lifetime(&self) -> usize {
        self.last - self.first
    }

    /// Hits an infinite cache could serve for this item.
    pub fn max_hits(&self) -> u64 {
        self.count - 1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LifetimeStats {
    /// Requested items ordered by lifetime, then id.
    pub items: Vec<ItemLifetime>,
    /// `curve[k]` = cumulative `Σ (count - 1) / T` over `items[..=k]`.
    pub curve: Vec<f64>,
}

pub fn lifetime_stats(trace: &Trace) -> LifetimeStats {
    let n = trace.n();
    let mut first = vec![usize::MAX; n];
    let mut last = vec![0usize; n];
    let mut count = vec![0u64; n];
    for (t, &r) in trace.requests().iter().enumerate() {
        let i = r as usize;
        if first[i] == usize::MAX {
            first[i] = t;
        }
        last[i] = t;
        count[i] += 1;
    }
    let mut items: Vec<ItemLifetime> = (0..n)
        .filter(|&i| count[i] > 0)
        .map(|i| ItemLifetime { id: i as u32, first: first[i], last: last[i], count: count[i] })
        .collect();
    items.sort_by_key(|it| (it.lifetime(), it.id));
    let total = trace.len() as f64;
    let mut acc = 0u64;
    let curve = items
        .iter()
        .map(|it| {
            acc += it.max_hits();
            acc as f64 / total
        })
        .collect();
    LifetimeStats { items, curve }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReusePoint {
    pub id: u32,
    /// Mean gap between consecutive requests of the item.
    pub mean_gap: f64,
    /// Fraction of qualifying items with mean gap at most this one.
    pub cdf: f64,
}

/// Empirical CDF of per-item mean reuse distance over items with at least
/// two requests, sorted by mean gap.
pub fn reuse_distance_cdf(trace: &Trace) -> Vec<ReusePoint> {
    let n = trace.n();
    let lt = lifetime_stats(trace);
    let mut points: Vec<(f64, u32)> = lt
        .items
        .iter()
        .filter(|it| it.count >= 2)
        // Consecutive gaps telescope to last - first.
        .map(|it| (it.lifetime() as f64 / (it.count - 1) as f64, it.id))
        .collect();
    debug_assert!(points.len() <= n);
    points.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let m = points.len() as f64;
    points
        .iter()
        .enumerate()
        .map(|(k, &(mean_gap, id))| ReusePoint { id, mean_gap, cdf: (k + 1) as f64 / m })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_renumbers_by_first_appearance() {
        let t = Trace { requests: vec![4, 2, 4, 0], n: 6, keys: None };
        let c = t.canonical();
        assert_eq!((c.requests(), c.n()), (&[0, 1, 0, 2][..], 3));
        assert_eq!((c.key(0), c.key(2)), ("4".to_string(), "0".to_string()));
        assert_eq!(c.canonical(), c);
    }

    #[test]
    fn remap_in_first_appearance_order() {
        let t = Trace::from_keys(["a", "b", "a"]).unwrap();
        assert_eq!(t.requests(), &[0, 1, 0]);
        assert_eq!(t.n(), 2);
        assert_eq!(t.key(1), "b");
        let t = Trace::from_keys(["5", "5", "9"]).unwrap();
        assert_eq!(t.requests(), &[0, 0, 1]);
        assert!(matches!(Trace::from_keys(Vec::<&str>::new()), Err(Error::EmptyTrace)));
    }

    #[test]
    fn from_dense_requires_contiguous_ids() {
        assert!(Trace::from_dense(vec![0, 2]).is_err());
        assert_eq!(Trace::from_dense(vec![1, 0, 1]).unwrap().n(), 2);
    }

    #[test]
    fn adversarial_rounds_are_permutations() {
        let t = gen_adversarial(50, 7, 11).unwrap();
        assert_eq!(t.len(), 350);
        for round in t.requests().chunks(50) {
            let mut r = round.to_vec();
            r.sort_unstable();
            assert_eq!(r, (0..50).collect::<Vec<u32>>());
        }
        assert_eq!(t, gen_adversarial(50, 7, 11).unwrap());
        assert_ne!(t, gen_adversarial(50, 7, 12).unwrap());
        let small = gen_adversarial(4, 2, 3).unwrap();
        assert_eq!(small.len(), 8);
    }

    #[test]
    fn zipf_is_deterministic_and_in_range() {
        let a = gen_zipf(100, 10_000, 0.8, 5).unwrap();
        assert_eq!(a, gen_zipf(100, 10_000, 0.8, 5).unwrap());
        assert!(a.requests().iter().all(|&r| r < 100));
        assert!(gen_zipf(10, 10, -1.0, 0).is_err());
    }

    #[test]
    fn zipf_alpha_zero_is_uniform() {
        let n = 20;
        let t = 200_000;
        let trace = gen_zipf(n, t, 0.0, 9).unwrap();
        let p = 1.0 / n as f64;
        let se = libm::sqrt(p * (1.0 - p) / t as f64);
        for c in trace.counts() {
            assert!((c as f64 / t as f64 - p).abs() < 4.0 * se);
        }
    }

    #[test]
    fn lifetime_example() {
        let t = Trace::from_keys(["a", "b", "a", "c", "a"]).unwrap();
        let s = lifetime_stats(&t);
        let a = s.items.iter().find(|it| it.id == 0).unwrap();
        assert_eq!((a.lifetime(), a.max_hits()), (4, 2));
        for id in [1, 2] {
            let it = s.items.iter().find(|it| it.id == id).unwrap();
            assert_eq!((it.lifetime(), it.max_hits()), (0, 0));
        }
        // Endpoint (T - n) / T.
        assert!((s.curve.last().unwrap() - 2.0 / 5.0).abs() < 1e-15);

        let single = Trace::from_keys(["x"; 6]).unwrap();
        let s = lifetime_stats(&single);
        assert_eq!((s.items[0].lifetime(), s.items[0].max_hits()), (5, 5));
    }

    #[test]
    fn reuse_example() {
        let t = Trace::from_keys(["a", "b", "a", "c", "a"]).unwrap();
        let cdf = reuse_distance_cdf(&t);
        assert_eq!(cdf.len(), 1);
        assert_eq!(cdf[0].mean_gap, 2.0);
        assert_eq!(cdf[0].cdf, 1.0);

        let periodic = Trace::from_dense((0..40).map(|t| t % 4).collect()).unwrap();
        assert!(reuse_distance_cdf(&periodic).iter().all(|p| p.mean_gap == 4.0));
    }
}
