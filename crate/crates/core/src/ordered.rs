use alloc::collections::BTreeSet;
use core::cmp::Ordering;

/// `f64` with a total order, so it can key a `BTreeSet`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Key(pub f64);

impl PartialEq for Key {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Ordered multiset of `(value, id)` pairs that counts its own mutations.
#[derive(Debug, Clone, Default)]
pub(crate) struct OrderedIndex {
    set: BTreeSet<(Key, u32)>,
    mutations: u64,
}

impl OrderedIndex {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_sorted_iter(entries: impl Iterator<Item = (f64, u32)>) -> Self {
        Self {
            set: entries.map(|(v, id)| (Key(v), id)).collect(),
            mutations: 0,
        }
    }

    /// Replaces the contents, keeping the mutation counter.
    pub fn rebuild(&mut self, entries: impl Iterator<Item = (f64, u32)>) {
        self.set = entries.map(|(v, id)| (Key(v), id)).collect();
    }

    pub fn insert(&mut self, value: f64, id: u32) {
        self.mutations += 1;
        let fresh = self.set.insert((Key(value), id));
        debug_assert!(fresh, "duplicate index entry for {id}");
    }

    pub fn remove(&mut self, value: f64, id: u32) -> bool {
        self.mutations += 1;
        self.set.remove(&(Key(value), id))
    }

    pub fn first(&self) -> Option<(f64, u32)> {
        self.set.first().map(|&(k, id)| (k.0, id))
    }

    pub fn pop_first(&mut self) -> Option<(f64, u32)> {
        self.mutations += 1;
        self.set.pop_first().map(|(k, id)| (k.0, id))
    }

    pub fn len(&self) -> usize {
        self.set.len()
    }

    pub fn is_empty(&self) -> bool {
        self.set.is_empty()
    }

    pub fn mutations(&self) -> u64 {
        self.mutations
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, u32)> + '_ {
        self.set.iter().map(|&(k, id)| (k.0, id))
    }
}
