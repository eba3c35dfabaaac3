use alloc::vec;
use alloc::vec::Vec;

use super::{HitOutcome, Policy};
use crate::{Error, Result};

const NIL: u32 = u32::MAX;

/// Least-recently-used cache over a dense catalog, as an intrusive doubly
/// linked list threaded through per-item arrays.
#[derive(Debug, Clone)]
pub struct Lru {
    prev: Vec<u32>,
    next: Vec<u32>,
    in_cache: Vec<bool>,
    head: u32,
    tail: u32,
    len: usize,
    capacity: usize,
    t: u64,
}

impl Lru {
    pub fn new(n: usize, capacity: usize) -> Result<Self> {
        if capacity == 0 || n == 0 {
            return Err(Error::InvalidConfig("LRU needs a positive capacity and catalog"));
        }
        Ok(Self {
            prev: vec![NIL; n],
            next: vec![NIL; n],
            in_cache: vec![false; n],
            head: NIL,
            tail: NIL,
            len: 0,
            capacity,
            t: 0,
        })
    }

    pub fn is_cached(&self, i: usize) -> bool {
        self.in_cache[i]
    }

    fn unlink(&mut self, i: u32) {
        let (p, n) = (self.prev[i as usize], self.next[i as usize]);
        if p == NIL {
            self.head = n;
        } else {
            self.next[p as usize] = n;
        }
        if n == NIL {
            self.tail = p;
        } else {
            self.prev[n as usize] = p;
        }
        self.prev[i as usize] = NIL;
        self.next[i as usize] = NIL;
    }

    fn push_front(&mut self, i: u32) {
        self.next[i as usize] = self.head;
        self.prev[i as usize] = NIL;
        if self.head != NIL {
            self.prev[self.head as usize] = i;
        }
        self.head = i;
        if self.tail == NIL {
            self.tail = i;
        }
    }

    pub fn step(&mut self, j: usize) -> Result<HitOutcome> {
        if j >= self.in_cache.len() {
            return Err(Error::ItemOutOfRange { item: j, n: self.in_cache.len() });
        }
        let hit = self.in_cache[j];
        let outcome = HitOutcome { t: self.t, hit, reward: if hit { 1.0 } else { 0.0 } };
        self.t += 1;
        let id = j as u32;
        if hit {
            self.unlink(id);
        } else {
            if self.len == self.capacity {
                let victim = self.tail;
                self.unlink(victim);
                self.in_cache[victim as usize] = false;
                self.len -= 1;
            }
            self.in_cache[j] = true;
            self.len += 1;
        }
        self.push_front(id);
        Ok(outcome)
    }
}

impl Policy for Lru {
    fn name(&self) -> &'static str {
        "lru"
    }

    fn request(&mut self, item: usize) -> Result<HitOutcome> {
        self.step(item)
    }

    fn occupancy(&self) -> usize {
        self.len
    }
}
