use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use crate::rdf::TermId;

/// A scored candidate. Greater means better: higher weight first, then the
/// smaller term id on ties.
#[derive(Clone, Copy, Debug)]
pub struct Scored {
    pub weight: f64,
    pub id: TermId,
}

impl PartialEq for Scored {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Scored {}

impl PartialOrd for Scored {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Scored {
    fn cmp(&self, other: &Self) -> Ordering {
        self.weight
            .total_cmp(&other.weight)
            .then_with(|| other.id.cmp(&self.id))
    }
}

/// Keeps the `capacity` best candidates seen so far in `O(capacity)` space.
#[derive(Debug)]
pub struct TopK {
    heap: BinaryHeap<Reverse<Scored>>,
    capacity: usize,
}

impl TopK {
    pub fn new(capacity: usize) -> Self {
        Self {
            heap: BinaryHeap::with_capacity(capacity + 1),
            capacity,
        }
    }

    pub fn push(&mut self, id: TermId, weight: f64) {
        if self.capacity == 0 {
            return;
        }
        let c = Scored { weight, id };
        if self.heap.len() < self.capacity {
            self.heap.push(Reverse(c));
        } else if let Some(Reverse(worst)) = self.heap.peek() {
            if c > *worst {
                self.heap.pop();
                self.heap.push(Reverse(c));
            }
        }
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    /// Best first.
    pub fn into_sorted(self) -> Vec<Scored> {
        self.heap.into_sorted_vec().into_iter().map(|r| r.0).collect()
    }
}
