//! Fenwick tree over per-vertex attachment weights.
//!
//! Supports point updates and inverse-prefix search in `O(log n)`, which is
//! all that weighted sampling of a growing vertex set needs. Weights may be
//! fractional (degree + alpha with alpha in (-1, 0) is the interesting case),
//! so the tree stores `f64`.

#[derive(Debug, Clone)]
pub struct WeightIndex {
    // 1-based implicit tree; tree[0] unused
    tree: Vec<f64>,
    len: usize,
    total: f64,
    top_bit: usize,
}

impl WeightIndex {
    pub fn with_capacity(capacity: usize) -> Self {
        let capacity = capacity.max(1);
        Self {
            tree: vec![0.0; capacity + 1],
            len: 0,
            total: 0.0,
            top_bit: 1 << (usize::BITS - 1 - capacity.leading_zeros()),
        }
    }

    pub fn capacity(&self) -> usize {
        self.tree.len() - 1
    }

    /// Number of slots in use.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Running sum of all weights.
    pub fn total(&self) -> f64 {
        self.total
    }

    /// Append a slot with the given weight, growing the backing tree if full.
    pub fn push(&mut self, weight: f64) -> usize {
        if self.len == self.capacity() {
            self.grow();
        }
        let index = self.len;
        self.len += 1;
        self.add(index, weight);
        index
    }

    fn grow(&mut self) {
        let weights: Vec<f64> = (0..self.len).map(|i| self.weight(i)).collect();
        let mut bigger = Self::with_capacity(self.capacity() * 2);
        for w in weights {
            bigger.push(w);
        }
        *self = bigger;
    }

    pub fn add(&mut self, index: usize, delta: f64) {
        assert!(index < self.len, "index {index} out of range");
        self.total += delta;
        let mut i = index + 1;
        while i < self.tree.len() {
            self.tree[i] += delta;
            i += i & i.wrapping_neg();
        }
    }

    /// Sum of weights in slots `0..end`.
    pub fn prefix(&self, end: usize) -> f64 {
        let mut sum = 0.0;
        let mut i = end.min(self.len);
        while i > 0 {
            sum += self.tree[i];
            i -= i & i.wrapping_neg();
        }
        sum
    }

    pub fn weight(&self, index: usize) -> f64 {
        self.prefix(index + 1) - self.prefix(index)
    }

    /// Slot `i` with `prefix(i) <= target < prefix(i + 1)`.
    ///
    /// Targets at or beyond the total (possible through rounding) map to the
    /// last slot.
    pub fn find(&self, target: f64) -> usize {
        debug_assert!(!self.is_empty());
        let mut pos = 0;
        let mut remaining = target;
        let mut step = self.top_bit;
        while step > 0 {
            let next = pos + step;
            if next < self.tree.len() && self.tree[next] <= remaining {
                pos = next;
                remaining -= self.tree[next];
            }
            step >>= 1;
        }
        pos.min(self.len - 1)
    }

    /// Weighted draw given a uniform `u` in `[0, 1)`.
    pub fn sample(&self, u: f64) -> usize {
        self.find(u * self.total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prefix_sums_track_updates() {
        let weights = [2.0, 1.0, 1.0, 3.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0];
        let mut idx = WeightIndex::with_capacity(4);
        for w in weights {
            idx.push(w);
        }
        assert!(idx.capacity() >= weights.len());
        let mut acc = 0.0;
        for (i, w) in weights.iter().enumerate() {
            assert_eq!(idx.prefix(i), acc);
            assert_eq!(idx.weight(i), *w);
            acc += w;
        }
        assert_eq!(idx.total(), acc);
        idx.add(3, 6.0);
        assert_eq!(idx.prefix(5), 2.0 + 1.0 + 1.0 + 9.0 + 2.0);
    }

    #[test]
    fn find_respects_boundaries() {
        let mut idx = WeightIndex::with_capacity(8);
        for w in [0.5, 1.5, 0.5] {
            idx.push(w);
        }
        assert_eq!(idx.find(0.0), 0);
        assert_eq!(idx.find(0.49), 0);
        assert_eq!(idx.find(0.5), 1);
        assert_eq!(idx.find(1.99), 1);
        assert_eq!(idx.find(2.0), 2);
        assert_eq!(idx.find(2.49), 2);
        // beyond the total: clamps to the last live slot, never an empty one
        assert_eq!(idx.find(10.0), 2);
    }

    #[test]
    fn zero_weight_slots_are_never_found() {
        let mut idx = WeightIndex::with_capacity(6);
        for w in [1.0, 0.0, 0.0, 1.0] {
            idx.push(w);
        }
        for k in 0..200 {
            let hit = idx.find(k as f64 / 100.0);
            assert!(hit == 0 || hit == 3);
        }
    }
}
