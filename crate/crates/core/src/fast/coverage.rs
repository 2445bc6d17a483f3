//! Coverage segment trees over the elementary intervals of one dimension.
//!
//! The elementary intervals are `[breaks[j], breaks[j + 1])` for the sorted
//! distinct center coordinates of a dimension. Every open leaf registers
//! its extent `[min, max)` as a range of elementary intervals. Each tree node
//! keeps
//!
//! * `cnt`: extents whose canonical decomposition contains the node,
//! * `covered`: weight of the node's elementary intervals covered by at
//!   least one extent (the union length when weights are lengths),
//! * `min`: smallest cover count inside the subtree, used to find
//!   intervals that just lost their last extent.

use crate::error::{Error, Result};
use crate::geometry::DimIntervals;
use crate::model::ThresholdCut;
use crate::rng::RngStream;

const DEAD: u32 = u32::MAX / 2;

#[derive(Debug, Clone, Copy, Default)]
struct Cell {
    cnt: u32,
    min: u32,
    covered: f64,
}

#[derive(Debug, Clone)]
pub struct CoverageTree {
    breaks: Vec<f64>,
    n: usize,
    /// `n` rounded up to a power of two; leaves past `n` weigh nothing.
    width: usize,
    nodes: Vec<Cell>,
    /// Weight of each node's elementary intervals.
    total: Vec<f64>,
    /// Elementary intervals already reported as uncovered.
    dead: Vec<bool>,
}

impl CoverageTree {
    /// A tree over `di`'s elementary intervals weighted by their lengths.
    pub fn lengths(di: &DimIntervals) -> Self {
        let weights: Vec<f64> = (0..di.len())
            .map(|j| {
                let (a, b) = di.interval(j);
                b - a
            })
            .collect();
        Self::with_weights(di.breaks().to_vec(), &weights)
    }

    pub fn with_weights(breaks: Vec<f64>, weights: &[f64]) -> Self {
        let n = weights.len();
        let width = n.max(1).next_power_of_two();
        let size = 2 * width;
        let mut tree = Self {
            breaks,
            n,
            width,
            nodes: vec![Cell::default(); size],
            total: vec![0.0; size],
            dead: vec![false; width],
        };
        if n > 0 {
            tree.build(1, 0, width, weights);
        }
        tree
    }

    fn build(&mut self, v: usize, lo: usize, hi: usize, w: &[f64]) {
        if hi - lo == 1 {
            self.total[v] = w.get(lo).copied().unwrap_or(0.0);
            self.dead[lo] = lo >= w.len();
        } else {
            let mid = (lo + hi) / 2;
            self.build(2 * v, lo, mid, w);
            self.build(2 * v + 1, mid, hi, w);
            self.total[v] = self.total[2 * v] + self.total[2 * v + 1];
        }
        self.pull(v);
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    /// Covered weight of the whole dimension.
    pub fn covered(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.nodes[1].covered
        }
    }

    /// Elementary-interval range `[l, r)` of the extent `[lo, hi]`.
    pub fn rank_range(&self, lo: f64, hi: f64) -> (usize, usize) {
        let rank = |v: f64| self.breaks.partition_point(|&b| b < v);
        (rank(lo), rank(hi))
    }

    /// Elementary interval containing `theta`, if any.
    pub fn locate(&self, theta: f64) -> Option<usize> {
        if self.n == 0 || theta < self.breaks[0] || theta >= self.breaks[self.n] {
            return None;
        }
        Some(self.breaks.partition_point(|&b| b <= theta) - 1)
    }

    /// Adds one cover to `[l, r)`.
    pub fn insert(&mut self, l: usize, r: usize) {
        if l < r {
            self.update(l, r, true);
        }
    }

    /// Removes one cover from `[l, r)`, which must have been inserted.
    pub fn remove(&mut self, l: usize, r: usize) {
        if l < r {
            self.update(l, r, false);
        }
    }

    /// Bottom-up walk over the canonical nodes of `[l, r)`, then a pull of
    /// the two boundary paths.
    fn update(&mut self, l: usize, r: usize, add: bool) {
        let (l0, r0) = (l + self.width, r - 1 + self.width);
        let (mut a, mut b) = (l0, r0 + 1);
        while a < b {
            if a & 1 == 1 {
                self.apply(a, add);
                a += 1;
            }
            if b & 1 == 1 {
                b -= 1;
                self.apply(b, add);
            }
            a >>= 1;
            b >>= 1;
        }
        let (mut a, mut b) = (l0 >> 1, r0 >> 1);
        while a != b {
            self.pull(a);
            self.pull(b);
            a >>= 1;
            b >>= 1;
        }
        self.pull(a);
        a >>= 1;
        // nothing above the meeting point was touched: stop once a pull is a no-op
        while a >= 1 {
            let before = self.nodes[a];
            self.pull(a);
            let after = self.nodes[a];
            if after.min == before.min && after.covered.to_bits() == before.covered.to_bits() {
                break;
            }
            a >>= 1;
        }
    }

    fn apply(&mut self, v: usize, add: bool) {
        if add {
            self.nodes[v].cnt += 1;
        } else {
            debug_assert!(self.nodes[v].cnt > 0);
            self.nodes[v].cnt -= 1;
        }
        self.pull(v);
    }

    fn pull(&mut self, v: usize) {
        if v >= self.width {
            let base = if self.dead[v - self.width] { DEAD } else { 0 };
            self.nodes[v].min = self.nodes[v].cnt + base;
            self.nodes[v].covered = if self.nodes[v].cnt > 0 { self.total[v] } else { 0.0 };
        } else {
            let (x, y) = (self.nodes[2 * v], self.nodes[2 * v + 1]);
            let total = self.total[v];
            let node = &mut self.nodes[v];
            node.min = node.cnt + x.min.min(y.min);
            node.covered = if node.cnt > 0 { total } else { x.covered + y.covered };
        }
    }

    /// Elementary intervals in `[l, r)` that no extent covers and that were
    /// not reported before. Each interval is reported at most once.
    pub fn take_uncovered(&mut self, l: usize, r: usize) -> Vec<usize> {
        let mut out = Vec::new();
        if l < r {
            self.collect_zero(1, 0, self.width, l, r, 0, &mut out);
        }
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn collect_zero(&mut self, v: usize, lo: usize, hi: usize, l: usize, r: usize, acc: u32, out: &mut Vec<usize>) {
        if r <= lo || hi <= l || acc + self.nodes[v].min > 0 {
            return;
        }
        if hi - lo == 1 {
            self.dead[lo] = true;
            out.push(lo);
        } else {
            let mid = (lo + hi) / 2;
            let acc = acc + self.nodes[v].cnt;
            self.collect_zero(2 * v, lo, mid, l, r, acc, out);
            self.collect_zero(2 * v + 1, mid, hi, l, r, acc, out);
        }
        self.pull(v);
    }

    /// Elementary interval holding covered weight position `target`
    /// (`0 <= target < covered()`), plus the leftover offset inside it.
    pub fn find_covered(&self, mut target: f64) -> (usize, f64) {
        let (mut v, mut lo, mut hi) = (1, 0, self.width);
        let mut full = false;
        while hi - lo > 1 {
            full |= self.nodes[v].cnt > 0;
            let mid = (lo + hi) / 2;
            let left = if full {
                self.total[2 * v]
            } else {
                self.nodes[2 * v].covered
            };
            let right = if full {
                self.total[2 * v + 1]
            } else {
                self.nodes[2 * v + 1].covered
            };
            if target < left || right <= 0.0 {
                (v, hi) = (2 * v, mid);
            } else {
                target -= left;
                (v, lo) = (2 * v + 1, mid);
            }
        }
        (lo, target)
    }

    /// Whether elementary interval `j` is covered by some extent.
    pub fn is_covered(&self, j: usize) -> bool {
        let (mut v, mut lo, mut hi) = (1, 0, self.width);
        loop {
            if self.nodes[v].cnt > 0 {
                return true;
            }
            if hi - lo == 1 {
                return false;
            }
            let mid = (lo + hi) / 2;
            if j < mid {
                (v, hi) = (2 * v, mid);
            } else {
                (v, lo) = (2 * v + 1, mid);
            }
        }
    }

    /// Samples `theta` uniformly on the covered part (weights must be lengths).
    pub fn sample_uniform(&self, rng: &mut RngStream) -> Result<f64> {
        let covered = self.covered();
        if !(covered > 0.0) {
            return Err(Error::NoCut("no covered length in this dimension".into()));
        }
        let (j, _) = self.find_covered(rng.uniform() * covered);
        let (a, b) = (self.breaks[j], self.breaks[j + 1]);
        Ok(a + rng.uniform() * (b - a))
    }
}

/// Per-dimension coverage trees over the extents of the open leaves.
#[derive(Debug, Clone)]
pub struct DimensionIntervalIndex {
    dims: Vec<CoverageTree>,
    /// Registered elementary range per `(leaf, dim)`.
    slots: Vec<Vec<Option<(usize, usize)>>>,
}

impl DimensionIntervalIndex {
    pub fn new(dims: Vec<CoverageTree>) -> Self {
        Self {
            dims,
            slots: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    pub fn tree(&self, dim: usize) -> &CoverageTree {
        &self.dims[dim]
    }

    pub fn union_length(&self, dim: usize) -> f64 {
        self.dims[dim].covered()
    }

    pub fn total_union_length(&self) -> f64 {
        self.dims.iter().map(CoverageTree::covered).sum()
    }

    /// Registers `leaf`'s extent `[lo, hi]` in dimension `dim`.
    pub fn insert(&mut self, leaf: u32, dim: usize, lo: f64, hi: f64) {
        let (l, r) = self.dims[dim].rank_range(lo, hi);
        if l >= r {
            return;
        }
        self.dims[dim].insert(l, r);
        let slot = leaf as usize;
        if self.slots.len() <= slot {
            self.slots.resize(slot + 1, Vec::new());
        }
        if self.slots[slot].is_empty() {
            self.slots[slot] = vec![None; self.dims.len()];
        }
        debug_assert!(self.slots[slot][dim].is_none(), "leaf extent registered twice");
        self.slots[slot][dim] = Some((l, r));
    }

    /// Moves `leaf`'s extent in `dim` to `[lo, hi]`. Returns the old
    /// elementary range when it changed.
    pub fn update_extent(&mut self, leaf: u32, dim: usize, lo: f64, hi: f64) -> Option<(usize, usize, usize)> {
        let (l, r) = self.dims[dim].rank_range(lo, hi);
        let old = self.slots.get(leaf as usize).and_then(|s| s.get(dim).copied().flatten());
        match old {
            Some((ol, or)) if (ol, or) == (l, r) => None,
            Some((ol, or)) => {
                self.dims[dim].remove(ol, or);
                self.slots[leaf as usize][dim] = None;
                self.insert(leaf, dim, lo, hi);
                Some((dim, ol, or))
            }
            None => {
                self.insert(leaf, dim, lo, hi);
                None
            }
        }
    }

    /// Drops all of `leaf`'s extents; returns the elementary range each one covered.
    pub fn remove_leaf(&mut self, leaf: u32) -> Vec<(usize, usize, usize)> {
        let Some(slots) = self.slots.get_mut(leaf as usize) else {
            return Vec::new();
        };
        let mut ranges = Vec::new();
        for (dim, slot) in slots.iter_mut().enumerate() {
            if let Some((l, r)) = slot.take() {
                self.dims[dim].remove(l, r);
                ranges.push((dim, l, r));
            }
        }
        ranges
    }

    /// Newly uncovered elementary intervals of `dim` within `[l, r)`.
    pub fn take_uncovered(&mut self, dim: usize, l: usize, r: usize) -> Vec<usize> {
        self.dims[dim].take_uncovered(l, r)
    }

    /// A uniform cut conditioned on splitting some registered leaf: the
    /// dimension is drawn proportionally to its union length and `theta`
    /// uniformly on that union.
    pub fn sample_conditioned_uniform(&self, rng: &mut RngStream) -> Result<ThresholdCut> {
        let total = self.total_union_length();
        if !(total > 0.0) {
            return Err(Error::NoCut("every leaf is a singleton".into()));
        }
        let mut target = rng.uniform() * total;
        let mut pick = None;
        for (dim, t) in self.dims.iter().enumerate() {
            let c = t.covered();
            if c <= 0.0 {
                continue;
            }
            pick = Some(dim);
            if target < c {
                break;
            }
            target -= c;
        }
        let dim = pick.expect("positive union length");
        Ok(ThresholdCut::new(dim, self.dims[dim].sample_uniform(rng)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tree(breaks: &[f64]) -> CoverageTree {
        let w: Vec<f64> = breaks.windows(2).map(|p| p[1] - p[0]).collect();
        CoverageTree::with_weights(breaks.to_vec(), &w)
    }

    fn brute_union(extents: &[(f64, f64)]) -> f64 {
        let mut s: Vec<(f64, f64)> = extents.to_vec();
        s.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut total = 0.0;
        let mut cur: Option<(f64, f64)> = None;
        for (a, b) in s {
            match cur {
                Some((ca, cb)) if a <= cb => cur = Some((ca, cb.max(b))),
                Some((ca, cb)) => {
                    total += cb - ca;
                    cur = Some((a, b));
                }
                None => cur = Some((a, b)),
            }
        }
        total + cur.map_or(0.0, |(a, b)| b - a)
    }

    #[test]
    fn union_length_tracks_inserts_and_removes() {
        let mut t = tree(&[0.0, 1.0, 2.0, 4.0, 8.0, 9.0]);
        let (l, r) = t.rank_range(0.0, 2.0);
        t.insert(l, r);
        let (l2, r2) = t.rank_range(1.0, 8.0);
        t.insert(l2, r2);
        assert_eq!(t.covered(), brute_union(&[(0.0, 2.0), (1.0, 8.0)]));
        t.remove(l, r);
        assert_eq!(t.covered(), 7.0);
        assert_eq!(t.take_uncovered(l, r), vec![0]);
        assert!(t.take_uncovered(l, r).is_empty());
        assert!(!t.is_covered(0) && t.is_covered(1) && !t.is_covered(4));
    }

    #[test]
    fn disjoint_extents_split_mass_evenly() {
        let mut idx = DimensionIntervalIndex::new(vec![tree(&[0.0, 1.0, 5.0, 6.0])]);
        idx.insert(0, 0, 0.0, 1.0);
        idx.insert(1, 0, 5.0, 6.0);
        assert_eq!(idx.total_union_length(), 2.0);
        let mut rng = RngStream::new(17);
        let n = 100_000;
        let mut low = 0;
        for _ in 0..n {
            let cut = idx.sample_conditioned_uniform(&mut rng).unwrap();
            assert!((0.0..1.0).contains(&cut.theta) || (5.0..6.0).contains(&cut.theta));
            low += (cut.theta < 1.0) as usize;
        }
        let sigma = (0.25 / n as f64).sqrt();
        assert!((low as f64 / n as f64 - 0.5).abs() < 3.0 * sigma);
    }

    #[test]
    fn single_extent_gives_uniform_theta() {
        let mut idx = DimensionIntervalIndex::new(vec![tree(&[0.0, 0.25, 1.0])]);
        idx.insert(3, 0, 0.0, 1.0);
        let mut rng = RngStream::new(1);
        let n = 50_000;
        let below = (0..n)
            .filter(|_| idx.sample_conditioned_uniform(&mut rng).unwrap().theta < 0.1)
            .count();
        assert!((below as f64 / n as f64 - 0.1).abs() < 0.01);
    }
}
