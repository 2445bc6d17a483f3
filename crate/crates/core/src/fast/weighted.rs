//! Sum trees over the live `D_p` intervals of one dimension.

use crate::error::{Error, Result};
use crate::geometry::{DimIntervals, DimensionIntervalSet};
use crate::model::ThresholdCut;
use crate::rng::RngStream;
use crate::sampling::theta_inverse_cdf_unchecked;

/// Array-backed sum tree over the elementary intervals of one dimension,
/// weighted `|b - a|^p`. Intervals can only be removed, never revived.
#[derive(Debug, Clone)]
pub struct WeightedIntervalSegTree {
    breaks: Vec<f64>,
    n: usize,
    cap: usize,
    sums: Vec<f64>,
}

impl WeightedIntervalSegTree {
    pub fn new(di: &DimIntervals) -> Self {
        let n = di.len();
        let cap = n.next_power_of_two().max(1);
        let mut sums = vec![0.0; 2 * cap];
        sums[cap..cap + n].copy_from_slice(di.weights());
        for v in (1..cap).rev() {
            sums[v] = sums[2 * v] + sums[2 * v + 1];
        }
        Self {
            breaks: di.breaks().to_vec(),
            n,
            cap,
            sums,
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn interval(&self, j: usize) -> (f64, f64) {
        (self.breaks[j], self.breaks[j + 1])
    }

    /// Current weight of interval `j` (0 once removed).
    pub fn weight(&self, j: usize) -> f64 {
        self.sums[self.cap + j]
    }

    pub fn is_live(&self, j: usize) -> bool {
        self.weight(j) > 0.0
    }

    /// Live weight of the whole dimension.
    pub fn total(&self) -> f64 {
        self.sums[1]
    }

    /// Zeroes interval `j`.
    pub fn remove(&mut self, j: usize) {
        let mut v = self.cap + j;
        self.sums[v] = 0.0;
        while v > 1 {
            v /= 2;
            self.sums[v] = self.sums[2 * v] + self.sums[2 * v + 1];
        }
    }

    /// Live weight of intervals `l..r`.
    pub fn range_sum(&self, l: usize, r: usize) -> f64 {
        let (mut l, mut r) = (l + self.cap, r.min(self.n) + self.cap);
        let mut acc = 0.0;
        while l < r {
            if l & 1 == 1 {
                acc += self.sums[l];
                l += 1;
            }
            if r & 1 == 1 {
                r -= 1;
                acc += self.sums[r];
            }
            l /= 2;
            r /= 2;
        }
        acc
    }

    /// Live interval holding weight position `target`, `0 <= target < total()`.
    pub fn find(&self, mut target: f64) -> usize {
        let mut v = 1;
        while v < self.cap {
            let left = self.sums[2 * v];
            if target < left || self.sums[2 * v + 1] <= 0.0 {
                v *= 2;
            } else {
                target -= left;
                v = 2 * v + 1;
            }
        }
        v - self.cap
    }
}

/// One sum tree per dimension.
pub fn weighted_trees(set: &DimensionIntervalSet) -> Vec<WeightedIntervalSegTree> {
    (0..set.dim())
        .map(|i| WeightedIntervalSegTree::new(set.dimension(i)))
        .collect()
}

/// `D_p` restricted to the live intervals: a dimension proportional to its
/// live weight, an interval proportional to `|b - a|^p`, then `theta` from
/// the within-interval law.
pub fn sample_dp_fast(trees: &[WeightedIntervalSegTree], p: f64, rng: &mut RngStream) -> Result<ThresholdCut> {
    let total: f64 = trees.iter().map(WeightedIntervalSegTree::total).sum();
    if !(total > 0.0) {
        return Err(Error::NoCut("no live interval left".into()));
    }
    let mut target = rng.uniform() * total;
    let mut pick = None;
    for (dim, t) in trees.iter().enumerate() {
        let w = t.total();
        if w <= 0.0 {
            continue;
        }
        pick = Some(dim);
        if target < w {
            break;
        }
        target -= w;
    }
    let dim = pick.expect("positive live weight");
    let tree = &trees[dim];
    let j = tree.find(rng.uniform() * tree.total());
    let (a, b) = tree.interval(j);
    Ok(ThresholdCut::new(dim, theta_inverse_cdf_unchecked(a, b, p, rng.uniform())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::all_intervals;
    use crate::model::CenterSet;

    fn set(xs: &[f64], p: f64) -> DimensionIntervalSet {
        let c = CenterSet::from_coords(xs.iter().map(|&x| vec![x]).collect()).unwrap();
        all_intervals(&c, p).unwrap()
    }

    #[test]
    fn sums_and_removals() {
        let s = set(&[0.0, 1.0, 3.0, 6.0], 2.0);
        let mut t = WeightedIntervalSegTree::new(s.dimension(0));
        assert_eq!(t.total(), 1.0 + 4.0 + 9.0);
        assert_eq!(t.range_sum(1, 3), 13.0);
        t.remove(1);
        assert_eq!(t.total(), 10.0);
        assert!(!t.is_live(1) && t.is_live(2));
        assert_eq!(t.find(0.5), 0);
        assert_eq!(t.find(1.0), 2);
        assert_eq!(t.find(9.99), 2);
    }

    #[test]
    fn matches_full_dp_law_when_everything_is_live() {
        let s = set(&[0.0, 1.0, 3.0], 2.0);
        let trees = weighted_trees(&s);
        let mut rng = RngStream::new(8);
        let n = 100_000;
        let first = (0..n)
            .filter(|_| sample_dp_fast(&trees, 2.0, &mut rng).unwrap().theta < 1.0)
            .count();
        let q = 0.2;
        let sigma = (q * (1.0 - q) / n as f64).sqrt();
        assert!((first as f64 / n as f64 - q).abs() < 4.0 * sigma);
    }

    #[test]
    fn never_samples_removed_intervals() {
        let s = set(&[0.0, 1.0, 2.0, 3.0], 1.0);
        let mut trees = weighted_trees(&s);
        trees[0].remove(0);
        trees[0].remove(2);
        let mut rng = RngStream::new(9);
        for _ in 0..10_000 {
            let cut = sample_dp_fast(&trees, 1.0, &mut rng).unwrap();
            assert!((1.0..=2.0).contains(&cut.theta));
        }
        trees[0].remove(1);
        assert!(sample_dp_fast(&trees, 1.0, &mut rng).is_err());
    }
}
