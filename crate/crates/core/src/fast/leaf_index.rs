//! Per-leaf coordinate orders.

use ordered_float::OrderedFloat;

use crate::error::{Error, Result};
use crate::model::{CenterSet, ThresholdCut};

pub type LeafId = u32;

/// `(coordinate, center index)`, ordered by coordinate then index.
pub type CoordKey = (OrderedFloat<f64>, u32);

/// Outcome of [`LeafCoordinateIndex::split_leaf`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LeafSplit {
    /// Leaf holding the centers with `x_i <= theta`.
    pub left: LeafId,
    pub right: LeafId,
    pub left_size: usize,
    pub right_size: usize,
}

/// For every leaf, its centers sorted along each dimension; singleton
/// leaves keep just their center.
///
/// A split moves the side that is shorter along the cut into a fresh leaf.
/// The other side keeps the old id and its arrays: moved centers only change
/// owner and are skipped as stale until the leaf is compacted, which happens
/// once stale entries outnumber live ones. Both ends of every array are
/// kept live.
#[derive(Debug, Clone)]
pub struct LeafCoordinateIndex {
    dim: usize,
    /// `sorted[i][r]`: coordinate of rank `r` along `i`.
    sorted: Vec<Vec<f64>>,
    /// `rank[j * dim + i]`, by `(x_i, j)`.
    rank: Vec<u32>,
    owner: Vec<LeafId>,
    leaves: Vec<Slot>,
}

#[derive(Debug, Clone)]
enum Slot {
    Many(Group),
    One(u32),
}

#[derive(Debug, Clone)]
struct Group {
    live: usize,
    /// Entries per dimension in `data`.
    stride: usize,
    /// Live window `[start, end)` of each dimension's block.
    win: Vec<(u32, u32)>,
    data: Vec<u32>,
}

impl Group {
    fn window(&self, i: usize) -> &[u32] {
        let (s, e) = self.win[i];
        &self.data[i * self.stride + s as usize..i * self.stride + e as usize]
    }
}

impl LeafCoordinateIndex {
    /// One leaf, id 0, holding every center.
    pub fn new(centers: &CenterSet) -> Self {
        let (k, dim) = (centers.k(), centers.dim());
        let mut sorted = Vec::with_capacity(dim);
        let mut rank = vec![0u32; k * dim];
        let mut data = Vec::with_capacity(k * dim);
        for i in 0..dim {
            let mut o: Vec<u32> = (0..k as u32).collect();
            o.sort_unstable_by(|&a, &b| {
                centers.coord(a as usize, i).total_cmp(&centers.coord(b as usize, i)).then(a.cmp(&b))
            });
            for (r, &j) in o.iter().enumerate() {
                rank[j as usize * dim + i] = r as u32;
            }
            sorted.push(o.iter().map(|&j| centers.coord(j as usize, i)).collect());
            data.extend_from_slice(&o);
        }
        let root = if k == 1 {
            Slot::One(0)
        } else {
            Slot::Many(Group {
                live: k,
                stride: k,
                win: vec![(0, k as u32); dim],
                data,
            })
        };
        Self {
            dim,
            sorted,
            rank,
            owner: vec![0; k],
            leaves: vec![root],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn contains(&self, leaf: LeafId) -> bool {
        (leaf as usize) < self.leaves.len()
    }

    fn group(&self, leaf: LeafId) -> &Group {
        match &self.leaves[leaf as usize] {
            Slot::Many(g) => g,
            Slot::One(_) => panic!("leaf {leaf} is a singleton"),
        }
    }

    fn rank_of(&self, j: u32, i: usize) -> u32 {
        self.rank[j as usize * self.dim + i]
    }

    fn key(&self, j: u32, i: usize) -> CoordKey {
        (OrderedFloat(self.sorted[i][self.rank_of(j, i) as usize]), j)
    }

    /// Ranks along `cut.dim` below this one have `x <= theta`.
    fn cut_rank(&self, cut: ThresholdCut) -> u32 {
        self.sorted[cut.dim].partition_point(|&x| x <= cut.theta) as u32
    }

    /// Window of `leaf` along the cut and the split position inside it.
    fn cut_window(&self, leaf: LeafId, cut: ThresholdCut) -> (&[u32], usize) {
        let t = self.cut_rank(cut);
        let w = self.group(leaf).window(cut.dim);
        (w, w.partition_point(|&j| self.rank_of(j, cut.dim) < t))
    }

    pub fn size(&self, leaf: LeafId) -> usize {
        match &self.leaves[leaf as usize] {
            Slot::Many(g) => g.live,
            Slot::One(_) => 1,
        }
    }

    /// Center indices of `leaf`, ordered by their first coordinate.
    pub fn members(&self, leaf: LeafId) -> Vec<usize> {
        match &self.leaves[leaf as usize] {
            Slot::Many(g) => g
                .window(0)
                .iter()
                .filter(|&&j| self.owner[j as usize] == leaf)
                .map(|&j| j as usize)
                .collect(),
            Slot::One(j) => vec![*j as usize],
        }
    }

    /// Centers of `leaf` with the smallest and largest `x_dim`.
    pub fn extremes(&self, leaf: LeafId, dim: usize) -> (u32, u32) {
        match &self.leaves[leaf as usize] {
            Slot::Many(g) => {
                let w = g.window(dim);
                (w[0], w[w.len() - 1])
            }
            Slot::One(j) => (*j, *j),
        }
    }

    /// `[min, max]` of `leaf` along `dim`.
    pub fn extent(&self, leaf: LeafId, dim: usize) -> (f64, f64) {
        let (a, b) = self.extremes(leaf, dim);
        (self.key(a, dim).0 .0, self.key(b, dim).0 .0)
    }

    /// Members with `x_dim <= theta`, nearest to the cut first.
    pub fn left_of(&self, leaf: LeafId, cut: ThresholdCut) -> impl Iterator<Item = CoordKey> + '_ {
        let (w, pos) = self.cut_window(leaf, cut);
        w[..pos]
            .iter()
            .rev()
            .filter(move |&&j| self.owner[j as usize] == leaf)
            .map(move |&j| self.key(j, cut.dim))
    }

    /// Members with `x_dim > theta`, nearest to the cut first.
    pub fn right_of(&self, leaf: LeafId, cut: ThresholdCut) -> impl Iterator<Item = CoordKey> + '_ {
        let (w, pos) = self.cut_window(leaf, cut);
        w[pos..]
            .iter()
            .filter(move |&&j| self.owner[j as usize] == leaf)
            .map(move |&j| self.key(j, cut.dim))
    }

    /// Live sizes of both sides, counting only the shorter stretch of the array.
    pub fn split_sizes(&self, leaf: LeafId, cut: ThresholdCut) -> (usize, usize) {
        let (w, pos) = self.cut_window(leaf, cut);
        let live = |s: &[u32]| s.iter().filter(|&&j| self.owner[j as usize] == leaf).count();
        let total = self.size(leaf);
        if pos <= w.len() - pos {
            let n = live(&w[..pos]);
            (n, total - n)
        } else {
            let n = live(&w[pos..]);
            (total - n, n)
        }
    }

    pub fn split_leaf(&mut self, leaf: LeafId, cut: ThresholdCut) -> Result<LeafSplit> {
        if !self.contains(leaf) {
            return Err(Error::Structural(format!("leaf {leaf} does not exist")));
        }
        if self.size(leaf) < 2 {
            return Err(Error::NoCut(format!("leaf {leaf} is a singleton")));
        }
        let (nl, nr) = self.split_sizes(leaf, cut);
        if nl == 0 || nr == 0 {
            return Err(Error::NoCut(format!("cut {cut:?} does not split leaf {leaf}")));
        }
        let fresh = self.leaves.len() as LeafId;
        let (w, pos) = self.cut_window(leaf, cut);
        let move_left = pos <= w.len() - pos;
        let moved: Vec<u32> = if move_left { &w[..pos] } else { &w[pos..] }
            .iter()
            .copied()
            .filter(|&j| self.owner[j as usize] == leaf)
            .collect();
        for &j in &moved {
            self.owner[j as usize] = fresh;
        }

        let Slot::Many(mut g) = std::mem::replace(&mut self.leaves[leaf as usize], Slot::One(u32::MAX)) else {
            unreachable!("checked above");
        };
        let m = moved.len();
        let new_slot = if m == 1 {
            Slot::One(moved[0])
        } else {
            let mut data = Vec::with_capacity(m * self.dim);
            for i in 0..self.dim {
                let w = g.window(i);
                if i == cut.dim {
                    data.extend_from_slice(&moved);
                } else if m * (usize::BITS - m.leading_zeros()) as usize <= w.len() {
                    let at = data.len();
                    data.extend_from_slice(&moved);
                    data[at..].sort_unstable_by_key(|&j| self.rank_of(j, i));
                } else {
                    data.extend(w.iter().copied().filter(|&j| self.owner[j as usize] == fresh));
                }
            }
            Slot::Many(Group {
                live: m,
                stride: m,
                win: vec![(0, m as u32); self.dim],
                data,
            })
        };

        g.live -= m;
        if move_left {
            g.win[cut.dim].0 += pos as u32;
        } else {
            g.win[cut.dim].1 = g.win[cut.dim].0 + pos as u32;
        }
        let kept = if g.live == 1 {
            let w = g.window(cut.dim);
            Slot::One(*w.iter().find(|&&j| self.owner[j as usize] == leaf).expect("one live member"))
        } else {
            self.trim(&mut g, leaf);
            if g.window(0).len() > 2 * g.live {
                self.compact(&mut g, leaf);
            }
            Slot::Many(g)
        };
        self.leaves[leaf as usize] = kept;
        self.leaves.push(new_slot);
        let (left, right) = if move_left { (fresh, leaf) } else { (leaf, fresh) };
        Ok(LeafSplit {
            left,
            right,
            left_size: nl,
            right_size: nr,
        })
    }

    /// Drops stale entries from both ends of every window.
    fn trim(&self, g: &mut Group, leaf: LeafId) {
        for i in 0..self.dim {
            let base = i * g.stride;
            let (mut s, mut e) = g.win[i];
            while self.owner[g.data[base + s as usize] as usize] != leaf {
                s += 1;
            }
            while self.owner[g.data[base + e as usize - 1] as usize] != leaf {
                e -= 1;
            }
            g.win[i] = (s, e);
        }
    }

    fn compact(&self, g: &mut Group, leaf: LeafId) {
        let mut data = Vec::with_capacity(g.live * self.dim);
        for i in 0..self.dim {
            data.extend(g.window(i).iter().copied().filter(|&j| self.owner[j as usize] == leaf));
        }
        g.stride = g.live;
        g.win = vec![(0, g.live as u32); self.dim];
        g.data = data;
    }

    /// Checks every leaf against `centers`.
    pub fn verify(&self, centers: &CenterSet) -> Result<()> {
        let fail = |msg: String| Err(Error::Structural(msg));
        let mut seen = vec![false; centers.k()];
        for (leaf, slot) in self.leaves.iter().enumerate() {
            let leaf = leaf as LeafId;
            let g = match slot {
                Slot::One(j) => {
                    if std::mem::replace(&mut seen[*j as usize], true) || self.owner[*j as usize] != leaf {
                        return fail(format!("center {j} misplaced"));
                    }
                    continue;
                }
                Slot::Many(g) => g,
            };
            if g.live < 2 {
                return fail(format!("leaf {leaf}: {} members stored as arrays", g.live));
            }
            for i in 0..self.dim {
                let w = g.window(i);
                let live: Vec<u32> = w.iter().copied().filter(|&j| self.owner[j as usize] == leaf).collect();
                if live.len() != g.live {
                    return fail(format!("leaf {leaf}: dim {i} holds {} live of {}", live.len(), g.live));
                }
                if self.owner[w[0] as usize] != leaf || self.owner[w[w.len() - 1] as usize] != leaf {
                    return fail(format!("leaf {leaf}: stale window end in dim {i}"));
                }
                if w.windows(2).any(|p| self.rank_of(p[0], i) >= self.rank_of(p[1], i)) {
                    return fail(format!("leaf {leaf}: dim {i} out of order"));
                }
                for &j in &live {
                    if self.key(j, i).0 .0 != centers.coord(j as usize, i) {
                        return fail(format!("stale coordinate for center {j}"));
                    }
                }
            }
            for &j in g.window(0) {
                if self.owner[j as usize] == leaf && std::mem::replace(&mut seen[j as usize], true) {
                    return fail(format!("center {j} in two leaves"));
                }
            }
        }
        if seen.iter().all(|&s| s) {
            Ok(())
        } else {
            fail("a center belongs to no leaf".into())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn splits_move_the_smaller_side() {
        let c = CenterSet::from_coords(vec![vec![0.0, 5.0], vec![1.0, 4.0], vec![2.0, 3.0], vec![3.0, 2.0]]).unwrap();
        let mut idx = LeafCoordinateIndex::new(&c);
        let cut = ThresholdCut::new(0, 0.5);
        assert_eq!(idx.split_sizes(0, cut), (1, 3));
        let s = idx.split_leaf(0, cut).unwrap();
        assert_eq!((s.left, s.right, s.left_size, s.right_size), (1, 0, 1, 3));
        assert_eq!(idx.members(1), vec![0]);
        assert_eq!(idx.extent(0, 1), (2.0, 4.0));
        assert!(idx.split_leaf(0, ThresholdCut::new(1, 10.0)).is_err());
        idx.verify(&c).unwrap();
    }

    #[test]
    fn window_iterators_start_at_the_cut() {
        let c = CenterSet::from_coords((0..6).map(|x| vec![x as f64]).collect()).unwrap();
        let idx = LeafCoordinateIndex::new(&c);
        let cut = ThresholdCut::new(0, 2.0);
        let l: Vec<u32> = idx.left_of(0, cut).map(|k| k.1).collect();
        let r: Vec<u32> = idx.right_of(0, cut).map(|k| k.1).collect();
        assert_eq!(l, vec![2, 1, 0]);
        assert_eq!(r, vec![3, 4, 5]);
    }

    proptest! {
        #[test]
        fn split_matches_brute_force(
            xs in proptest::collection::vec((-5i32..5, -5i32..5), 2..30),
            theta in -6.0f64..6.0,
            dim in 0usize..2,
        ) {
            let mut rows: Vec<Vec<f64>> = xs.iter().map(|&(a, b)| vec![a as f64, b as f64]).collect();
            rows.sort_by(|a, b| a.partial_cmp(b).unwrap());
            rows.dedup();
            prop_assume!(rows.len() >= 2);
            let c = CenterSet::from_coords(rows).unwrap();
            let mut idx = LeafCoordinateIndex::new(&c);
            let cut = ThresholdCut::new(dim, theta);
            let want: Vec<usize> = (0..c.k()).filter(|&j| c.coord(j, dim) <= theta).collect();
            match idx.split_leaf(0, cut) {
                Ok(s) => {
                    let mut got = idx.members(s.left);
                    got.sort_unstable();
                    prop_assert_eq!(got, want);
                    prop_assert_eq!(s.left_size + s.right_size, c.k());
                    idx.verify(&c).unwrap();
                }
                Err(_) => prop_assert!(want.is_empty() || want.len() == c.k()),
            }
        }
    }
}
