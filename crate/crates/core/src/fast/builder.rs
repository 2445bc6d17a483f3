use std::collections::BinaryHeap;

use ordered_float::OrderedFloat;

use super::coverage::{CoverageTree, DimensionIntervalIndex};
use super::hierarchy::SplitHierarchy;
use super::leaf_index::{LeafCoordinateIndex, LeafId};
use super::weighted::{sample_dp_fast, weighted_trees, WeightedIntervalSegTree};
use crate::builders::{check_ell, discard_threshold, BuildTrace, TraceEvent, MAX_CONSECUTIVE_DISCARDS};
use crate::cost::check_p;
use crate::error::{Error, Result};
use crate::geometry::{all_intervals, bounding_box, DimensionIntervalSet};
use crate::model::{CenterSet, NodeId, ThresholdCut, ThresholdTree, TreeAssembly};
use crate::rng::RngStream;
use crate::sampling::{draws_until_hit, PairMetric};

/// Which randomized builder to run on the fast structures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FastVariant {
    Uniform,
    Modified { ell: u32 },
    Lp { p: f64, ell: u32 },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FastOptions {
    /// Cross-check every structure against a brute-force recomputation
    /// after each accepted cut. Slow; meant for tests.
    pub verify: bool,
}

/// Runs the uniform, modified or `l_p` builder with the same cut laws as
/// the reference builders, but with indexed leaves and intervals so that
/// each accepted cut costs polylogarithmic time per split leaf (plus the
/// diameter upkeep of the discard rule).
pub fn build_fast(
    centers: &CenterSet,
    variant: FastVariant,
    rng: &mut RngStream,
    options: FastOptions,
) -> Result<(ThresholdTree, BuildTrace)> {
    let (p, ell) = match variant {
        FastVariant::Uniform => (1.0, None),
        FastVariant::Modified { ell } => (1.0, Some(ell)),
        FastVariant::Lp { p, ell } => (p, Some(ell)),
    };
    check_p(p)?;
    if let Some(ell) = ell {
        check_ell(ell)?;
    }
    let k = centers.k();
    let mut trace = BuildTrace::default();
    if k == 1 {
        trace.finish(ell.is_some());
        return Ok((ThresholdTree::single_leaf(centers.dim()), trace));
    }
    let set = all_intervals(centers, p)?;
    let metric = match variant {
        FastVariant::Uniform => None,
        FastVariant::Modified { .. } => Some(PairMetric::l1(centers)),
        FastVariant::Lp { .. } => Some(PairMetric::pseudo(centers, &set)),
    };
    let weighted = matches!(variant, FastVariant::Lp { .. }).then(|| weighted_trees(&set));
    let full_mass = match variant {
        FastVariant::Lp { .. } => set.total_weight(),
        _ => bounding_box(centers).total_length(),
    };

    let leaves = LeafCoordinateIndex::new(centers);
    let root_extents: Vec<(f64, f64)> = (0..centers.dim()).map(|i| leaves.extent(0, i)).collect();
    let mut state = State {
        centers,
        hierarchy: SplitHierarchy::new(&root_extents),
        leaves,
        intervals: DimensionIntervalIndex::new(
            (0..set.dim())
                .map(|i| CoverageTree::lengths(set.dimension(i)))
                .collect(),
        ),
        weighted,
        metric,
        node_of: Vec::new(),
        version: Vec::new(),
        bound: Vec::new(),
        witness: Vec::new(),
        heap: BinaryHeap::new(),
        open: 0,
    };
    let (mut tree, root) = TreeAssembly::new(centers.dim());
    state.attach(0, root, &mut tree, f64::INFINITY, None);
    if state.leaves.size(0) > 1 {
        state.register_extents(0);
    }

    let mut iteration = 0u64;
    let mut consecutive_discards = 0u64;
    while state.open > 0 {
        let c_max = state.metric.is_some().then(|| state.c_max());
        let (cut, mass) = match &state.weighted {
            Some(w) => (
                sample_dp_fast(w, p, rng)?,
                w.iter().map(WeightedIntervalSegTree::total).sum(),
            ),
            None => (
                state.intervals.sample_conditioned_uniform(rng)?,
                state.intervals.total_union_length(),
            ),
        };
        let draws = draws_until_hit(mass / full_mass, rng);
        iteration += 1;

        let split = state.hierarchy.stab(cut);
        if split.is_empty() {
            trace.resampled += 1;
            continue;
        }

        if let (Some(ell), Some(c)) = (ell, c_max) {
            let threshold = discard_threshold(c, k, ell);
            if split.iter().any(|&leaf| state.separates_close_pair(leaf, cut, threshold)) {
                trace.record(TraceEvent {
                    iteration,
                    cut,
                    accepted: false,
                    leaves_split: 0,
                    c_max,
                    draws,
                });
                consecutive_discards += 1;
                if consecutive_discards >= MAX_CONSECUTIVE_DISCARDS {
                    return Err(Error::DiscardLimit {
                        discards: consecutive_discards,
                        k,
                        threshold,
                    });
                }
                continue;
            }
        }
        consecutive_discards = 0;
        trace.record(TraceEvent {
            iteration,
            cut,
            accepted: true,
            leaves_split: split.len(),
            c_max,
            draws,
        });

        for leaf in split {
            state.split(leaf, cut, &mut tree)?;
        }
        if options.verify {
            state.verify(&set)?;
        }
    }
    trace.finish(ell.is_some());
    Ok((tree.finish()?, trace))
}

struct State<'a> {
    centers: &'a CenterSet,
    leaves: LeafCoordinateIndex,
    hierarchy: SplitHierarchy,
    intervals: DimensionIntervalIndex,
    weighted: Option<Vec<WeightedIntervalSegTree>>,
    metric: Option<PairMetric>,
    node_of: Vec<NodeId>,
    version: Vec<u32>,
    /// Smallest known upper bound on each leaf's diameter.
    bound: Vec<f64>,
    /// Exact diameter and its witness pair, once known.
    witness: Vec<Option<Diameter>>,
    /// `(diameter or upper bound, leaf, version, exact)`.
    heap: BinaryHeap<(OrderedFloat<f64>, LeafId, u32, bool)>,
    /// Leaves with at least two centers.
    open: usize,
}

impl State<'_> {
    /// Hooks `leaf` to `node`: closes it if it is a singleton, otherwise
    /// queues its diameter. `bound` caps the diameter; `known` is an exact
    /// diameter with its witness pair, when the parent's pair survived.
    fn attach(&mut self, leaf: LeafId, node: NodeId, tree: &mut TreeAssembly, bound: f64, known: Option<Diameter>) {
        let slot = leaf as usize;
        if self.node_of.len() <= slot {
            self.node_of.resize(slot + 1, 0);
            self.version.resize(slot + 1, 0);
            self.bound.resize(slot + 1, f64::INFINITY);
            self.witness.resize(slot + 1, None);
        }
        self.node_of[slot] = node;
        self.version[slot] += 1;
        self.witness[slot] = None;
        if self.leaves.size(leaf) == 1 {
            tree.close(node, self.leaves.members(leaf)[0]);
            return;
        }
        self.open += 1;
        let Some(metric) = &self.metric else {
            return;
        };
        if let Some(known) = known {
            self.bound[slot] = known.0;
            self.witness[slot] = Some(known);
            self.heap.push((OrderedFloat(known.0), leaf, self.version[slot], true));
            return;
        }
        // the box in the metric's embedding bounds the diameter too
        let boxed: f64 = (0..self.leaves.dim())
            .map(|dim| {
                let (lo, hi) = self.leaves.extremes(leaf, dim);
                metric.row(hi as usize)[dim] - metric.row(lo as usize)[dim]
            })
            .sum();
        self.bound[slot] = bound.min(boxed);
        self.heap.push((OrderedFloat(self.bound[slot]), leaf, self.version[slot], false));
    }

    fn register_extents(&mut self, leaf: LeafId) {
        for dim in 0..self.leaves.dim() {
            let (lo, hi) = self.leaves.extent(leaf, dim);
            if lo < hi {
                self.intervals.insert(leaf, dim, lo, hi);
            }
        }
    }

    /// Exact diameters are computed only for leaves that reach the top.
    fn c_max(&mut self) -> f64 {
        while let Some(&(d, leaf, v, exact)) = self.heap.peek() {
            if self.version[leaf as usize] != v {
                self.heap.pop();
            } else if exact {
                return d.0;
            } else {
                self.heap.pop();
                let metric = self.metric.as_ref().expect("heap entries need a metric");
                let diam = l1_diameter(metric, &self.leaves.members(leaf));
                self.bound[leaf as usize] = diam.0;
                self.witness[leaf as usize] = Some(diam);
                self.heap.push((OrderedFloat(diam.0), leaf, v, true));
            }
        }
        0.0
    }

    /// Splits `leaf`. The larger side keeps the id, so only its extents that
    /// actually shrank are touched.
    fn split(&mut self, leaf: LeafId, cut: ThresholdCut, tree: &mut TreeAssembly) -> Result<()> {
        let slot = leaf as usize;
        let node = self.node_of[slot];
        let bound = self.bound[slot];
        let witness = self.witness[slot];
        let s = self.leaves.split_leaf(leaf, cut)?;
        let (left, right) = tree.split(node, cut);
        self.open -= 1;
        self.version[slot] += 1;

        let side = |j: u32| self.centers.coord(j as usize, cut.dim) <= cut.theta;
        let known_left = witness.filter(|w| side(w.1 .0) && side(w.1 .1));
        let known_right = witness.filter(|w| !side(w.1 .0) && !side(w.1 .1));
        let (fresh, kept) = if s.left == leaf { (s.right, s.left) } else { (s.left, s.right) };
        let extents = |l: LeafId| -> Vec<(f64, f64)> { (0..self.leaves.dim()).map(|i| self.leaves.extent(l, i)).collect() };
        self.hierarchy.split(leaf, (s.left, &extents(s.left)), (s.right, &extents(s.right)));

        let mut ranges = Vec::new();
        if self.leaves.size(kept) == 1 {
            ranges = self.intervals.remove_leaf(kept);
        } else {
            for dim in 0..self.leaves.dim() {
                let (lo, hi) = self.leaves.extent(kept, dim);
                ranges.extend(self.intervals.update_extent(kept, dim, lo, hi));
            }
        }
        if self.leaves.size(fresh) > 1 {
            self.register_extents(fresh);
        }
        self.attach(s.left, left, tree, bound, known_left);
        self.attach(s.right, right, tree, bound, known_right);
        if let Some(weighted) = &mut self.weighted {
            for (dim, l, r) in ranges {
                for j in self.intervals.take_uncovered(dim, l, r) {
                    weighted[dim].remove(j);
                }
            }
        }
        Ok(())
    }

    /// Whether `cut` separates two centers of `leaf` at distance at most
    /// `threshold`. Only centers whose coordinate along the cut (in the
    /// metric's embedding) lies within `threshold` of the other side can
    /// qualify, so just those are compared.
    fn separates_close_pair(&self, leaf: LeafId, cut: ThresholdCut, threshold: f64) -> bool {
        let metric = self.metric.as_ref().expect("discard rule needs a metric");
        let t = |j: u32| metric.row(j as usize)[cut.dim];
        let (Some((_, l0)), Some((_, r0))) = (
            self.leaves.left_of(leaf, cut).next(),
            self.leaves.right_of(leaf, cut).next(),
        ) else {
            return false;
        };
        let (left_edge, right_edge) = (t(l0), t(r0));
        let near_left: Vec<u32> = self
            .leaves
            .left_of(leaf, cut)
            .map(|(_, j)| j)
            .take_while(|&j| right_edge - t(j) <= threshold)
            .collect();
        if near_left.is_empty() {
            return false;
        }
        self.leaves
            .right_of(leaf, cut)
            .map(|(_, j)| j)
            .take_while(|&j| t(j) - left_edge <= threshold)
            .any(|h| near_left.iter().any(|&g| metric.dist(g as usize, h as usize) <= threshold))
    }

    fn verify(&self, set: &DimensionIntervalSet) -> Result<()> {
        let fail = |msg: String| Err(Error::Structural(msg));
        self.leaves.verify(self.centers)?;
        let open: Vec<LeafId> = (0..self.node_of.len() as LeafId)
            .filter(|&l| self.leaves.contains(l) && self.leaves.size(l) >= 2)
            .collect();
        if open.len() != self.open {
            return fail(format!("{} open leaves tracked, {} present", self.open, open.len()));
        }
        for dim in 0..set.dim() {
            let di = set.dimension(dim);
            let mut covered = vec![false; di.len()];
            for &leaf in &open {
                let (lo, hi) = self.leaves.extent(leaf, dim);
                if lo < hi {
                    let a = di.rank_of(lo).expect("center coordinate");
                    let b = di.rank_of(hi).expect("center coordinate");
                    covered[a..b].iter_mut().for_each(|c| *c = true);
                }
            }
            let union: f64 = (0..di.len())
                .filter(|&j| covered[j])
                .map(|j| di.interval(j).1 - di.interval(j).0)
                .sum();
            let got = self.intervals.union_length(dim);
            if (got - union).abs() > 1e-9 * union.max(1.0) {
                return fail(format!("dim {dim}: union length {got}, expected {union}"));
            }
            if let Some(w) = &self.weighted {
                for (j, &c) in covered.iter().enumerate() {
                    if w[dim].is_live(j) != c {
                        return fail(format!("dim {dim}: interval {j} liveness is stale"));
                    }
                }
            }
        }
        if let Some(metric) = &self.metric {
            for &l in &open {
                let want = metric.diameter(&self.leaves.members(l));
                let v = self.version[l as usize];
                let entries: Vec<_> = self.heap.iter().filter(|e| e.1 == l && e.2 == v).collect();
                if entries.is_empty() {
                    return fail(format!("leaf {l} has no diameter entry"));
                }
                for e in entries {
                    let tol = 1e-9 * want.max(1.0);
                    if e.0 .0 < want - tol || (e.3 && e.0 .0 > want + tol) {
                        return fail(format!("leaf {l}: diameter entry {}, exact {want}", e.0 .0));
                    }
                }
            }
        }
        Ok(())
    }
}

/// A diameter and a pair of centers attaining it.
type Diameter = (f64, (u32, u32));

/// `l_1` diameter of a group of rows with a witness pair: through the
/// `2^(d-1)` sign patterns when that is cheaper than comparing all pairs.
/// A pattern's projection is `x_0 + a + b` with `a` from the signs of the
/// first half of the remaining coordinates and `b` from the second half.
pub(crate) fn l1_diameter(metric: &PairMetric, group: &[usize]) -> Diameter {
    let m = group.len();
    if m < 2 {
        let g = group.first().map_or(0, |&g| g as u32);
        return (0.0, (g, g));
    }
    let d = metric.row(group[0]).len();
    let patterns_cheaper = d <= 20 && (1usize << (d - 1)) < m * d / 2;
    let pair = if patterns_cheaper {
        let h = (d - 1) / 2;
        let (na, nb) = (1usize << h, 1usize << (d - 1 - h));
        // bit `i` of a pattern negates coordinate `i + 1`
        let signed = |row: &[f64], dims: std::ops::Range<usize>, out: &mut Vec<f64>| {
            out.clear();
            out.extend((0..1usize << dims.len()).map(|mask| {
                dims.clone()
                    .enumerate()
                    .map(|(bit, i)| if mask >> bit & 1 == 1 { -row[i] } else { row[i] })
                    .sum::<f64>()
            }));
        };
        let mut lo = vec![f64::INFINITY; na * nb];
        let mut hi = vec![f64::NEG_INFINITY; na * nb];
        let (mut av, mut bv) = (Vec::with_capacity(na), Vec::with_capacity(nb));
        for &g in group {
            let row = metric.row(g);
            signed(row, 1..1 + h, &mut av);
            signed(row, 1 + h..d, &mut bv);
            for (b, (lo, hi)) in bv.iter().zip(lo.chunks_exact_mut(na).zip(hi.chunks_exact_mut(na))) {
                let base = row[0] + b;
                for ((l, h), a) in lo.iter_mut().zip(hi.iter_mut()).zip(&av) {
                    let s = base + a;
                    *l = l.min(s);
                    *h = h.max(s);
                }
            }
        }
        let t = (0..na * nb)
            .max_by(|&a, &b| (hi[a] - lo[a]).total_cmp(&(hi[b] - lo[b])))
            .expect("at least one pattern");
        // recover the extreme rows of the winning pattern
        let (ta, tb) = (t % na, t / na);
        let along = |g: usize| -> f64 {
            let row = metric.row(g);
            let sign = |mask: usize, bit: usize, x: f64| if mask >> bit & 1 == 1 { -x } else { x };
            let a: f64 = (0..h).map(|bit| sign(ta, bit, row[1 + bit])).sum();
            let b: f64 = (0..d - 1 - h).map(|bit| sign(tb, bit, row[1 + h + bit])).sum();
            row[0] + b + a
        };
        let mut ends = (group[0], group[0]);
        let (mut low, mut high) = (f64::INFINITY, f64::NEG_INFINITY);
        for &g in group {
            let s = along(g);
            if s < low {
                (low, ends.0) = (s, g);
            }
            if s > high {
                (high, ends.1) = (s, g);
            }
        }
        ends
    } else {
        let mut best = (f64::NEG_INFINITY, (group[0], group[1]));
        for (a, &g) in group.iter().enumerate() {
            for &h in &group[a + 1..] {
                let v = metric.dist(g, h);
                if v > best.0 {
                    best = (v, (g, h));
                }
            }
        }
        best.1
    };
    (metric.dist(pair.0, pair.1), (pair.0 as u32, pair.1 as u32))
}
