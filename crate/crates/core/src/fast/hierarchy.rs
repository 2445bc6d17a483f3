//! Center extents of every node of the partial tree, for finding the leaves
//! a cut splits.
//!
//! A node's center set is fixed once the node exists, and a child's extent
//! lies inside its parent's, so a cut `(i, theta)` can only split leaves below
//! nodes with `min_i <= theta < max_i`. Stabbing walks down through those.

use super::leaf_index::LeafId;
use crate::model::ThresholdCut;

const NONE: u32 = u32::MAX;

#[derive(Debug, Clone)]
pub struct SplitHierarchy {
    /// `lo[i][node]`, `hi[i][node]`: extent of the node's centers along `i`.
    lo: Vec<Vec<f64>>,
    hi: Vec<Vec<f64>>,
    /// First of the two consecutive children, or `NONE` for a leaf.
    kids: Vec<u32>,
    leaf: Vec<LeafId>,
    /// Current node of each leaf id.
    node_of: Vec<u32>,
}

impl SplitHierarchy {
    /// A single root node for leaf 0 with the given extents.
    pub fn new(extents: &[(f64, f64)]) -> Self {
        let mut h = Self {
            lo: vec![Vec::new(); extents.len()],
            hi: vec![Vec::new(); extents.len()],
            kids: Vec::new(),
            leaf: Vec::new(),
            node_of: Vec::new(),
        };
        h.push(0, extents);
        h
    }

    fn push(&mut self, leaf: LeafId, extents: &[(f64, f64)]) -> u32 {
        let node = self.kids.len() as u32;
        for (i, &(lo, hi)) in extents.iter().enumerate() {
            self.lo[i].push(lo);
            self.hi[i].push(hi);
        }
        self.kids.push(NONE);
        self.leaf.push(leaf);
        if self.node_of.len() <= leaf as usize {
            self.node_of.resize(leaf as usize + 1, NONE);
        }
        self.node_of[leaf as usize] = node;
        node
    }

    /// Records that `leaf` was split into `left` and `right`.
    pub fn split(&mut self, leaf: LeafId, left: (LeafId, &[(f64, f64)]), right: (LeafId, &[(f64, f64)])) {
        let parent = self.node_of[leaf as usize];
        let first = self.push(left.0, left.1);
        self.push(right.0, right.1);
        self.kids[parent as usize] = first;
    }

    /// Leaves with `min <= theta < max` along the cut, in ascending id order.
    pub fn stab(&self, cut: ThresholdCut) -> Vec<LeafId> {
        let (lo, hi) = (&self.lo[cut.dim], &self.hi[cut.dim]);
        let mut out = Vec::new();
        let mut stack = vec![0u32];
        while let Some(v) = stack.pop() {
            let v = v as usize;
            if !(lo[v] <= cut.theta && cut.theta < hi[v]) {
                continue;
            }
            match self.kids[v] {
                NONE => out.push(self.leaf[v]),
                c => stack.extend([c, c + 1]),
            }
        }
        out.sort_unstable();
        out
    }
}
