//! Points, center sets, threshold cuts and threshold trees.
//!
//! A threshold tree routes a point from the root by comparing one coordinate
//! against a threshold at every internal node: the point goes left iff
//! `x[dim] <= theta`. Each of the `k` leaves owns exactly one reference
//! center, and the leaf's cluster id is that center's index.

use std::cmp::Ordering;
use std::ops::Index;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, invalid, Error, Result};

/// A point in `R^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(invalid("a point needs at least one coordinate"));
        }
        if let Some(bad) = coords.iter().position(|c| !c.is_finite()) {
            return Err(invalid(format!("coordinate {bad} is not finite")));
        }
        Ok(Self(coords))
    }

    /// The `i`-th standard basis vector of `R^d`.
    pub fn basis(d: usize, i: usize) -> Self {
        let mut coords = vec![0.0; d];
        coords[i] = 1.0;
        Self(coords)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }

    /// `self + scale * other`, coordinate-wise.
    pub fn offset(&self, other: &Point, scale: f64) -> Point {
        Point(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + scale * b)
                .collect(),
        )
    }
}

impl Index<usize> for Point {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl From<Point> for Vec<f64> {
    fn from(p: Point) -> Self {
        p.0
    }
}

/// Checks that every point has dimension `d`.
pub fn check_points(points: &[Point], d: usize) -> Result<()> {
    points.iter().try_for_each(|p| check_dim(d, p.dim()))
}

/// `k >= 1` pairwise-distinct centers of a common dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct CenterSet {
    centers: Vec<Point>,
    dim: usize,
}

impl CenterSet {
    pub fn new(centers: Vec<Point>) -> Result<Self> {
        let first = centers
            .first()
            .ok_or_else(|| invalid("a center set needs at least one center"))?;
        let dim = first.dim();
        check_points(&centers, dim)?;

        // sort-and-scan keeps the distinctness check at O(k log k * d)
        let mut order: Vec<usize> = (0..centers.len()).collect();
        order.sort_by(|&a, &b| lex_cmp(centers[a].coords(), centers[b].coords()));
        for w in order.windows(2) {
            if centers[w[0]] == centers[w[1]] {
                let (a, b) = (w[0].min(w[1]), w[0].max(w[1]));
                return Err(invalid(format!("centers {a} and {b} coincide")));
            }
        }
        Ok(Self { centers, dim })
    }

    pub fn from_coords(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(rows.into_iter().map(Point::new).collect::<Result<_>>()?)
    }

    pub fn k(&self) -> usize {
        self.centers.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn centers(&self) -> &[Point] {
        &self.centers
    }

    pub fn get(&self, j: usize) -> &Point {
        &self.centers[j]
    }

    /// Coordinate `i` of center `j`.
    #[inline]
    pub fn coord(&self, j: usize, i: usize) -> f64 {
        self.centers[j].0[i]
    }
}

fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// An axis-aligned cut `(dim, theta)`; points with `x[dim] <= theta` go left.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdCut {
    pub dim: usize,
    pub theta: f64,
}

impl ThresholdCut {
    pub fn new(dim: usize, theta: f64) -> Self {
        Self { dim, theta }
    }

    #[inline]
    pub fn goes_left(&self, coords: &[f64]) -> bool {
        coords[self.dim] <= self.theta
    }
}

/// Index of a node inside a [`ThresholdTree`].
pub type NodeId = usize;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Node {
    Split {
        cut: ThresholdCut,
        left: NodeId,
        right: NodeId,
    },
    Leaf {
        cluster: usize,
        center: usize,
    },
}

/// A binary tree of threshold cuts with exactly `k` leaves, one per center.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdTree {
    nodes: Vec<Node>,
    root: NodeId,
    k: usize,
    dim: usize,
}

impl ThresholdTree {
    /// The `k = 1` tree: no cuts, one cluster.
    pub fn single_leaf(dim: usize) -> Self {
        Self {
            nodes: vec![Node::Leaf {
                cluster: 0,
                center: 0,
            }],
            root: 0,
            k: 1,
            dim,
        }
    }

    /// Assembles a tree from an arena of nodes and checks the structural
    /// invariants: every node reachable exactly once, `k` leaves whose center
    /// indices form a permutation of `0..k`, `k - 1` internal nodes, cut
    /// dimensions below `dim`.
    pub fn from_nodes(nodes: Vec<Node>, root: NodeId, dim: usize) -> Result<Self> {
        if root >= nodes.len() {
            return Err(Error::Structural("root index out of range".into()));
        }
        let mut seen = vec![false; nodes.len()];
        let mut leaves = 0usize;
        let mut splits = 0usize;
        let mut owners: Vec<usize> = Vec::new();
        let mut stack = vec![root];
        while let Some(id) = stack.pop() {
            if id >= nodes.len() || std::mem::replace(&mut seen[id], true) {
                return Err(Error::Structural(format!(
                    "node {id} is out of range or reached twice"
                )));
            }
            match nodes[id] {
                Node::Split { cut, left, right } => {
                    if cut.dim >= dim {
                        return Err(Error::Structural(format!(
                            "cut dimension {} out of range for d = {dim}",
                            cut.dim
                        )));
                    }
                    if !cut.theta.is_finite() {
                        return Err(Error::Structural("non-finite threshold".into()));
                    }
                    splits += 1;
                    stack.push(right);
                    stack.push(left);
                }
                Node::Leaf { cluster, center } => {
                    if cluster != center {
                        return Err(Error::Structural(format!(
                            "leaf cluster id {cluster} differs from its center index {center}"
                        )));
                    }
                    leaves += 1;
                    owners.push(center);
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::Structural("unreachable nodes in arena".into()));
        }
        owners.sort_unstable();
        if owners.iter().enumerate().any(|(i, &c)| i != c) {
            return Err(Error::Structural(
                "leaf centers are not a permutation of 0..k".into(),
            ));
        }
        debug_assert_eq!(splits + 1, leaves);
        Ok(Self {
            nodes,
            root,
            k: leaves,
            dim,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    /// All cuts, in arena order.
    pub fn cuts(&self) -> impl Iterator<Item = ThresholdCut> + '_ {
        self.nodes.iter().filter_map(|n| match n {
            Node::Split { cut, .. } => Some(*cut),
            Node::Leaf { .. } => None,
        })
    }

    pub fn num_cuts(&self) -> usize {
        self.k - 1
    }

    /// Routes `coords` to its leaf; returns `(cluster, comparisons made)`.
    fn route(&self, coords: &[f64]) -> (usize, usize) {
        let mut id = self.root;
        let mut steps = 0;
        loop {
            match self.nodes[id] {
                Node::Split { cut, left, right } => {
                    steps += 1;
                    id = if cut.goes_left(coords) { left } else { right };
                }
                Node::Leaf { cluster, .. } => return (cluster, steps),
            }
        }
    }

    /// Cluster id of the leaf reached by `x`.
    pub fn assign_point(&self, x: &Point) -> Result<usize> {
        check_dim(self.dim, x.dim())?;
        Ok(self.route(x.coords()).0)
    }

    /// Like [`assign_point`](Self::assign_point) but also reports the depth reached.
    pub fn assign_with_depth(&self, x: &Point) -> Result<(usize, usize)> {
        check_dim(self.dim, x.dim())?;
        Ok(self.route(x.coords()))
    }

    pub fn assign(&self, points: &[Point]) -> Result<Assignment> {
        check_points(points, self.dim)?;
        Ok(Assignment {
            labels: points.iter().map(|p| self.route(p.coords()).0).collect(),
            k: self.k,
        })
    }

    /// Maximum root-to-leaf depth in edges.
    pub fn depth(&self) -> usize {
        let mut best = 0;
        let mut stack = vec![(self.root, 0usize)];
        while let Some((id, depth)) = stack.pop() {
            match self.nodes[id] {
                Node::Split { left, right, .. } => {
                    stack.push((left, depth + 1));
                    stack.push((right, depth + 1));
                }
                Node::Leaf { .. } => best = best.max(depth),
            }
        }
        best
    }

    /// Checks that every center routes to the leaf that owns it.
    pub fn check_centers(&self, centers: &CenterSet) -> Result<()> {
        check_dim(self.dim, centers.dim())?;
        if centers.k() != self.k {
            return Err(Error::Structural(format!(
                "tree has {} leaves but there are {} centers",
                self.k,
                centers.k()
            )));
        }
        for (j, c) in centers.centers().iter().enumerate() {
            let (got, _) = self.route(c.coords());
            if got != j {
                return Err(Error::Structural(format!(
                    "center {j} routes to leaf owning center {got}"
                )));
            }
        }
        Ok(())
    }
}

/// Cluster label per point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    labels: Vec<usize>,
    k: usize,
}

impl Assignment {
    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }
}

/// Incrementally grows a threshold tree by splitting open leaves.
///
/// Builders start from one open node holding all centers, split open nodes
/// as cuts are accepted, and close each node once it holds one center.
#[derive(Debug)]
pub(crate) struct TreeAssembly {
    nodes: Vec<Option<Node>>,
    dim: usize,
}

impl TreeAssembly {
    pub(crate) fn new(dim: usize) -> (Self, NodeId) {
        (
            Self {
                nodes: vec![None],
                dim,
            },
            0,
        )
    }

    pub(crate) fn split(&mut self, id: NodeId, cut: ThresholdCut) -> (NodeId, NodeId) {
        debug_assert!(self.nodes[id].is_none(), "splitting a closed node");
        let left = self.nodes.len();
        let right = left + 1;
        self.nodes.push(None);
        self.nodes.push(None);
        self.nodes[id] = Some(Node::Split { cut, left, right });
        (left, right)
    }

    pub(crate) fn close(&mut self, id: NodeId, center: usize) {
        debug_assert!(self.nodes[id].is_none(), "closing a closed node");
        self.nodes[id] = Some(Node::Leaf {
            cluster: center,
            center,
        });
    }

    pub(crate) fn finish(self) -> Result<ThresholdTree> {
        let nodes = self
            .nodes
            .into_iter()
            .enumerate()
            .map(|(i, n)| n.ok_or_else(|| Error::Structural(format!("node {i} left open"))))
            .collect::<Result<Vec<_>>>()?;
        ThresholdTree::from_nodes(nodes, 0, self.dim)
    }
}
