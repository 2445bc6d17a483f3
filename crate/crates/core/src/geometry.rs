//! Bounding boxes, center-projection interval decompositions and the
//! pseudo-distance `d_p`.
//!
//! Along every dimension the distinct center coordinates cut the line into
//! consecutive intervals. `d_p(x, y)` sums `|b - a|^p` over the pieces of
//! `[x_i, y_i]` delimited by center projections strictly between the two
//! endpoints, so `d_p <= ||x - y||_p^p` with equality at `p = 1`.

use crate::cost::{check_p, pairwise_sum, pow_abs};
use crate::error::{check_dim, Error, Result};
use crate::model::{CenterSet, Point};

/// Per-dimension extent of a center set: `I_i = [min_j mu^j_i, max_j mu^j_i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundingBox {
    lo: Vec<f64>,
    hi: Vec<f64>,
    total_length: f64,
}

impl BoundingBox {
    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn interval(&self, i: usize) -> (f64, f64) {
        (self.lo[i], self.hi[i])
    }

    pub fn side_length(&self, i: usize) -> f64 {
        self.hi[i] - self.lo[i]
    }

    /// `L = sum_i |I_i|`.
    pub fn total_length(&self) -> f64 {
        self.total_length
    }
}

pub fn bounding_box(centers: &CenterSet) -> BoundingBox {
    let d = centers.dim();
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for c in centers.centers() {
        for (i, &v) in c.coords().iter().enumerate() {
            lo[i] = lo[i].min(v);
            hi[i] = hi[i].max(v);
        }
    }
    let sides: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| b - a).collect();
    BoundingBox {
        total_length: pairwise_sum(&sides),
        lo,
        hi,
    }
}

/// Consecutive intervals `I_i(x, y)` along one dimension, in increasing order.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalDecomposition {
    pub dim: usize,
    pub intervals: Vec<(f64, f64)>,
}

impl IntervalDecomposition {
    pub fn total_length(&self) -> f64 {
        self.intervals.iter().map(|(a, b)| b - a).sum()
    }

    pub fn pow_sum(&self, p: f64) -> f64 {
        self.intervals.iter().map(|(a, b)| pow_abs(b - a, p)).sum()
    }
}

/// Splits `[min(x, y), max(x, y)]` at every distinct center projection lying
/// strictly inside it. `x == y` gives no intervals.
pub fn interval_decomposition(
    dim: usize,
    x: f64,
    y: f64,
    centers: &CenterSet,
) -> Result<IntervalDecomposition> {
    if dim >= centers.dim() {
        return Err(Error::DimensionMismatch {
            expected: centers.dim(),
            found: dim + 1,
        });
    }
    if !(x.is_finite() && y.is_finite()) {
        return Err(crate::error::invalid("interval endpoints must be finite"));
    }
    let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
    if lo == hi {
        return Ok(IntervalDecomposition {
            dim,
            intervals: Vec::new(),
        });
    }
    let mut cuts: Vec<f64> = centers
        .centers()
        .iter()
        .map(|c| c[dim])
        .filter(|&v| lo < v && v < hi)
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut bounds = Vec::with_capacity(cuts.len() + 2);
    bounds.push(lo);
    bounds.extend(cuts);
    bounds.push(hi);
    Ok(IntervalDecomposition {
        dim,
        intervals: bounds.windows(2).map(|w| (w[0], w[1])).collect(),
    })
}

/// `d_p(x, y)`: the sum over all dimensions of `|b - a|^p` across `I_i(x_i, y_i)`.
pub fn pseudo_distance(x: &Point, y: &Point, centers: &CenterSet, p: f64) -> Result<f64> {
    check_dim(x.dim(), y.dim())?;
    check_dim(centers.dim(), x.dim())?;
    check_p(p)?;
    let mut per_dim = Vec::with_capacity(x.dim());
    for i in 0..x.dim() {
        per_dim.push(interval_decomposition(i, x[i], y[i], centers)?.pow_sum(p));
    }
    Ok(pairwise_sum(&per_dim))
}

/// The elementary intervals of one dimension: consecutive distinct center
/// coordinates `breaks[0] < breaks[1] < ...`, with weights `|b - a|^p` and
/// running sums of those weights.
#[derive(Debug, Clone, PartialEq)]
pub struct DimIntervals {
    breaks: Vec<f64>,
    weights: Vec<f64>,
    prefix: Vec<f64>,
}

impl DimIntervals {
    fn new(mut coords: Vec<f64>, p: f64) -> Self {
        coords.sort_by(f64::total_cmp);
        coords.dedup();
        let weights: Vec<f64> = coords.windows(2).map(|w| pow_abs(w[1] - w[0], p)).collect();
        let mut prefix = Vec::with_capacity(coords.len());
        prefix.push(0.0);
        let mut acc = 0.0;
        for w in &weights {
            acc += w;
            prefix.push(acc);
        }
        Self {
            breaks: coords,
            weights,
            prefix,
        }
    }

    /// Distinct center coordinates, sorted.
    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn interval(&self, j: usize) -> (f64, f64) {
        (self.breaks[j], self.breaks[j + 1])
    }

    pub fn weight(&self, j: usize) -> f64 {
        self.weights[j]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_weight(&self) -> f64 {
        pairwise_sum(&self.weights)
    }

    /// Position of an exact center coordinate among the breakpoints.
    pub fn rank_of(&self, v: f64) -> Option<usize> {
        self.breaks.binary_search_by(|b| b.total_cmp(&v)).ok()
    }

    /// Index of the elementary interval `[a, b)` containing `theta`, if any.
    pub fn locate(&self, theta: f64) -> Option<usize> {
        if self.breaks.len() < 2 || theta < self.breaks[0] || theta >= *self.breaks.last()? {
            return None;
        }
        Some(self.breaks.partition_point(|&b| b <= theta) - 1)
    }

    /// Cumulative weight up to an exact center coordinate.
    pub fn cumulative(&self, v: f64) -> f64 {
        self.prefix[self.rank_of(v).expect("not a center coordinate")]
    }
}

/// `I_all`: every dimension–interval pair delimited by center projections,
/// weighted by `|b - a|^p`, with total weight `L_p`.
#[derive(Debug, Clone, PartialEq)]
pub struct DimensionIntervalSet {
    p: f64,
    dims: Vec<DimIntervals>,
    total: f64,
}

impl DimensionIntervalSet {
    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    pub fn dimension(&self, i: usize) -> &DimIntervals {
        &self.dims[i]
    }

    /// `L_p`.
    pub fn total_weight(&self) -> f64 {
        self.total
    }

    pub fn len(&self) -> usize {
        self.dims.iter().map(DimIntervals::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All `(dim, (a, b), weight)` entries in `(dim, interval)` order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, (f64, f64), f64)> + '_ {
        self.dims.iter().enumerate().flat_map(|(i, di)| {
            (0..di.len()).map(move |j| (i, di.interval(j), di.weight(j)))
        })
    }

    /// Maps each center to cumulative-weight coordinates, so that `d_p`
    /// between two centers is the `l_1` distance of their images.
    pub fn embed_centers(&self, centers: &CenterSet) -> Vec<Vec<f64>> {
        centers
            .centers()
            .iter()
            .map(|c| {
                self.dims
                    .iter()
                    .enumerate()
                    .map(|(i, di)| di.cumulative(c[i]))
                    .collect()
            })
            .collect()
    }
}

/// Builds `I_all` for the given centers. Needs two centers that differ.
pub fn all_intervals(centers: &CenterSet, p: f64) -> Result<DimensionIntervalSet> {
    check_p(p)?;
    let dims: Vec<DimIntervals> = (0..centers.dim())
        .map(|i| DimIntervals::new(centers.centers().iter().map(|c| c[i]).collect(), p))
        .collect();
    let per_dim: Vec<f64> = dims.iter().map(DimIntervals::total_weight).collect();
    let total = pairwise_sum(&per_dim);
    if !(total > 0.0) {
        return Err(Error::Structural(
            "all centers coincide in every coordinate; no interval to cut".into(),
        ));
    }
    Ok(DimensionIntervalSet { p, dims, total })
}
