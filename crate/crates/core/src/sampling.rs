//! Random threshold cuts.
//!
//! Two laws are supported. The uniform law over `AllCuts` picks dimension `i`
//! with probability `|I_i| / L` and `theta` uniformly on `I_i`. The `D_p` law
//! picks an elementary interval `(i, [a, b])` with probability
//! `|b - a|^p / L_p` and then `theta` with density
//! `P_{a,b}(theta) = p 2^{p-1} / (b - a)^p * min(theta - a, b - theta)^{p-1}`,
//! sampled through its closed-form inverse CDF.


use crate::cost::check_p;
use crate::error::{invalid, Error, Result};
use crate::geometry::{all_intervals, bounding_box, BoundingBox, DimensionIntervalSet};
use crate::model::{CenterSet, ThresholdCut};
use crate::rng::RngStream;

/// A uniform cut from the bounding box of the centers.
pub fn sample_uniform_cut(bbox: &BoundingBox, rng: &mut RngStream) -> Result<ThresholdCut> {
    let total = bbox.total_length();
    if !(total > 0.0) {
        return Err(Error::NoCut("bounding box has zero total side length".into()));
    }
    let mut target = rng.uniform() * total;
    let mut dim = None;
    for i in 0..bbox.dim() {
        let side = bbox.side_length(i);
        if side <= 0.0 {
            continue;
        }
        dim = Some(i);
        if target < side {
            break;
        }
        target -= side;
    }
    let i = dim.expect("positive total length implies a positive side");
    let (lo, hi) = bbox.interval(i);
    let theta = lo + rng.uniform() * (hi - lo);
    Ok(ThresholdCut::new(i, theta.min(hi)))
}

/// CDF of `P_{a,b}` at `theta`.
pub fn theta_cdf(a: f64, b: f64, p: f64, theta: f64) -> f64 {
    if theta <= a {
        return 0.0;
    }
    if theta >= b {
        return 1.0;
    }
    let half = 2f64.powf(p - 1.0);
    let mid = 0.5 * (a + b);
    if theta <= mid {
        half * ((theta - a) / (b - a)).powf(p)
    } else {
        1.0 - half * ((b - theta) / (b - a)).powf(p)
    }
}

/// Density `P_{a,b}(theta)`.
pub fn theta_pdf(a: f64, b: f64, p: f64, theta: f64) -> f64 {
    if theta < a || theta > b {
        return 0.0;
    }
    p * 2f64.powf(p - 1.0) / (b - a).powf(p) * (theta - a).min(b - theta).powf(p - 1.0)
}

/// Inverse of [`theta_cdf`]: maps `u` in `[0, 1]` to `theta` in `[a, b]`.
pub fn theta_inverse_cdf(a: f64, b: f64, p: f64, u: f64) -> Result<f64> {
    if !(a < b) {
        return Err(invalid(format!("need a < b, got [{a}, {b}]")));
    }
    check_p(p)?;
    if !(0.0..=1.0).contains(&u) {
        return Err(invalid(format!("u must lie in [0, 1], got {u}")));
    }
    Ok(theta_inverse_cdf_unchecked(a, b, p, u))
}

#[inline]
pub(crate) fn theta_inverse_cdf_unchecked(a: f64, b: f64, p: f64, u: f64) -> f64 {
    let width = b - a;
    let theta = if p == 1.0 {
        a + width * u
    } else if u <= 0.5 {
        a + width * (u * 2f64.powf(1.0 - p)).powf(1.0 / p)
    } else {
        b - width * ((1.0 - u) * 2f64.powf(1.0 - p)).powf(1.0 / p)
    };
    theta.clamp(a, b)
}

/// A `D_p` cut. Ties between equal weights resolve in `(dim, interval)` order.
pub fn sample_dp_cut(intervals: &DimensionIntervalSet, rng: &mut RngStream) -> Result<ThresholdCut> {
    let total = intervals.total_weight();
    if !(total > 0.0) {
        return Err(Error::NoCut("L_p is zero".into()));
    }
    let mut target = rng.uniform() * total;
    let mut chosen = None;
    'outer: for i in 0..intervals.dim() {
        let di = intervals.dimension(i);
        for j in 0..di.len() {
            let w = di.weight(j);
            if w <= 0.0 {
                continue;
            }
            chosen = Some((i, j));
            if target < w {
                break 'outer;
            }
            target -= w;
        }
    }
    let (i, j) = chosen.expect("positive L_p implies a positive weight");
    let (a, b) = intervals.dimension(i).interval(j);
    let theta = theta_inverse_cdf_unchecked(a, b, intervals.p(), rng.uniform());
    Ok(ThresholdCut::new(i, theta))
}

/// The active cut law.
#[derive(Debug, Clone)]
pub enum CutDistribution {
    UniformAllCuts(BoundingBox),
    Dp(DimensionIntervalSet),
}

impl CutDistribution {
    pub fn uniform(centers: &CenterSet) -> Result<Self> {
        let bbox = bounding_box(centers);
        if !(bbox.total_length() > 0.0) {
            return Err(Error::NoCut("need at least two distinct centers".into()));
        }
        Ok(Self::UniformAllCuts(bbox))
    }

    pub fn dp(centers: &CenterSet, p: f64) -> Result<Self> {
        Ok(Self::Dp(all_intervals(centers, p)?))
    }

    /// `L` for the uniform law, `L_p` for `D_p`.
    pub fn total_mass(&self) -> f64 {
        match self {
            Self::UniformAllCuts(b) => b.total_length(),
            Self::Dp(s) => s.total_weight(),
        }
    }

    pub fn sample(&self, rng: &mut RngStream) -> Result<ThresholdCut> {
        match self {
            Self::UniformAllCuts(b) => sample_uniform_cut(b, rng),
            Self::Dp(s) => sample_dp_cut(s, rng),
        }
    }
}

/// Distances between centers used by the discard rule: `l_1` distances, or
/// pseudo-distances computed as `l_1` distances of cumulative-weight images.
#[derive(Debug, Clone)]
pub struct PairMetric {
    rows: Vec<Vec<f64>>,
}

impl PairMetric {
    pub fn l1(centers: &CenterSet) -> Self {
        Self {
            rows: centers
                .centers()
                .iter()
                .map(|c| c.coords().to_vec())
                .collect(),
        }
    }

    pub fn pseudo(centers: &CenterSet, intervals: &DimensionIntervalSet) -> Self {
        Self {
            rows: intervals.embed_centers(centers),
        }
    }

    #[inline]
    pub fn dist(&self, g: usize, h: usize) -> f64 {
        self.rows[g]
            .iter()
            .zip(&self.rows[h])
            .map(|(a, b)| (a - b).abs())
            .sum()
    }

    pub(crate) fn row(&self, g: usize) -> &[f64] {
        &self.rows[g]
    }

    /// Largest distance within one group of centers.
    pub fn diameter(&self, group: &[usize]) -> f64 {
        let mut best = 0.0f64;
        for (a, &g) in group.iter().enumerate() {
            for &h in &group[a + 1..] {
                best = best.max(self.dist(g, h));
            }
        }
        best
    }
}

/// Smallest distance between two centers that share a leaf and end up on
/// opposite sides of `cut`; `None` if the cut separates no such pair.
pub fn min_separated_pair(
    cut: ThresholdCut,
    leaves: &[Vec<usize>],
    centers: &CenterSet,
    metric: &PairMetric,
) -> Option<f64> {
    let mut best: Option<f64> = None;
    for leaf in leaves {
        let (left, right): (Vec<usize>, Vec<usize>) = leaf
            .iter()
            .partition(|&&j| centers.coord(j, cut.dim) <= cut.theta);
        for &g in &left {
            for &h in &right {
                let d = metric.dist(g, h);
                best = Some(best.map_or(d, |b: f64| b.min(d)));
            }
        }
    }
    best
}

/// Draws the number of unconditioned samples spent before the first one that
/// lands in an event of probability `q` (the accepted draw included).
pub(crate) fn draws_until_hit(q: f64, rng: &mut RngStream) -> u64 {
    if q >= 1.0 {
        return 1;
    }
    if !(q > 0.0) {
        return u64::MAX;
    }
    // inverse CDF of the failure count; ln_1p keeps tiny q accurate
    let u = 1.0 - rng.uniform();
    let failures = (u.ln() / (-q).ln_1p()).floor();
    if failures >= u64::MAX as f64 {
        u64::MAX
    } else {
        (failures as u64).saturating_add(1)
    }
}
