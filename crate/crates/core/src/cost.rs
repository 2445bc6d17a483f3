//! Exact `l_p` cost evaluation.
//!
//! Every cost here is a sum of `||x - mu||_p^p` terms. Sums over points go
//! through [`pairwise_sum`] so that rounding drift grows with `log n`.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, invalid, Result};
use crate::model::{check_points, CenterSet, Point, ThresholdTree};

const PAIRWISE_BLOCK: usize = 64;

/// Sum with pairwise (cascade) splitting.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= PAIRWISE_BLOCK {
        xs.iter().sum()
    } else {
        let mid = xs.len() / 2;
        pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
    }
}

/// `|v|^p`, using exact multiplication for small integer exponents.
#[inline]
pub fn pow_abs(v: f64, p: f64) -> f64 {
    let a = v.abs();
    if p == 1.0 {
        a
    } else if p == 2.0 {
        a * a
    } else if p == 3.0 {
        a * a * a
    } else if p.fract() == 0.0 && p <= 64.0 {
        a.powi(p as i32)
    } else {
        a.powf(p)
    }
}

pub(crate) fn check_p(p: f64) -> Result<()> {
    if p.is_finite() && p >= 1.0 {
        Ok(())
    } else {
        Err(invalid(format!("objective exponent p must be >= 1, got {p}")))
    }
}

#[inline]
pub(crate) fn dist_pow(a: &[f64], b: &[f64], p: f64) -> f64 {
    a.iter().zip(b).map(|(x, y)| pow_abs(x - y, p)).sum()
}

/// `||x - y||_p^p = sum_i |x_i - y_i|^p`.
pub fn lp_pow_distance(x: &Point, y: &Point, p: f64) -> Result<f64> {
    check_dim(x.dim(), y.dim())?;
    check_p(p)?;
    Ok(dist_pow(x.coords(), y.coords(), p))
}

/// Index and cost of the nearest center; ties go to the lowest index.
pub fn nearest_center(x: &[f64], centers: &CenterSet, p: f64) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centers.centers().iter().enumerate() {
        let d = dist_pow(x, c.coords(), p);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

/// `cost_p(U) = sum_x min_j ||x - mu^j||_p^p`.
pub fn cost_to_centers(points: &[Point], centers: &CenterSet, p: f64) -> Result<f64> {
    check_p(p)?;
    check_points(points, centers.dim())?;
    let terms: Vec<f64> = points
        .iter()
        .map(|x| nearest_center(x.coords(), centers, p).1)
        .collect();
    Ok(pairwise_sum(&terms))
}

/// Which center a leaf is charged against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LeafCenterMode {
    /// The reference center the leaf owns.
    Reference,
    /// The cost-minimizing center of the points that land in the leaf.
    Optimal,
}

/// Cost figures for one tree on one point set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub p: f64,
    pub mode: LeafCenterMode,
    /// Every point charged to its leaf's reference center.
    pub cost_reference_centers: f64,
    /// Every leaf re-centered optimally; present in `Optimal` mode.
    pub cost_optimal_leaf_centers: Option<f64>,
    /// Unconstrained cost of the reference centers, `cost_p(U)`.
    pub cost_nearest_centers: f64,
    /// `cost()` divided by `cost_nearest_centers`.
    pub ratio_to_reference: f64,
    /// Leaves that received no points.
    pub empty_clusters: Vec<usize>,
    pub seed: Option<u64>,
    pub wall_time: Option<Duration>,
}

impl CostReport {
    /// The cost selected by `mode`.
    pub fn cost(&self) -> f64 {
        match self.mode {
            LeafCenterMode::Reference => self.cost_reference_centers,
            LeafCenterMode::Optimal => self
                .cost_optimal_leaf_centers
                .unwrap_or(self.cost_reference_centers),
        }
    }

    pub fn with_run(mut self, seed: u64, wall_time: Duration) -> Self {
        self.seed = Some(seed);
        self.wall_time = Some(wall_time);
        self
    }
}

pub(crate) fn ratio(cost: f64, reference: f64) -> f64 {
    if reference > 0.0 {
        cost / reference
    } else if cost == 0.0 {
        1.0
    } else {
        f64::INFINITY
    }
}

/// `cost_p(T)` of the clustering induced by `tree`.
pub fn cost_of_tree(
    points: &[Point],
    tree: &ThresholdTree,
    centers: &CenterSet,
    p: f64,
    mode: LeafCenterMode,
) -> Result<CostReport> {
    check_p(p)?;
    check_dim(tree.dim(), centers.dim())?;
    if tree.k() != centers.k() {
        return Err(invalid(format!(
            "tree has {} leaves but {} centers were given",
            tree.k(),
            centers.k()
        )));
    }
    let assignment = tree.assign(points)?;
    let labels = assignment.labels();

    let reference_terms: Vec<f64> = points
        .iter()
        .zip(labels)
        .map(|(x, &j)| dist_pow(x.coords(), centers.get(j).coords(), p))
        .collect();
    let cost_reference_centers = pairwise_sum(&reference_terms);

    let mut members: Vec<Vec<usize>> = vec![Vec::new(); tree.k()];
    for (i, &j) in labels.iter().enumerate() {
        members[j].push(i);
    }
    let empty_clusters: Vec<usize> = (0..tree.k()).filter(|&j| members[j].is_empty()).collect();

    let cost_optimal_leaf_centers = match mode {
        LeafCenterMode::Reference => None,
        LeafCenterMode::Optimal => {
            let per_leaf: Vec<f64> = members
                .iter()
                .map(|idx| {
                    let cluster: Vec<&Point> = idx.iter().map(|&i| &points[i]).collect();
                    optimal_cluster_cost(&cluster, p)
                })
                .collect();
            Some(pairwise_sum(&per_leaf))
        }
    };

    let cost_nearest_centers = cost_to_centers(points, centers, p)?;
    let mut report = CostReport {
        p,
        mode,
        cost_reference_centers,
        cost_optimal_leaf_centers,
        cost_nearest_centers,
        ratio_to_reference: 0.0,
        empty_clusters,
        seed: None,
        wall_time: None,
    };
    report.ratio_to_reference = ratio(report.cost(), cost_nearest_centers);
    Ok(report)
}

/// `min_mu sum_x ||x - mu||_p^p` for one cluster, solved per coordinate.
pub fn optimal_cluster_cost(cluster: &[&Point], p: f64) -> f64 {
    let Some(first) = cluster.first() else {
        return 0.0;
    };
    let mut per_dim = Vec::with_capacity(first.dim());
    let mut values = Vec::with_capacity(cluster.len());
    for i in 0..first.dim() {
        values.clear();
        values.extend(cluster.iter().map(|x| x[i]));
        let mu = optimal_center_1d(&mut values, p);
        let terms: Vec<f64> = values.iter().map(|v| pow_abs(v - mu, p)).collect();
        per_dim.push(pairwise_sum(&terms));
    }
    per_dim.iter().sum()
}

/// Cost-minimizing center of the given points, coordinate by coordinate.
pub fn optimal_center(cluster: &[&Point], p: f64) -> Option<Point> {
    let first = cluster.first()?;
    let mut values = Vec::with_capacity(cluster.len());
    let coords = (0..first.dim())
        .map(|i| {
            values.clear();
            values.extend(cluster.iter().map(|x| x[i]));
            optimal_center_1d(&mut values, p)
        })
        .collect();
    Some(Point::new(coords).expect("finite input gives a finite center"))
}

const TERNARY_ITERS: usize = 200;
const TERNARY_WIDTH: f64 = 1e-12;

/// Minimizer of `sum_v |v - mu|^p` over `mu`. `values` is reordered.
///
/// `p = 1` takes the lower median, `p = 2` the mean, and anything else a
/// ternary search on the convex objective over `[min, max]`.
pub fn optimal_center_1d(values: &mut [f64], p: f64) -> f64 {
    assert!(!values.is_empty());
    if p == 1.0 {
        let mid = (values.len() - 1) / 2;
        let (_, m, _) = values.select_nth_unstable_by(mid, f64::total_cmp);
        return *m;
    }
    if p == 2.0 {
        return pairwise_sum(values) / values.len() as f64;
    }
    let objective = |mu: f64| -> f64 { values.iter().map(|v| pow_abs(v - mu, p)).sum() };
    let (mut lo, mut hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    for _ in 0..TERNARY_ITERS {
        if hi - lo < TERNARY_WIDTH {
            break;
        }
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if objective(m1) <= objective(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    0.5 * (lo + hi)
}
