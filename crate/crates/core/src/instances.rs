//! Instance generators and a reference-clustering heuristic.

use std::collections::BTreeMap;

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::cost::{check_p, dist_pow, nearest_center, optimal_center};
use crate::error::{invalid, Result};
use crate::model::{check_points, CenterSet, Point};
use crate::rng::RngStream;

/// Where an instance came from.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct InstanceMeta {
    pub generator: String,
    #[serde(default)]
    pub params: BTreeMap<String, Value>,
    #[serde(default)]
    pub seed: Option<u64>,
    /// Cost of the planted centers, for every `p`, when it is known in closed form.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub opt_cost: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// A point set with optional reference centers.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub dim: usize,
    pub points: Vec<Point>,
    pub centers: Option<CenterSet>,
    pub meta: InstanceMeta,
}

impl Instance {
    pub fn new(dim: usize, points: Vec<Point>, centers: Option<CenterSet>, meta: InstanceMeta) -> Result<Self> {
        check_points(&points, dim)?;
        if let Some(c) = &centers {
            crate::error::check_dim(dim, c.dim())?;
        }
        Ok(Self {
            dim,
            points,
            centers,
            meta,
        })
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn k(&self) -> Option<usize> {
        self.centers.as_ref().map(CenterSet::k)
    }

    pub fn centers(&self) -> Result<&CenterSet> {
        self.centers
            .as_ref()
            .ok_or_else(|| invalid("instance has no reference centers"))
    }
}

pub fn is_prime(m: u64) -> bool {
    if m < 2 {
        return false;
    }
    let mut q = 2;
    while q * q <= m {
        if m.is_multiple_of(q) {
            return false;
        }
        q += 1;
    }
    true
}

fn check_prime(m: u64) -> Result<()> {
    if m < 3 || !is_prime(m) {
        return Err(invalid(format!("m must be a prime of at least 3, got {m}")));
    }
    Ok(())
}

/// Coordinate `i` of center `j` in the lower-bound family:
/// `(a_i * j + b_i) mod m` with `a_i = 1 + i / m`, `b_i = i mod m`.
pub fn lower_bound_coord(m: u64, i: u64, j: u64) -> u64 {
    ((1 + i / m) * j + i % m) % m
}

/// The lower-bound family for prime `m`: `k = m` centers in `d = m(m - 1)`
/// dimensions, all pairwise equidistant, and around each center the `2d`
/// points `mu^j +- e^i`.
pub fn gen_lower_bound(m: u64) -> Result<Instance> {
    check_prime(m)?;
    let d = (m * (m - 1)) as usize;
    let centers: Vec<Vec<f64>> = (0..m)
        .map(|j| (0..d as u64).map(|i| lower_bound_coord(m, i, j) as f64).collect())
        .collect();
    let points = unit_neighbours(&centers, d);
    let n = points.len();
    Instance::new(
        d,
        points,
        Some(CenterSet::from_coords(centers)?),
        InstanceMeta {
            generator: "lower-bound".into(),
            params: BTreeMap::from([("m".into(), json!(m))]),
            seed: None,
            opt_cost: Some(n as f64),
            note: None,
        },
    )
}

/// `mu +- e^i` for every center and each of the first `d` dimensions.
fn unit_neighbours(centers: &[Vec<f64>], d: usize) -> Vec<Point> {
    let mut points = Vec::with_capacity(2 * d * centers.len());
    for c in centers {
        for i in 0..d {
            for s in [-1.0, 1.0] {
                let mut x = c.clone();
                x[i] += s;
                points.push(Point::new(x).expect("finite"));
            }
        }
    }
    points
}

/// The family on which the min-cut baseline is far from optimal: the
/// lower-bound centers reduced mod 2, lifted by one extra coordinate per
/// center (set to 1 for its own center), with `(k - 1) / 2` copies of
/// `mu^j - e^(d + j)` added to every cluster.
pub fn gen_adversarial(m: u64) -> Result<Instance> {
    check_prime(m)?;
    let k = m as usize;
    let d = k * (k - 1);
    let dim = d + k;
    let centers: Vec<Vec<f64>> = (0..k)
        .map(|j| {
            let mut c: Vec<f64> = (0..d as u64)
                .map(|i| (lower_bound_coord(m, i, j as u64) % 2) as f64)
                .collect();
            c.resize(dim, 0.0);
            c[d + j] = 1.0;
            c
        })
        .collect();
    let mut points = Vec::with_capacity(k * (2 * d + (k - 1) / 2));
    for (j, c) in centers.iter().enumerate() {
        points.extend(unit_neighbours(std::slice::from_ref(c), d));
        let mut copy = c.clone();
        copy[d + j] -= 1.0;
        for _ in 0..(k - 1) / 2 {
            points.push(Point::new(copy.clone())?);
        }
    }
    let opt = (2 * d * k + (k - 1) * k / 2) as f64;
    Instance::new(
        dim,
        points,
        Some(CenterSet::from_coords(centers)?),
        InstanceMeta {
            generator: "adversarial".into(),
            params: BTreeMap::from([("m".into(), json!(m))]),
            seed: None,
            opt_cost: Some(opt),
            note: Some(format!(
                "each cluster holds {} identical points stored as separate records",
                (k - 1) / 2
            )),
        },
    )
}

/// `k` centers uniform in `[0, 1]^d`, each with `n_per_cluster` points of
/// isotropic Gaussian noise around it. The centers are the reference.
pub fn gen_gaussian_mixture(
    k: usize,
    d: usize,
    n_per_cluster: usize,
    sigma: f64,
    rng: &mut RngStream,
) -> Result<Instance> {
    if k == 0 || d == 0 || n_per_cluster == 0 {
        return Err(invalid("k, d and n must be positive"));
    }
    let noise = Normal::new(0.0, sigma)
        .ok()
        .filter(|_| sigma > 0.0)
        .ok_or_else(|| invalid(format!("sigma must be positive, got {sigma}")))?;
    let centers = loop {
        let rows: Vec<Vec<f64>> = (0..k)
            .map(|_| (0..d).map(|_| rng.uniform()).collect())
            .collect();
        if let Ok(c) = CenterSet::from_coords(rows) {
            break c;
        }
    };
    let mut points = Vec::with_capacity(k * n_per_cluster);
    for c in centers.centers() {
        for _ in 0..n_per_cluster {
            let x = c.coords().iter().map(|&v| v + noise.sample(rng)).collect();
            points.push(Point::new(x)?);
        }
    }
    Instance::new(
        d,
        points,
        Some(centers),
        InstanceMeta {
            generator: "gaussian".into(),
            params: BTreeMap::from([
                ("k".into(), json!(k)),
                ("d".into(), json!(d)),
                ("n".into(), json!(n_per_cluster)),
                ("sigma".into(), json!(sigma)),
            ]),
            seed: Some(rng.seed()),
            opt_cost: None,
            note: None,
        },
    )
}

const MAX_PASSES: usize = 100;
const MIN_IMPROVEMENT: f64 = 1e-6;

/// A reference clustering: seeding proportional to the `p`-th power of the
/// distance to the closest chosen center, then alternating assignment and
/// recentering passes until the relative improvement drops below `1e-6`
/// or 100 passes have run.
pub fn reference_centers(points: &[Point], k: usize, p: f64, rng: &mut RngStream) -> Result<CenterSet> {
    check_p(p)?;
    if k == 0 || points.len() < k {
        return Err(invalid(format!("need 1 <= k <= n, got k = {k}, n = {}", points.len())));
    }
    check_points(points, points[0].dim())?;

    let first = (rng.uniform() * points.len() as f64) as usize;
    let mut chosen = vec![points[first.min(points.len() - 1)].clone()];
    let mut weight: Vec<f64> = points
        .iter()
        .map(|x| dist_pow(x.coords(), chosen[0].coords(), p))
        .collect();
    while chosen.len() < k {
        let total: f64 = weight.iter().sum();
        if !(total > 0.0) {
            return Err(invalid(format!("fewer than {k} distinct points")));
        }
        let mut target = rng.uniform() * total;
        let mut pick = None;
        for (i, &w) in weight.iter().enumerate() {
            if w <= 0.0 {
                continue;
            }
            pick = Some(i);
            if target < w {
                break;
            }
            target -= w;
        }
        let c = points[pick.expect("positive total")].clone();
        for (w, x) in weight.iter_mut().zip(points) {
            *w = w.min(dist_pow(x.coords(), c.coords(), p));
        }
        chosen.push(c);
    }

    let mut centers = CenterSet::new(chosen)?;
    let mut cost = f64::INFINITY;
    for _ in 0..MAX_PASSES {
        let mut groups: Vec<Vec<&Point>> = vec![Vec::new(); k];
        let mut new_cost = 0.0;
        for x in points {
            let (j, d) = nearest_center(x.coords(), &centers, p);
            groups[j].push(x);
            new_cost += d;
        }
        let improved = cost.is_infinite() || cost - new_cost > MIN_IMPROVEMENT * cost;
        cost = new_cost;
        if !improved {
            break;
        }
        let moved: Vec<Point> = groups
            .iter()
            .zip(centers.centers())
            .map(|(g, old)| optimal_center(g, p).unwrap_or_else(|| old.clone()))
            .collect();
        match CenterSet::new(moved) {
            Ok(next) => centers = next,
            Err(_) => break,
        }
    }
    Ok(centers)
}
