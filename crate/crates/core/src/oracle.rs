//! Ground truth for tests and benchmarks: exhaustive optimal trees on tiny
//! instances, closed-form and quadrature values, and statistical tests.

use std::collections::HashMap;

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::cost::{check_p, dist_pow, optimal_cluster_cost, pow_abs};
use crate::error::{invalid, Error, Result};
use crate::model::{check_points, CenterSet, Point, ThresholdCut, ThresholdTree, TreeAssembly};

pub const ORACLE_MAX_K: usize = 4;
pub const ORACLE_MAX_D: usize = 3;
pub const ORACLE_MAX_N: usize = 14;

/// Optimal explainable clusterings found by exhaustive search.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    /// Best cost when every leaf pays distances to its own center.
    pub cost_reference: f64,
    pub tree_reference: ThresholdTree,
    /// Best cost when every leaf is recentered optimally.
    pub cost_optimal: f64,
    pub tree_optimal: ThresholdTree,
    /// Distinct `(points, centers)` subproblems solved.
    pub explored: usize,
}

#[derive(Debug, Clone, Copy)]
struct Best {
    cost_reference: f64,
    cut_reference: Option<ThresholdCut>,
    cost_optimal: f64,
    cut_optimal: Option<ThresholdCut>,
}

struct Search<'a> {
    points: &'a [Point],
    centers: &'a CenterSet,
    p: f64,
    memo: HashMap<(u32, u32), Best>,
}

impl Search<'_> {
    fn solve(&mut self, pts: u32, ctrs: u32) -> Best {
        if let Some(&b) = self.memo.get(&(pts, ctrs)) {
            return b;
        }
        let members: Vec<&Point> = bits(pts).map(|i| &self.points[i]).collect();
        let best = if ctrs.count_ones() == 1 {
            let c = self.centers.get(ctrs.trailing_zeros() as usize);
            Best {
                cost_reference: members.iter().map(|x| dist_pow(x.coords(), c.coords(), self.p)).sum(),
                cut_reference: None,
                cost_optimal: optimal_cluster_cost(&members, self.p),
                cut_optimal: None,
            }
        } else {
            let mut best = Best {
                cost_reference: f64::INFINITY,
                cut_reference: None,
                cost_optimal: f64::INFINITY,
                cut_optimal: None,
            };
            for cut in self.candidates(pts, ctrs) {
                let (lc, rc) = self.side_masks(bits(ctrs).map(|j| self.centers.get(j)), ctrs, cut);
                let (lp, rp) = self.side_masks(bits(pts).map(|i| &self.points[i]), pts, cut);
                let (l, r) = (self.solve(lp, lc), self.solve(rp, rc));
                let cost = l.cost_reference + r.cost_reference;
                if cost < best.cost_reference {
                    best.cost_reference = cost;
                    best.cut_reference = Some(cut);
                }
                let cost = l.cost_optimal + r.cost_optimal;
                if cost < best.cost_optimal {
                    best.cost_optimal = cost;
                    best.cut_optimal = Some(cut);
                }
            }
            best
        };
        self.memo.insert((pts, ctrs), best);
        best
    }

    /// Midpoints between consecutive distinct coordinates of the node's
    /// points and centers that leave centers on both sides. Costs are
    /// constant between consecutive coordinates, so nothing is missed.
    fn candidates(&self, pts: u32, ctrs: u32) -> Vec<ThresholdCut> {
        let mut out = Vec::new();
        for dim in 0..self.centers.dim() {
            let mut values: Vec<f64> = bits(pts)
                .map(|i| self.points[i][dim])
                .chain(bits(ctrs).map(|j| self.centers.coord(j, dim)))
                .collect();
            values.sort_by(f64::total_cmp);
            values.dedup();
            let (lo, hi) = bits(ctrs)
                .map(|j| self.centers.coord(j, dim))
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
            for w in values.windows(2) {
                if w[0] >= lo && w[1] <= hi {
                    out.push(ThresholdCut::new(dim, 0.5 * (w[0] + w[1])));
                }
            }
        }
        out
    }

    fn side_masks<'p>(&self, xs: impl Iterator<Item = &'p Point>, mask: u32, cut: ThresholdCut) -> (u32, u32) {
        let mut left = 0;
        for (x, i) in xs.zip(bits(mask)) {
            if cut.goes_left(x.coords()) {
                left |= 1 << i;
            }
        }
        (left, mask & !left)
    }

    fn tree(&mut self, optimal: bool) -> Result<ThresholdTree> {
        let (mut asm, root) = TreeAssembly::new(self.centers.dim());
        let mut stack = vec![(root, full_mask(self.points.len()), full_mask(self.centers.k()))];
        while let Some((node, pts, ctrs)) = stack.pop() {
            let best = self.solve(pts, ctrs);
            let cut = if optimal { best.cut_optimal } else { best.cut_reference };
            match cut {
                None => asm.close(node, ctrs.trailing_zeros() as usize),
                Some(cut) => {
                    let (lc, rc) = self.side_masks(bits(ctrs).map(|j| self.centers.get(j)), ctrs, cut);
                    let (lp, rp) = self.side_masks(bits(pts).map(|i| &self.points[i]), pts, cut);
                    let (l, r) = asm.split(node, cut);
                    stack.push((l, lp, lc));
                    stack.push((r, rp, rc));
                }
            }
        }
        asm.finish()
    }
}

fn bits(mask: u32) -> impl Iterator<Item = usize> {
    (0..32).filter(move |i| mask >> i & 1 == 1)
}

fn full_mask(n: usize) -> u32 {
    ((1u64 << n) - 1) as u32
}

/// The cheapest threshold tree over all trees with one center per leaf,
/// both with leaves paying their own center and with optimal recentering.
/// Refuses instances with `k > 4`, `d > 3` or `n > 14`.
pub fn brute_force_opt_tree(points: &[Point], centers: &CenterSet, p: f64) -> Result<OracleResult> {
    check_p(p)?;
    check_points(points, centers.dim())?;
    let (k, d, n) = (centers.k(), centers.dim(), points.len());
    if k > ORACLE_MAX_K || d > ORACLE_MAX_D || n > ORACLE_MAX_N {
        return Err(Error::SizeGuard {
            k,
            d,
            n,
            max_k: ORACLE_MAX_K,
            max_d: ORACLE_MAX_D,
            max_n: ORACLE_MAX_N,
        });
    }
    let mut search = Search {
        points,
        centers,
        p,
        memo: HashMap::new(),
    };
    let best = search.solve(full_mask(n), full_mask(k));
    let tree_reference = search.tree(false)?;
    let tree_optimal = search.tree(true)?;
    Ok(OracleResult {
        cost_reference: best.cost_reference,
        tree_reference,
        cost_optimal: best.cost_optimal,
        tree_optimal,
        explored: search.memo.len(),
    })
}

/// `(2 * sum_{i=1}^{m-1} (m - i) i^p)^(1/p)`: the common distance between
/// centers of the lower-bound family.
pub fn delta_p(m: u64, p: f64) -> f64 {
    delta_p_pow(m, p).powf(1.0 / p)
}

/// `delta_p(m, p)^p`, exact for integer `p` and moderate `m`.
pub fn delta_p_pow(m: u64, p: f64) -> f64 {
    2.0 * (1..m).map(|i| (m - i) as f64 * pow_abs(i as f64, p)).sum::<f64>()
}

/// Law of a single random cut between two 1-D centers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OneCutLaw {
    Uniform,
    Dp,
}

/// Expected cost of the two-leaf tree produced by one random cut between
/// two 1-D centers, by adaptive Simpson quadrature of cost times density.
/// The `D_p` density `min(theta - a, b - theta)^(p - 1)` is normalized
/// numerically, independently of the samplers.
pub fn expected_one_cut_cost(centers: [f64; 2], points: &[f64], p: f64, law: OneCutLaw) -> Result<f64> {
    check_p(p)?;
    let (a, b) = (centers[0].min(centers[1]), centers[0].max(centers[1]));
    if !(a < b) || points.iter().any(|x| !x.is_finite()) {
        return Err(invalid("need two distinct centers and finite points"));
    }
    let weight = |t: f64| match law {
        OneCutLaw::Uniform => 1.0,
        OneCutLaw::Dp => pow_abs((t - a).min(b - t), p - 1.0),
    };
    let cost = |t: f64| -> f64 {
        points
            .iter()
            .map(|&x| if x <= t { pow_abs(x - a, p) } else { pow_abs(x - b, p) })
            .sum()
    };
    let mut knots: Vec<f64> = points.iter().copied().filter(|&x| a < x && x < b).collect();
    knots.extend([a, b, 0.5 * (a + b)]);
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    let (mut num, mut den) = (0.0, 0.0);
    for w in knots.windows(2) {
        // cost is constant inside each piece; evaluate it at the midpoint
        let c = cost(0.5 * (w[0] + w[1]));
        let mass = integrate(&weight, w[0], w[1], 1e-12);
        num += c * mass;
        den += mass;
    }
    Ok(num / den)
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` to relative tolerance `tol`.
pub fn integrate(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson(f, a, b, fa, fm, fb, whole, tol * whole.abs().max(f64::MIN_POSITIVE), 50)
}

#[allow(clippy::too_many_arguments)]
fn simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, eps: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * eps {
        return left + right + delta / 15.0;
    }
    simpson(f, a, m, fa, flm, fm, left, eps / 2.0, depth - 1) + simpson(f, m, b, fm, frm, fb, right, eps / 2.0, depth - 1)
}

/// Smallest sample accepted by the tests against an analytic law.
pub const MIN_SAMPLES: usize = 10_000;
/// Smallest sample per side accepted by the two-sample test.
pub const MIN_TWO_SAMPLE: usize = 1_000;
/// Significance level used for the verdicts.
pub const ALPHA: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TestKind {
    KolmogorovSmirnov,
    TwoSampleKolmogorovSmirnov,
    ChiSquare,
    BinomialBand,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TestVerdict {
    pub kind: TestKind,
    pub statistic: f64,
    /// Asymptotic p-value (for the band test: the z-score's two-sided tail).
    pub p_value: f64,
    pub n: usize,
    pub pass: bool,
}

fn need(got: usize, min: usize) -> Result<()> {
    if got < min {
        Err(Error::UnderSampled { got, need: min })
    } else {
        Ok(())
    }
}

/// `P(K > lambda)` for the Kolmogorov distribution.
pub fn kolmogorov_tail(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for j in 1..=100 {
        let term = (-2.0 * (j * j) as f64 * lambda * lambda).exp();
        sum += if j % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// One-sample KS statistic `sup |F_n - F|`.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

pub fn ks_test(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<TestVerdict> {
    need(samples.len(), MIN_SAMPLES)?;
    let d = ks_statistic(samples, cdf);
    let sn = (samples.len() as f64).sqrt();
    let p_value = kolmogorov_tail((sn + 0.12 + 0.11 / sn) * d);
    Ok(TestVerdict {
        kind: TestKind::KolmogorovSmirnov,
        statistic: d,
        p_value,
        n: samples.len(),
        pass: p_value >= ALPHA,
    })
}

/// Two-sample KS: `sup |F_a - F_b|`, rejected when it exceeds
/// `c(alpha) sqrt((n + m) / (n m))`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<TestVerdict> {
    need(a.len().min(b.len()), MIN_TWO_SAMPLE)?;
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    let (n, m) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < xs.len() && j < ys.len() {
        let t = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] <= t {
            i += 1;
        }
        while j < ys.len() && ys[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    let en = (n * m / (n + m)).sqrt();
    let p_value = kolmogorov_tail((en + 0.12 + 0.11 / en) * d);
    Ok(TestVerdict {
        kind: TestKind::TwoSampleKolmogorovSmirnov,
        statistic: d,
        p_value,
        n: xs.len() + ys.len(),
        pass: d <= ks_critical(ALPHA) * ((n + m) / (n * m)).sqrt(),
    })
}

/// `c(alpha) = sqrt(-ln(alpha / 2) / 2)`; 1.628 at `alpha = 0.01`.
pub fn ks_critical(alpha: f64) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt()
}

/// Pearson chi-square of observed counts against cell probabilities.
pub fn chi_square_test(observed: &[u64], probs: &[f64]) -> Result<TestVerdict> {
    if observed.len() != probs.len() || observed.len() < 2 {
        return Err(invalid("need at least two cells with matching probabilities"));
    }
    let n: u64 = observed.iter().sum();
    need(n as usize, MIN_SAMPLES)?;
    let mut stat = 0.0;
    let mut cells = 0;
    for (&o, &q) in observed.iter().zip(probs) {
        let e = q * n as f64;
        if e > 0.0 {
            stat += (o as f64 - e).powi(2) / e;
            cells += 1;
        } else if o > 0 {
            stat = f64::INFINITY;
        }
    }
    let df = (cells.max(2) - 1) as f64;
    let p_value = if stat.is_finite() {
        1.0 - ChiSquared::new(df).expect("positive df").cdf(stat)
    } else {
        0.0
    };
    Ok(TestVerdict {
        kind: TestKind::ChiSquare,
        statistic: stat,
        p_value,
        n: n as usize,
        pass: p_value >= ALPHA,
    })
}

/// Whether `successes / n` lies within `sigmas` binomial standard deviations of `prob`.
pub fn binomial_band(successes: u64, n: u64, prob: f64, sigmas: f64) -> Result<TestVerdict> {
    need(n as usize, MIN_SAMPLES)?;
    if !(0.0..=1.0).contains(&prob) {
        return Err(invalid(format!("probability out of range: {prob}")));
    }
    let freq = successes as f64 / n as f64;
    let sd = (prob * (1.0 - prob) / n as f64).sqrt();
    let z = if sd > 0.0 {
        (freq - prob) / sd
    } else if freq == prob {
        0.0
    } else {
        f64::INFINITY
    };
    let p_value = if z.is_finite() { erfc_two_sided(z) } else { 0.0 };
    Ok(TestVerdict {
        kind: TestKind::BinomialBand,
        statistic: z,
        p_value,
        n: n as usize,
        pass: z.abs() <= sigmas,
    })
}

fn erfc_two_sided(z: f64) -> f64 {
    use statrs::distribution::Normal;
    2.0 * (1.0 - Normal::standard().cdf(z.abs()))
}
