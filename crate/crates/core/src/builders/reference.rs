use crate::builders::{
    check_ell, discard_threshold, BuildTrace, TraceEvent, MAX_CONSECUTIVE_DISCARDS,
};
use crate::error::{Error, Result};
use crate::geometry::{all_intervals, bounding_box, DimensionIntervalSet};
use crate::model::{CenterSet, NodeId, ThresholdCut, ThresholdTree, TreeAssembly};
use crate::rng::RngStream;
use crate::sampling::{draws_until_hit, theta_inverse_cdf_unchecked, PairMetric};

/// Algorithm-1 style build: uniform cuts from `AllCuts`, every split leaf split.
pub fn build_uniform(
    centers: &CenterSet,
    rng: &mut RngStream,
) -> Result<(ThresholdTree, BuildTrace)> {
    let metric = PairMetric::l1(centers);
    run(centers, rng, Law::Uniform, &metric, None)
}

/// Sample-discard build: uniform cuts, but a cut separating two co-leaf
/// centers within `l_1` distance `c_max(t) / k^ell` is thrown away.
pub fn build_modified(
    centers: &CenterSet,
    rng: &mut RngStream,
    ell: u32,
) -> Result<(ThresholdTree, BuildTrace)> {
    check_ell(ell)?;
    let metric = PairMetric::l1(centers);
    run(centers, rng, Law::Uniform, &metric, Some(ell))
}

/// `l_p` build: `D_p` cuts, discarding any cut that separates two co-leaf
/// centers within pseudo-distance `c'_{p,max}(t) / k^ell`.
pub fn build_lp(
    centers: &CenterSet,
    p: f64,
    rng: &mut RngStream,
    ell: u32,
) -> Result<(ThresholdTree, BuildTrace)> {
    check_ell(ell)?;
    crate::cost::check_p(p)?;
    if centers.k() == 1 {
        return Ok((ThresholdTree::single_leaf(centers.dim()), BuildTrace::default()));
    }
    let intervals = all_intervals(centers, p)?;
    let metric = PairMetric::pseudo(centers, &intervals);
    run(centers, rng, Law::Dp(&intervals), &metric, Some(ell))
}

enum Law<'a> {
    Uniform,
    Dp(&'a DimensionIntervalSet),
}

struct Leaf {
    members: Vec<usize>,
    node: NodeId,
    diameter: f64,
}

fn run(
    centers: &CenterSet,
    rng: &mut RngStream,
    law: Law<'_>,
    metric: &PairMetric,
    ell: Option<u32>,
) -> Result<(ThresholdTree, BuildTrace)> {
    let k = centers.k();
    let mut trace = BuildTrace::default();
    if k == 1 {
        trace.finish(true);
        return Ok((ThresholdTree::single_leaf(centers.dim()), trace));
    }
    let full_mass = match law {
        Law::Uniform => bounding_box(centers).total_length(),
        Law::Dp(set) => set.total_weight(),
    };

    let (mut tree, root) = TreeAssembly::new(centers.dim());
    let all: Vec<usize> = (0..k).collect();
    let mut open = vec![Leaf {
        diameter: metric.diameter(&all),
        members: all,
        node: root,
    }];
    let mut iteration = 0u64;
    let mut consecutive_discards = 0u64;

    while !open.is_empty() {
        let c_max = open.iter().map(|l| l.diameter).fold(0.0, f64::max);
        let (cut, mass) = match law {
            Law::Uniform => sample_uniform_splitting(&open, centers, rng)?,
            Law::Dp(set) => sample_dp_splitting(&open, centers, set, rng)?,
        };
        let draws = draws_until_hit(mass / full_mass, rng);
        iteration += 1;

        let split: Vec<usize> = (0..open.len())
            .filter(|&b| splits(&open[b].members, centers, cut))
            .collect();
        if split.is_empty() {
            trace.resampled += 1;
            continue;
        }

        if let Some(ell) = ell {
            let threshold = discard_threshold(c_max, k, ell);
            let too_close = split.iter().any(|&b| {
                let (lo, hi) = partition(&open[b].members, centers, cut);
                lo.iter()
                    .any(|&g| hi.iter().any(|&h| metric.dist(g, h) <= threshold))
            });
            if too_close {
                trace.record(TraceEvent {
                    iteration,
                    cut,
                    accepted: false,
                    leaves_split: 0,
                    c_max: Some(c_max),
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
            c_max: Some(c_max),
            draws,
        });
        // remove split leaves back to front so indices stay valid
        let mut children = Vec::with_capacity(2 * split.len());
        for &b in split.iter().rev() {
            let leaf = open.swap_remove(b);
            let (lo, hi) = partition(&leaf.members, centers, cut);
            let (left, right) = tree.split(leaf.node, cut);
            children.push((lo, left));
            children.push((hi, right));
        }
        for (members, node) in children {
            if members.len() == 1 {
                tree.close(node, members[0]);
            } else {
                open.push(Leaf {
                    diameter: metric.diameter(&members),
                    members,
                    node,
                });
            }
        }
    }
    trace.finish(true);
    Ok((tree.finish()?, trace))
}

fn splits(members: &[usize], centers: &CenterSet, cut: ThresholdCut) -> bool {
    let mut left = false;
    let mut right = false;
    for &j in members {
        if centers.coord(j, cut.dim) <= cut.theta {
            left = true;
        } else {
            right = true;
        }
        if left && right {
            return true;
        }
    }
    false
}

fn partition(members: &[usize], centers: &CenterSet, cut: ThresholdCut) -> (Vec<usize>, Vec<usize>) {
    members
        .iter()
        .partition(|&&j| centers.coord(j, cut.dim) <= cut.theta)
}

fn extent(members: &[usize], centers: &CenterSet, dim: usize) -> (f64, f64) {
    members.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &j| {
        let v = centers.coord(j, dim);
        (lo.min(v), hi.max(v))
    })
}

/// Uniform cut conditioned on splitting some open leaf: uniform on the union
/// of the open leaves' per-dimension extents. Returns the cut and the union's
/// total length.
fn sample_uniform_splitting(
    open: &[Leaf],
    centers: &CenterSet,
    rng: &mut RngStream,
) -> Result<(ThresholdCut, f64)> {
    let mut unions: Vec<Vec<(f64, f64)>> = Vec::with_capacity(centers.dim());
    let mut lengths = Vec::with_capacity(centers.dim());
    for dim in 0..centers.dim() {
        let mut spans: Vec<(f64, f64)> = open
            .iter()
            .map(|l| extent(&l.members, centers, dim))
            .filter(|(lo, hi)| lo < hi)
            .collect();
        spans.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(spans.len());
        for (lo, hi) in spans {
            match merged.last_mut() {
                Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
                _ => merged.push((lo, hi)),
            }
        }
        lengths.push(merged.iter().map(|(a, b)| b - a).sum::<f64>());
        unions.push(merged);
    }
    let total: f64 = lengths.iter().sum();
    if !(total > 0.0) {
        return Err(Error::NoCut("no open leaf can be split".into()));
    }
    let mut target = rng.uniform() * total;
    let mut pick = None;
    'outer: for (dim, segs) in unions.iter().enumerate() {
        for &(lo, hi) in segs {
            pick = Some((dim, lo, hi));
            if target < hi - lo {
                break 'outer;
            }
            target -= hi - lo;
        }
    }
    let (dim, lo, hi) = pick.expect("positive union length");
    let theta = lo + rng.uniform() * (hi - lo);
    Ok((ThresholdCut::new(dim, theta), total))
}

/// `D_p` cut conditioned on splitting some open leaf: an elementary interval
/// is live iff it lies inside some open leaf's extent. Returns the cut and
/// the live weight.
fn sample_dp_splitting(
    open: &[Leaf],
    centers: &CenterSet,
    set: &DimensionIntervalSet,
    rng: &mut RngStream,
) -> Result<(ThresholdCut, f64)> {
    let mut live: Vec<Vec<bool>> = Vec::with_capacity(set.dim());
    let mut mass = Vec::with_capacity(set.dim());
    for dim in 0..set.dim() {
        let di = set.dimension(dim);
        let mut cover = vec![0i64; di.len() + 1];
        for leaf in open {
            let (lo, hi) = extent(&leaf.members, centers, dim);
            if lo < hi {
                cover[di.rank_of(lo).expect("center coordinate")] += 1;
                cover[di.rank_of(hi).expect("center coordinate")] -= 1;
            }
        }
        let mut running = 0;
        let flags: Vec<bool> = cover[..di.len()]
            .iter()
            .map(|c| {
                running += c;
                running > 0
            })
            .collect();
        mass.push(
            flags
                .iter()
                .zip(di.weights())
                .filter(|(f, _)| **f)
                .map(|(_, w)| w)
                .sum::<f64>(),
        );
        live.push(flags);
    }
    let total: f64 = mass.iter().sum();
    if !(total > 0.0) {
        return Err(Error::NoCut("no live interval left".into()));
    }
    let mut target = rng.uniform() * total;
    let mut pick = None;
    'outer: for (dim, flags) in live.iter().enumerate() {
        let di = set.dimension(dim);
        for (j, _) in flags.iter().enumerate().filter(|(_, f)| **f) {
            let w = di.weight(j);
            pick = Some((dim, j));
            if target < w {
                break 'outer;
            }
            target -= w;
        }
    }
    let (dim, j) = pick.expect("positive live weight");
    let (a, b) = set.dimension(dim).interval(j);
    let theta = theta_inverse_cdf_unchecked(a, b, set.p(), rng.uniform());
    Ok((ThresholdCut::new(dim, theta), total))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::{cost_of_tree, LeafCenterMode};
    use crate::model::Point;

    fn centers(rows: Vec<Vec<f64>>) -> CenterSet {
        CenterSet::from_coords(rows).unwrap()
    }

    fn random_centers(k: usize, d: usize, rng: &mut RngStream) -> CenterSet {
        centers(
            (0..k)
                .map(|_| (0..d).map(|_| rng.uniform()).collect())
                .collect(),
        )
    }

    #[test]
    fn single_center_gives_single_leaf() {
        let c = centers(vec![vec![1.0, 2.0]]);
        let mut rng = RngStream::new(0);
        for (tree, trace) in [
            build_uniform(&c, &mut rng).unwrap(),
            build_modified(&c, &mut rng, 4).unwrap(),
            build_lp(&c, 2.0, &mut rng, 4).unwrap(),
        ] {
            assert_eq!(tree.k(), 1);
            assert_eq!(trace.accepted, 0);
        }
    }

    #[test]
    fn two_centers_get_one_cut_between_them() {
        let c = centers(vec![vec![0.0], vec![1.0]]);
        let mut rng = RngStream::new(4);
        for _ in 0..500 {
            let (tree, trace) = build_uniform(&c, &mut rng).unwrap();
            let cuts: Vec<_> = tree.cuts().collect();
            assert_eq!(cuts.len(), 1);
            assert!((0.0..1.0).contains(&cuts[0].theta));
            assert_eq!(trace.unconditioned_draws, 1);
            tree.check_centers(&c).unwrap();
        }
    }

    #[test]
    fn builds_terminate_with_valid_trees() {
        let mut rng = RngStream::new(21);
        for k in [2, 3, 7, 20] {
            let c = random_centers(k, 3, &mut rng);
            for p in [1.0, 2.0, 3.0] {
                let (tree, trace) = build_lp(&c, p, &mut rng, 4).unwrap();
                assert_eq!((tree.k(), tree.num_cuts(), trace.splits), (k, k - 1, k - 1));
                tree.check_centers(&c).unwrap();
            }
            let (tree, trace) = build_modified(&c, &mut rng, 6).unwrap();
            tree.check_centers(&c).unwrap();
            assert!(trace.c_max.windows(2).all(|w| w[0] >= w[1]));
            assert_eq!(trace.c_max.last(), Some(&0.0));
        }
    }

    #[test]
    fn tiny_gap_is_never_cut_first() {
        // the pair {0, 1e-9} is within c_max / k^4 at the first iteration
        let c = centers(vec![vec![0.0], vec![1e-9], vec![1.0]]);
        let mut rng = RngStream::new(8);
        for _ in 0..10_000 {
            let (_, trace) = build_modified(&c, &mut rng, 4).unwrap();
            let first = trace.accepted_events().next().unwrap();
            assert!(first.cut.theta >= 1e-9);
        }
    }

    #[test]
    fn skewed_geometry_does_not_stall() {
        let c = centers(vec![vec![0.0, 0.0], vec![1e-12, 0.0], vec![1e6, 1e6]]);
        let mut rng = RngStream::new(2);
        let (tree, trace) = build_uniform(&c, &mut rng).unwrap();
        tree.check_centers(&c).unwrap();
        assert!(trace.unconditioned_draws > 1_000);
    }

    #[test]
    fn lp_with_p_one_matches_modified_on_l1() {
        // same law: compare the mean first-cut position over many runs
        let c = centers(vec![vec![0.0, 1.0], vec![3.0, 0.0], vec![1.0, 4.0]]);
        let mut rng = RngStream::new(12);
        let n = 40_000;
        let mean = |f: &mut dyn FnMut(&mut RngStream) -> ThresholdCut, rng: &mut RngStream| {
            let mut dims = [0usize; 2];
            let mut sum = 0.0;
            for _ in 0..n {
                let cut = f(rng);
                dims[cut.dim] += 1;
                sum += cut.theta;
            }
            (dims[0] as f64 / n as f64, sum / n as f64)
        };
        let first = |t: &BuildTrace| t.accepted_events().next().unwrap().cut;
        let a = mean(&mut |r| first(&build_modified(&c, r, 4).unwrap().1), &mut rng);
        let b = mean(&mut |r| first(&build_lp(&c, 1.0, r, 4).unwrap().1), &mut rng);
        assert!((a.0 - b.0).abs() < 0.015, "{a:?} {b:?}");
        assert!((a.1 - b.1).abs() < 0.03, "{a:?} {b:?}");
    }

    #[test]
    fn uniform_one_point_motivating_example() {
        // centers {-1, 100}, point 0, p = 2: expected cost 100
        let c = centers(vec![vec![-1.0], vec![100.0]]);
        let pts = vec![Point::new(vec![0.0]).unwrap()];
        let mut rng = RngStream::new(77);
        let n = 20_000;
        let mut total = 0.0;
        for _ in 0..n {
            let (tree, _) = build_uniform(&c, &mut rng).unwrap();
            total += cost_of_tree(&pts, &tree, &c, 2.0, LeafCenterMode::Reference)
                .unwrap()
                .cost();
        }
        let mean = total / n as f64;
        // sd of one run is about 995
        assert!((mean - 100.0).abs() < 4.0 * 995.0 / (n as f64).sqrt(), "{mean}");
    }

    #[test]
    fn rejects_small_ell() {
        let c = centers(vec![vec![0.0], vec![1.0]]);
        let mut rng = RngStream::new(0);
        assert!(build_modified(&c, &mut rng, 3).is_err());
    }
}
