use crate::cost::{check_p, nearest_center};
use crate::error::{invalid, Error, Result};
use crate::model::{check_points, CenterSet, NodeId, Point, ThresholdCut, ThresholdTree, TreeAssembly};

/// Deterministic min-cut baseline.
///
/// Every point is first assigned to its nearest center under `l_p`
/// (`assign_p`). At each node, among the midpoints between consecutive
/// distinct coordinates of the node's points and centers that separate at
/// least two of the node's centers, the cut separating the fewest points
/// from their own center wins; ties go to the lowest dimension, then the
/// lowest threshold. Both children are then built recursively.
pub fn build_imm_min_cut(
    points: &[Point],
    centers: &CenterSet,
    assign_p: f64,
) -> Result<ThresholdTree> {
    check_p(assign_p)?;
    check_points(points, centers.dim())?;
    if points.is_empty() {
        return Err(invalid("the min-cut baseline needs at least one point"));
    }
    let owner: Vec<usize> = points
        .iter()
        .map(|x| nearest_center(x.coords(), centers, assign_p).0)
        .collect();

    let (mut tree, root) = TreeAssembly::new(centers.dim());
    let mut stack: Vec<(NodeId, Vec<usize>, Vec<usize>)> =
        vec![(root, (0..points.len()).collect(), (0..centers.k()).collect())];
    let mut in_node = vec![false; centers.k()];

    while let Some((node, pts, ctrs)) = stack.pop() {
        if ctrs.len() == 1 {
            tree.close(node, ctrs[0]);
            continue;
        }
        for &c in &ctrs {
            in_node[c] = true;
        }
        let cut = best_cut(points, centers, &owner, &in_node, &pts, &ctrs).ok_or_else(|| {
            Error::Structural("node with several centers has no separating cut".into())
        })?;
        for &c in &ctrs {
            in_node[c] = false;
        }

        let (left, right) = tree.split(node, cut);
        let (lp, rp): (Vec<usize>, Vec<usize>) =
            pts.into_iter().partition(|&i| cut.goes_left(points[i].coords()));
        let (lc, rc): (Vec<usize>, Vec<usize>) = ctrs
            .into_iter()
            .partition(|&j| cut.goes_left(centers.get(j).coords()));
        stack.push((right, rp, rc));
        stack.push((left, lp, lc));
    }
    tree.finish()
}

fn best_cut(
    points: &[Point],
    centers: &CenterSet,
    owner: &[usize],
    in_node: &[bool],
    pts: &[usize],
    ctrs: &[usize],
) -> Option<ThresholdCut> {
    let mut best: Option<(usize, ThresholdCut)> = None;
    let mut values: Vec<f64> = Vec::with_capacity(pts.len() + ctrs.len());
    for dim in 0..centers.dim() {
        values.clear();
        values.extend(pts.iter().map(|&i| points[i][dim]));
        values.extend(ctrs.iter().map(|&j| centers.coord(j, dim)));
        values.sort_by(f64::total_cmp);
        values.dedup();
        let rank = |v: f64| values.partition_point(|&u| u < v);

        let (cmin, cmax) = ctrs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &j| {
            let v = centers.coord(j, dim);
            (lo.min(v), hi.max(v))
        });
        if cmin == cmax {
            continue;
        }
        // candidate t sits between values[t] and values[t + 1]
        let mut diff = vec![0i64; values.len() + 1];
        for &i in pts {
            let c = owner[i];
            if !in_node[c] {
                continue;
            }
            let (x, m) = (points[i][dim], centers.coord(c, dim));
            if x != m {
                diff[rank(x.min(m))] += 1;
                diff[rank(x.max(m))] -= 1;
            }
        }
        let (tlo, thi) = (rank(cmin), rank(cmax));
        let mut running = 0i64;
        for t in 0..thi {
            running += diff[t];
            if t < tlo {
                continue;
            }
            let count = running as usize;
            if best.is_none_or(|(b, _)| count < b) {
                let theta = 0.5 * (values[t] + values[t + 1]);
                best = Some((count, ThresholdCut::new(dim, theta)));
            }
        }
    }
    best.map(|(_, cut)| cut)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::{cost_of_tree, LeafCenterMode};

    fn pts(v: &[f64]) -> Vec<Point> {
        v.iter().map(|&x| Point::new(vec![x]).unwrap()).collect()
    }

    #[test]
    fn separates_two_clean_clusters_for_free() {
        let c = CenterSet::from_coords(vec![vec![0.0], vec![10.0]]).unwrap();
        let points = pts(&[0.0, 10.0]);
        let tree = build_imm_min_cut(&points, &c, 1.0).unwrap();
        assert_eq!(tree.cuts().collect::<Vec<_>>(), vec![ThresholdCut::new(0, 5.0)]);
        let r = cost_of_tree(&points, &tree, &c, 1.0, LeafCenterMode::Reference).unwrap();
        assert_eq!(r.cost(), 0.0);
    }

    #[test]
    fn picks_the_cut_with_fewest_mistakes() {
        // (4, 0) ties and goes to center 0, so every dim-0 cut misplaces it
        let c = CenterSet::from_coords(vec![vec![0.0, 0.0], vec![4.0, 4.0]]).unwrap();
        let points = vec![
            Point::new(vec![4.0, 0.0]).unwrap(),
            Point::new(vec![0.5, 0.0]).unwrap(),
            Point::new(vec![4.0, 3.5]).unwrap(),
        ];
        let tree = build_imm_min_cut(&points, &c, 1.0).unwrap();
        let cut = tree.cuts().next().unwrap();
        assert_eq!(cut.dim, 1);
        let r = cost_of_tree(&points, &tree, &c, 1.0, LeafCenterMode::Reference).unwrap();
        assert_eq!(r.cost(), r.cost_nearest_centers);
    }

    #[test]
    fn is_deterministic_and_valid() {
        let mut rng = crate::rng::RngStream::new(5);
        let c = CenterSet::from_coords(
            (0..12).map(|_| vec![rng.uniform(), rng.uniform()]).collect(),
        )
        .unwrap();
        let points: Vec<Point> = (0..300)
            .map(|_| Point::new(vec![rng.uniform(), rng.uniform()]).unwrap())
            .collect();
        let a = build_imm_min_cut(&points, &c, 2.0).unwrap();
        let b = build_imm_min_cut(&points, &c, 2.0).unwrap();
        assert_eq!(a, b);
        a.check_centers(&c).unwrap();
        assert_eq!(a.num_cuts(), 11);
    }

    #[test]
    fn needs_points() {
        let c = CenterSet::from_coords(vec![vec![0.0], vec![1.0]]).unwrap();
        assert!(build_imm_min_cut(&[], &c, 1.0).is_err());
    }
}
