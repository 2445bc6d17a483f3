use proptest::prelude::*;
use xcluster::fast::{CoverageTree, DimensionIntervalIndex, SplitHierarchy};
use xcluster::model::ThresholdCut;
use xcluster::rng::RngStream;

fn extents(points: &[Vec<f64>], members: &[usize], d: usize) -> Vec<(f64, f64)> {
    (0..d)
        .map(|i| {
            members.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &j| {
                (lo.min(points[j][i]), hi.max(points[j][i]))
            })
        })
        .collect()
}

fn brute_stab(leaves: &[Vec<usize>], points: &[Vec<f64>], cut: ThresholdCut) -> Vec<u32> {
    leaves
        .iter()
        .enumerate()
        .filter(|(_, m)| {
            let l = m.iter().filter(|&&j| points[j][cut.dim] <= cut.theta).count();
            l > 0 && l < m.len()
        })
        .map(|(id, _)| id as u32)
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hierarchy_stab_matches_brute_force(
        points in prop::collection::vec(prop::collection::vec(0u8..12, 2), 2..30),
        cuts in prop::collection::vec((0usize..2, 0u8..12), 1..40),
        probes in prop::collection::vec((0usize..2, -1.0f64..13.0), 10),
    ) {
        let points: Vec<Vec<f64>> = points.iter().map(|p| p.iter().map(|&v| v as f64).collect()).collect();
        let mut leaves = vec![(0..points.len()).collect::<Vec<_>>()];
        let mut h = SplitHierarchy::new(&extents(&points, &leaves[0], 2));

        for (dim, t) in cuts {
            let cut = ThresholdCut::new(dim, t as f64 + 0.5);
            let split = brute_stab(&leaves, &points, cut);
            prop_assert_eq!(h.stab(cut), split.clone());
            for leaf in split {
                let (l, r): (Vec<usize>, Vec<usize>) =
                    leaves[leaf as usize].iter().partition(|&&j| cut.goes_left(&points[j]));
                let right = leaves.len() as u32;
                h.split(leaf, (leaf, &extents(&points, &l, 2)), (right, &extents(&points, &r, 2)));
                leaves[leaf as usize] = l;
                leaves.push(r);
            }
            for &(dim, theta) in &probes {
                let probe = ThresholdCut::new(dim, theta);
                prop_assert_eq!(h.stab(probe), brute_stab(&leaves, &points, probe));
            }
        }
    }
}

#[test]
fn conditioned_uniform_cut_is_uniform_on_the_union() {
    let breaks = [vec![0.0, 1.0, 3.0, 4.0, 8.0], vec![0.0, 0.5, 2.0]];
    let trees = breaks
        .iter()
        .map(|b| {
            let w: Vec<f64> = b.windows(2).map(|p| p[1] - p[0]).collect();
            CoverageTree::with_weights(b.clone(), &w)
        })
        .collect();
    let mut index = DimensionIntervalIndex::new(trees);
    // dim 0 covers [0,3) and [4,8); dim 1 covers [0.5,2)
    index.insert(0, 0, 0.0, 1.0);
    index.insert(1, 0, 1.0, 3.0);
    index.insert(2, 0, 4.0, 8.0);
    index.insert(0, 1, 0.5, 2.0);
    let total = index.total_union_length();
    assert!((total - 8.5).abs() < 1e-12);

    let expected = [vec![1.0, 2.0, 0.0, 4.0], vec![0.0, 1.5]];
    let mut seen = [vec![0u64; 4], vec![0u64; 2]];
    let n = 200_000u64;
    let mut rng = RngStream::new(17);
    for _ in 0..n {
        let cut = index.sample_conditioned_uniform(&mut rng).unwrap();
        let j = breaks[cut.dim].windows(2).position(|w| w[0] <= cut.theta && cut.theta < w[1]).unwrap();
        seen[cut.dim][j] += 1;
    }
    let mut tv = 0.0;
    for dim in 0..2 {
        for (j, &c) in seen[dim].iter().enumerate() {
            if expected[dim][j] == 0.0 {
                assert_eq!(c, 0, "mass on an uncovered interval");
            }
            tv += (c as f64 / n as f64 - expected[dim][j] / total).abs();
        }
    }
    assert!(tv / 2.0 < 0.01, "total variation {tv}");
}
