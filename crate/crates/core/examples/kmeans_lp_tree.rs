//! Explains a k-means clustering with a tree grown from `D_2` cuts.
//!
//! Reference centers come from seeding plus assignment/recentering passes on
//! the points; the tree is then compared with them, both with the leaves
//! paying their own reference center and with every leaf recentered.
//!
//! cargo run --example kmeans_lp_tree [k] [p]

use xcluster::builders::build_lp;
use xcluster::cost::{cost_of_tree, LeafCenterMode};
use xcluster::instances::{gen_gaussian_mixture, reference_centers};
use xcluster::rng::RngStream;

fn main() -> xcluster::error::Result<()> {
    let mut args = std::env::args().skip(1);
    let k: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(8);
    let p: f64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(2.0);

    let inst = gen_gaussian_mixture(k, 3, 50, 0.04, &mut RngStream::new(11))?;
    let centers = reference_centers(&inst.points, k, p, &mut RngStream::new(12))?;

    let mut ratios = Vec::new();
    for seed in 0..20 {
        let (tree, trace) = build_lp(&centers, p, &mut RngStream::new(seed), 4)?;
        let r = cost_of_tree(&inst.points, &tree, &centers, p, LeafCenterMode::Optimal)?;
        if seed < 3 {
            println!(
                "seed {seed}: reference-center cost {:.4}, recentered {:.4}, discarded cuts {}",
                r.cost_reference_centers,
                r.cost_optimal_leaf_centers.unwrap_or(f64::NAN),
                trace.discarded
            );
        }
        ratios.push(r.cost_reference_centers / r.cost_nearest_centers);
    }
    ratios.sort_by(f64::total_cmp);
    println!(
        "p={p} k={k}: ratio to the unconstrained clustering over 20 seeds: min {:.3}, median {:.3}, max {:.3}",
        ratios[0],
        ratios[ratios.len() / 2],
        ratios[ratios.len() - 1]
    );
    Ok(())
}
