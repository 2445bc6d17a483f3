//! Builds a threshold tree with uniformly random cuts and prints it.
//!
//! cargo run --example uniform_tree [k] [seed]

use xcluster::builders::build_uniform;
use xcluster::cost::{cost_of_tree, LeafCenterMode};
use xcluster::instances::gen_gaussian_mixture;
use xcluster::model::{Node, ThresholdTree};
use xcluster::rng::RngStream;

fn main() -> xcluster::error::Result<()> {
    let args: Vec<u64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let k = args.first().copied().unwrap_or(5) as usize;
    let seed = args.get(1).copied().unwrap_or(7);

    let inst = gen_gaussian_mixture(k, 2, 40, 0.05, &mut RngStream::new(seed))?;
    let centers = inst.centers()?;
    let (tree, trace) = build_uniform(centers, &mut RngStream::substream(seed, 1))?;

    print_node(&tree, tree.root(), 0);
    let report = cost_of_tree(&inst.points, &tree, centers, 1.0, LeafCenterMode::Reference)?;
    println!(
        "k={k} depth={} cuts drawn={} (unconditioned {})",
        tree.depth(),
        trace.accepted,
        trace.unconditioned_draws
    );
    println!(
        "k-medians cost {:.3} vs {:.3} for the centers themselves (ratio {:.3})",
        report.cost_reference_centers, report.cost_nearest_centers, report.ratio_to_reference
    );
    println!("cluster sizes {:?}", tree.assign(&inst.points)?.cluster_sizes());
    Ok(())
}

fn print_node(tree: &ThresholdTree, id: usize, depth: usize) {
    let pad = "  ".repeat(depth);
    match tree.node(id) {
        Node::Leaf { center, .. } => println!("{pad}-> center {center}"),
        Node::Split { cut, left, right } => {
            println!("{pad}x{} <= {:.4}", cut.dim, cut.theta);
            print_node(tree, *left, depth + 1);
            print_node(tree, *right, depth + 1);
        }
    }
}
