//! Exhaustive search for the best threshold tree on a tiny instance, and how
//! close the randomized builders come to it.
//!
//! cargo run --release --example oracle_check [seed]

use xcluster::builders::Algorithm;
use xcluster::cost::{cost_of_tree, LeafCenterMode};
use xcluster::instances::gen_gaussian_mixture;
use xcluster::oracle::brute_force_opt_tree;
use xcluster::rng::RngStream;

fn main() -> xcluster::error::Result<()> {
    let seed: u64 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(5);
    let inst = gen_gaussian_mixture(3, 2, 4, 0.15, &mut RngStream::new(seed))?;
    let centers = inst.centers()?;
    let p = 1.0;

    let best = brute_force_opt_tree(&inst.points, centers, p)?;
    println!(
        "optimum over all threshold trees: {:.4} (own centers), {:.4} (recentered); {} subproblems",
        best.cost_reference, best.cost_optimal, best.explored
    );
    for alg in Algorithm::ALL {
        let runs = if alg.is_randomized() { 200 } else { 1 };
        let mut hits = 0;
        let mut mean = 0.0;
        for s in 0..runs {
            let (tree, _) = alg.build(centers, &inst.points, p, 4, &mut RngStream::new(s))?;
            let c = cost_of_tree(&inst.points, &tree, centers, p, LeafCenterMode::Reference)?.cost();
            assert!(c >= best.cost_reference * (1.0 - 1e-9), "{alg} beat the optimum");
            hits += usize::from(c <= best.cost_reference * (1.0 + 1e-9));
            mean += c / runs as f64;
        }
        println!("{alg:14} mean cost {mean:.4}, optimal in {hits}/{runs} runs");
    }
    Ok(())
}
