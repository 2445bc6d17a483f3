//! The lower-bound family: `m` centers in `m(m-1)` dimensions, pairwise at
//! the same distance, with `2d` unit neighbours around each. Every
//! threshold tree pays a lot here, whatever the builder.
//!
//! cargo run --example lower_bound [m]

use xcluster::builders::Algorithm;
use xcluster::cost::{cost_of_tree, cost_to_centers, lp_pow_distance, LeafCenterMode};
use xcluster::instances::gen_lower_bound;
use xcluster::oracle::delta_p_pow;
use xcluster::rng::RngStream;

fn main() -> xcluster::error::Result<()> {
    let m: u64 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(5);
    let inst = gen_lower_bound(m)?;
    let centers = inst.centers()?;
    println!("m={m}: d={}, n={}", inst.dim, inst.n());

    for p in [1.0, 2.0, 3.0] {
        let pair = lp_pow_distance(centers.get(0), centers.get(1), p)?;
        let base = cost_to_centers(&inst.points, centers, p)?;
        let mut worst = 0.0f64;
        let mut best = f64::INFINITY;
        for alg in [Algorithm::Uniform, Algorithm::Lp, Algorithm::Imm] {
            let runs = if alg.is_randomized() { 20 } else { 1 };
            for seed in 0..runs {
                let (tree, _) = alg.build(centers, &inst.points, p, 4, &mut RngStream::new(seed))?;
                let c = cost_of_tree(&inst.points, &tree, centers, p, LeafCenterMode::Reference)?.cost();
                worst = worst.max(c / base);
                best = best.min(c / base);
            }
        }
        println!(
            "p={p}: center distance^p {pair} (closed form {}), tree cost / center cost in [{best:.2}, {worst:.2}]",
            delta_p_pow(m, p)
        );
    }
    Ok(())
}
