//! The greedy min-cut baseline against random cuts on the family built to
//! fool it: as `m` grows its cost ratio keeps rising.
//!
//! cargo run --release --example min_cut_baseline

use xcluster::builders::Algorithm;
use xcluster::cost::{cost_of_tree, LeafCenterMode};
use xcluster::instances::gen_adversarial;
use xcluster::rng::RngStream;

fn main() -> xcluster::error::Result<()> {
    for m in [3u64, 5, 7, 11] {
        let inst = gen_adversarial(m)?;
        let centers = inst.centers()?;
        let opt = inst.meta.opt_cost.expect("closed-form optimum");
        let cost = |alg: Algorithm, seed: u64| -> xcluster::error::Result<f64> {
            let (tree, _) = alg.build(centers, &inst.points, 1.0, 4, &mut RngStream::new(seed))?;
            Ok(cost_of_tree(&inst.points, &tree, centers, 1.0, LeafCenterMode::Reference)?.cost() / opt)
        };
        let imm = cost(Algorithm::Imm, 0)?;
        let mut uniform: Vec<f64> = (0..50).map(|s| cost(Algorithm::Uniform, s)).collect::<Result<_, _>>()?;
        uniform.sort_by(f64::total_cmp);
        println!(
            "m={m:2} k={m:2} d={:3}: min-cut ratio {imm:.3}, uniform median ratio {:.3}",
            inst.dim,
            uniform[uniform.len() / 2]
        );
    }
    Ok(())
}
