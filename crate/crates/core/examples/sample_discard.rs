//! Follows the sample-discard rule through one build: every drawn cut, the
//! largest in-leaf distance when it was drawn, and whether it survived.
//! Then counts discards over many seeds; they are rare.
//!
//! cargo run --example sample_discard [k] [ell] [builds]

use xcluster::builders::build_modified;
use xcluster::model::CenterSet;
use xcluster::rng::RngStream;

fn main() -> xcluster::error::Result<()> {
    let mut args = std::env::args().skip(1);
    let k: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(12);
    let ell: u32 = args.next().and_then(|a| a.parse().ok()).unwrap_or(4);
    let builds: u64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(2000);

    // twins a hair apart inside two far groups, so close pairs are plentiful
    let mut rng = RngStream::new(3);
    let rows: Vec<Vec<f64>> = (0..k)
        .map(|j| {
            let base = if j % 4 < 2 { 0.0 } else { 100.0 };
            let twin = if j % 2 == 0 { 0.0 } else { 1e-3 };
            let (a, b) = (rng.uniform(), rng.uniform());
            vec![base + a + twin, base + b]
        })
        .collect();
    let centers = CenterSet::from_coords(rows)?;
    let (tree, trace) = build_modified(&centers, &mut RngStream::new(4), ell)?;

    for e in &trace.events {
        println!(
            "draw {:3}: x{} <= {:8.3}  c_max {:8.3}  {}",
            e.iteration,
            e.cut.dim,
            e.cut.theta,
            e.c_max.unwrap_or(0.0),
            if e.accepted {
                format!("split {} leaves", e.leaves_split)
            } else {
                "discarded".to_string()
            }
        );
    }
    println!(
        "{} accepted, {} discarded, {} unconditioned draws, {} leaves",
        trace.accepted,
        trace.discarded,
        trace.unconditioned_draws,
        tree.k()
    );

    let (mut accepted, mut discarded) = (0usize, 0u64);
    for seed in 0..builds {
        let (_, t) = build_modified(&centers, &mut RngStream::new(seed), ell)?;
        accepted += t.accepted;
        discarded += t.discarded;
    }
    println!("{builds} builds: {accepted} cuts accepted, {discarded} discarded");
    Ok(())
}
