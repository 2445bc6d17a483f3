//! Checks the separation law of the two cut distributions: a uniform cut
//! separates `x` and `y` with probability `||x - y||_1 / L`, a `D_p` cut with
//! probability `d_p(x, y) / L_p` (pseudo-distance over total interval weight).
//!
//! cargo run --release --example separation_law [p]

use xcluster::geometry::{all_intervals, pseudo_distance};
use xcluster::model::CenterSet;
use xcluster::rng::RngStream;
use xcluster::sampling::CutDistribution;

fn main() -> xcluster::error::Result<()> {
    let p: f64 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(2.0);
    let centers = CenterSet::from_coords(vec![
        vec![0.0, 0.0],
        vec![1.0, 3.0],
        vec![4.0, 1.0],
        vec![6.0, 5.0],
    ])?;
    let n = 200_000;
    let uniform = CutDistribution::uniform(&centers)?;
    let dp = CutDistribution::dp(&centers, p)?;
    let lp_total = all_intervals(&centers, p)?.total_weight();

    println!("pair   uniform: seen / expected      D_{p}: seen / expected");
    for a in 0..centers.k() {
        for b in a + 1..centers.k() {
            let (x, y) = (centers.get(a), centers.get(b));
            let l1: f64 = x.coords().iter().zip(y.coords()).map(|(u, v)| (u - v).abs()).sum();
            let want_u = l1 / uniform.total_mass();
            let want_p = pseudo_distance(x, y, &centers, p)? / lp_total;
            let seen = |law: &CutDistribution, seed| -> xcluster::error::Result<f64> {
                let mut rng = RngStream::new(seed);
                let mut hits = 0;
                for _ in 0..n {
                    let cut = law.sample(&mut rng)?;
                    hits += usize::from(cut.goes_left(x.coords()) != cut.goes_left(y.coords()));
                }
                Ok(hits as f64 / n as f64)
            };
            println!(
                "({a},{b})  {:.4} / {want_u:.4}               {:.4} / {want_p:.4}",
                seen(&uniform, 1)?,
                seen(&dp, 2)?
            );
        }
    }
    Ok(())
}
