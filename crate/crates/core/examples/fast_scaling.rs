//! Times the indexed builders for growing k and fits the log-log slope.
//!
//! cargo run --release --example fast_scaling [d] [max_exp] [uniform|modified|lp]

use std::time::Instant;

use xcluster::fast::{build_fast, FastOptions, FastVariant};
use xcluster::model::CenterSet;
use xcluster::rng::RngStream;

fn main() -> xcluster::error::Result<()> {
    let raw: Vec<String> = std::env::args().skip(1).collect();
    let args: Vec<usize> = raw.iter().filter_map(|a| a.parse().ok()).collect();
    let only = raw.iter().find(|a| a.parse::<usize>().is_err()).cloned();
    let d = args.first().copied().unwrap_or(10);
    let max_exp = args.get(1).copied().unwrap_or(14);
    let variants = [
        FastVariant::Uniform,
        FastVariant::Modified { ell: 4 },
        FastVariant::Lp { p: 2.0, ell: 4 },
    ];
    for variant in variants {
        let name = format!("{variant:?}").to_lowercase();
        if only.as_ref().is_some_and(|o| !name.starts_with(o.as_str())) {
            continue;
        }
        let mut pts = Vec::new();
        for e in 10..=max_exp {
            let k = 1usize << e;
            let mut rng = RngStream::new(k as u64);
            let rows = (0..k).map(|_| (0..d).map(|_| rng.uniform()).collect()).collect();
            let centers = CenterSet::from_coords(rows)?;
            let start = Instant::now();
            let (tree, trace) = build_fast(&centers, variant, &mut RngStream::new(1), FastOptions::default())?;
            let secs = start.elapsed().as_secs_f64();
            println!(
                "{variant:?} k={k:6} d={d} {secs:8.3}s depth={:3} accepted={} discarded={}",
                tree.depth(),
                trace.accepted,
                trace.discarded
            );
            pts.push(((k as f64).ln(), secs.ln()));
        }
        println!("{variant:?} log-log slope {:.2}", slope(&pts));
    }
    Ok(())
}

fn slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}
