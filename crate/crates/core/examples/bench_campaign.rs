//! A small benchmark campaign over several builders, written as CSV to
//! stdout. Runs on `XCLUSTER_WORKERS` threads (default: all cores).
//!
//! cargo run --release --example bench_campaign > report.csv

use xcluster::builders::Algorithm;
use xcluster::instances::{gen_adversarial, gen_gaussian_mixture};
use xcluster::report::{write_report, Campaign, RunSettings};
use xcluster::rng::RngStream;

fn main() -> xcluster::error::Result<()> {
    let workers = std::env::var("XCLUSTER_WORKERS")
        .ok()
        .and_then(|w| w.parse().ok())
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let campaign = Campaign {
        instances: vec![
            ("gauss-k8".into(), gen_gaussian_mixture(8, 4, 30, 0.05, &mut RngStream::new(1))?),
            ("gauss-k32".into(), gen_gaussian_mixture(32, 4, 30, 0.05, &mut RngStream::new(2))?),
            ("adversarial-m5".into(), gen_adversarial(5)?),
        ],
        algorithms: vec![Algorithm::Uniform, Algorithm::FastModified, Algorithm::FastLp, Algorithm::Imm],
        settings: RunSettings { p: 1.0, ell: 4, seed: 42 },
        repetitions: 25,
        use_oracle: false,
    };
    let rows = campaign.run(workers)?;
    write_report(std::io::stdout().lock(), &rows)?;
    eprintln!("{} rows from {workers} workers", rows.len());
    Ok(())
}
