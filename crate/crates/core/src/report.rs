//! Per-run report rows and benchmark campaigns.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::builders::Algorithm;
use crate::cost::{cost_of_tree, LeafCenterMode};
use crate::error::{Error, Result};
use crate::instances::Instance;
use crate::model::ThresholdTree;
use crate::oracle::brute_force_opt_tree;
use crate::rng::RngStream;

/// Columns of the report CSV, in order.
pub const REPORT_COLUMNS: [&str; 13] = [
    "kind",
    "instance",
    "algorithm",
    "p",
    "seed",
    "cost_reference",
    "cost_optimal",
    "ratio_reference",
    "ratio_opt",
    "accepted_cuts",
    "discarded_cuts",
    "wall_ms",
    "error",
];

/// One line of a report: a single run (`kind = "run"`) or an aggregate
/// over the runs of one (instance, algorithm, p) group (`mean`, `median`,
/// `p95`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub kind: String,
    pub instance: String,
    pub algorithm: String,
    pub p: f64,
    pub seed: Option<u64>,
    /// Leaves pay their own reference center.
    pub cost_reference: Option<f64>,
    /// Leaves are recentered optimally.
    pub cost_optimal: Option<f64>,
    /// `cost_reference` over the unconstrained cost of the reference centers.
    pub ratio_reference: Option<f64>,
    /// `cost_reference` over the best known optimum, when one is available.
    pub ratio_opt: Option<f64>,
    pub accepted_cuts: Option<usize>,
    pub discarded_cuts: Option<u64>,
    pub wall_ms: Option<f64>,
    pub error: Option<String>,
}

impl ReportRow {
    pub fn is_ok(&self) -> bool {
        self.error.is_none()
    }
}

/// Settings shared by every run of a campaign.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSettings {
    pub p: f64,
    pub ell: u32,
    /// Campaign seed; run `r` uses substream `r` of it.
    pub seed: u64,
}

/// Builds one tree and reports on it. Failures become rows with `error` set.
pub fn run_one(
    id: &str,
    inst: &Instance,
    algorithm: Algorithm,
    settings: RunSettings,
    run: u64,
    opt: Option<f64>,
) -> ReportRow {
    run_with_tree(id, inst, algorithm, settings, run, opt).0
}

/// [`run_one`], also handing back the tree when the build succeeded.
pub fn run_with_tree(
    id: &str,
    inst: &Instance,
    algorithm: Algorithm,
    settings: RunSettings,
    run: u64,
    opt: Option<f64>,
) -> (ReportRow, Option<ThresholdTree>) {
    let mut row = ReportRow {
        kind: "run".into(),
        instance: id.into(),
        algorithm: algorithm.name().into(),
        p: settings.p,
        seed: algorithm.is_randomized().then_some(run),
        cost_reference: None,
        cost_optimal: None,
        ratio_reference: None,
        ratio_opt: None,
        accepted_cuts: None,
        discarded_cuts: None,
        wall_ms: None,
        error: None,
    };
    let mut built = None;
    let result = (|| -> Result<()> {
        let centers = inst.centers()?;
        let mut rng = RngStream::substream(settings.seed, run);
        let start = Instant::now();
        let (tree, trace) = algorithm.build(centers, &inst.points, settings.p, settings.ell, &mut rng)?;
        row.wall_ms = Some(start.elapsed().as_secs_f64() * 1e3);
        let report = cost_of_tree(&inst.points, &tree, centers, settings.p, LeafCenterMode::Optimal)?;
        row.cost_reference = Some(report.cost_reference_centers);
        row.cost_optimal = report.cost_optimal_leaf_centers;
        row.ratio_reference = Some(crate::cost::ratio(report.cost_reference_centers, report.cost_nearest_centers));
        row.ratio_opt = opt.map(|o| crate::cost::ratio(report.cost_reference_centers, o));
        row.accepted_cuts = Some(trace.as_ref().map_or(tree.num_cuts(), |t| t.splits));
        row.discarded_cuts = Some(trace.map_or(0, |t| t.discarded));
        built = Some(tree);
        Ok(())
    })();
    if let Err(e) = result {
        row.error = Some(e.to_string());
    }
    (row, built)
}

/// Best known optimum of an instance: the brute-force optimum (optimal
/// leaf centers) when `use_oracle` is set and the instance is small
/// enough, otherwise the closed form recorded by the generator.
pub fn known_opt(inst: &Instance, p: f64, use_oracle: bool) -> Option<f64> {
    if use_oracle {
        if let Ok(c) = inst.centers() {
            match brute_force_opt_tree(&inst.points, c, p) {
                Ok(r) => return Some(r.cost_optimal),
                Err(Error::SizeGuard { .. }) => {}
                Err(_) => return None,
            }
        }
    }
    inst.meta.opt_cost
}

/// A benchmark campaign: every algorithm on every instance, `repetitions`
/// seeded runs each (one run for deterministic algorithms).
#[derive(Debug, Clone)]
pub struct Campaign {
    pub instances: Vec<(String, Instance)>,
    pub algorithms: Vec<Algorithm>,
    pub settings: RunSettings,
    pub repetitions: u64,
    pub use_oracle: bool,
}

impl Campaign {
    /// Runs on a pool of `workers` threads. Rows come back in campaign
    /// order whatever order the runs finish in: per group, the run rows
    /// followed by the `mean`, `median` and `p95` rows.
    pub fn run(&self, workers: usize) -> Result<Vec<ReportRow>> {
        let opts: Vec<Option<f64>> = self
            .instances
            .iter()
            .map(|(_, inst)| known_opt(inst, self.settings.p, self.use_oracle))
            .collect();
        let mut specs = Vec::new();
        for (i, _) in self.instances.iter().enumerate() {
            for &a in &self.algorithms {
                let reps = if a.is_randomized() { self.repetitions } else { 1 };
                specs.push((i, a, reps));
            }
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers.max(1))
            .build()
            .map_err(|e| Error::InvalidInput(format!("cannot start worker pool: {e}")))?;
        let groups: Vec<Vec<ReportRow>> = pool.install(|| {
            specs
                .par_iter()
                .map(|&(i, a, reps)| {
                    let (id, inst) = &self.instances[i];
                    (0..reps)
                        .into_par_iter()
                        .map(|r| run_one(id, inst, a, self.settings, r, opts[i]))
                        .collect()
                })
                .collect()
        });
        let mut rows = Vec::new();
        for runs in groups {
            let aggregates = aggregate(&runs);
            rows.extend(runs);
            rows.extend(aggregates);
        }
        Ok(rows)
    }
}

/// `mean`, `median` and `p95` rows over the successful runs of one group.
pub fn aggregate(runs: &[ReportRow]) -> Vec<ReportRow> {
    let ok: Vec<&ReportRow> = runs.iter().filter(|r| r.is_ok()).collect();
    let Some(first) = ok.first() else {
        return Vec::new();
    };
    let column = |f: &dyn Fn(&ReportRow) -> Option<f64>| -> Vec<f64> { ok.iter().filter_map(|r| f(r)).collect() };
    let cols = [
        column(&|r| r.cost_reference),
        column(&|r| r.cost_optimal),
        column(&|r| r.ratio_reference),
        column(&|r| r.ratio_opt),
        column(&|r| r.accepted_cuts.map(|c| c as f64)),
        column(&|r| r.discarded_cuts.map(|c| c as f64)),
        column(&|r| r.wall_ms),
    ];
    [("mean", Stat::Mean), ("median", Stat::Median), ("p95", Stat::P95)]
        .into_iter()
        .map(|(kind, stat)| {
            let s: Vec<Option<f64>> = cols.iter().map(|c| stat.of(c)).collect();
            ReportRow {
                kind: kind.into(),
                instance: first.instance.clone(),
                algorithm: first.algorithm.clone(),
                p: first.p,
                seed: None,
                cost_reference: s[0],
                cost_optimal: s[1],
                ratio_reference: s[2],
                ratio_opt: s[3],
                accepted_cuts: s[4].map(|v| v.round() as usize),
                discarded_cuts: s[5].map(|v| v.round() as u64),
                wall_ms: s[6],
                error: None,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy)]
pub enum Stat {
    Mean,
    Median,
    P95,
}

impl Stat {
    pub fn of(self, values: &[f64]) -> Option<f64> {
        if values.is_empty() {
            return None;
        }
        match self {
            Self::Mean => Some(values.iter().sum::<f64>() / values.len() as f64),
            Self::Median => Some(quantile(values, 0.5)),
            Self::P95 => Some(quantile(values, 0.95)),
        }
    }
}

/// Linear-interpolation quantile.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q * (v.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    v[lo] + (pos - lo as f64) * (v[hi] - v[lo])
}

pub fn write_report<W: Write>(out: W, rows: &[ReportRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record(REPORT_COLUMNS)?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// One point of a plot-ready, long-format curve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveRow {
    pub instance: String,
    pub k: usize,
    pub dim: usize,
    pub algorithm: String,
    pub p: f64,
    pub statistic: String,
    pub value: f64,
}

/// Ratio-to-reference curves from the aggregate rows of a campaign.
pub fn curve_rows(campaign: &Campaign, rows: &[ReportRow]) -> Vec<CurveRow> {
    rows.iter()
        .filter(|r| r.kind != "run")
        .filter_map(|r| {
            let (_, inst) = campaign.instances.iter().find(|(id, _)| *id == r.instance)?;
            Some(CurveRow {
                instance: r.instance.clone(),
                k: inst.k()?,
                dim: inst.dim,
                algorithm: r.algorithm.clone(),
                p: r.p,
                statistic: format!("ratio_reference_{}", r.kind),
                value: r.ratio_reference?,
            })
        })
        .collect()
}

pub fn write_curve<W: Write>(out: W, rows: &[CurveRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{gen_adversarial, gen_gaussian_mixture};

    fn campaign(reps: u64) -> Campaign {
        let inst = gen_gaussian_mixture(4, 2, 10, 0.1, &mut RngStream::new(1)).unwrap();
        Campaign {
            instances: vec![("g".into(), inst)],
            algorithms: vec![Algorithm::Uniform, Algorithm::Imm],
            settings: RunSettings { p: 1.0, ell: 4, seed: 9 },
            repetitions: reps,
            use_oracle: false,
        }
    }

    #[test]
    fn single_run_gives_one_row_plus_aggregates() {
        let rows = campaign(1).run(2).unwrap();
        let kinds: Vec<&str> = rows.iter().map(|r| r.kind.as_str()).collect();
        assert_eq!(kinds, ["run", "mean", "median", "p95", "run", "mean", "median", "p95"]);
        assert!(rows.iter().all(ReportRow::is_ok));
        assert_eq!(rows[0].accepted_cuts, Some(3));
        assert!(rows[0].ratio_reference.unwrap() >= 1.0 - 1e-12);
    }

    #[test]
    fn order_and_values_do_not_depend_on_workers() {
        let strip = |mut rows: Vec<ReportRow>| {
            rows.iter_mut().for_each(|r| r.wall_ms = None);
            rows
        };
        assert_eq!(strip(campaign(20).run(1).unwrap()), strip(campaign(20).run(4).unwrap()));
    }

    #[test]
    fn failures_are_rows() {
        let mut c = campaign(2);
        c.instances[0].1.centers = None;
        let rows = c.run(1).unwrap();
        assert!(rows.iter().all(|r| !r.is_ok()));
    }

    #[test]
    fn closed_form_opt_is_used() {
        let inst = gen_adversarial(3).unwrap();
        let row = run_one("a", &inst, Algorithm::Imm, RunSettings { p: 1.0, ell: 4, seed: 0 }, 0, known_opt(&inst, 1.0, true));
        assert!(row.ratio_opt.unwrap() >= 1.0);
        let mut out = Vec::new();
        write_report(&mut out, &[row]).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().next().unwrap(), REPORT_COLUMNS.join(","));
    }

    #[test]
    fn quantiles() {
        assert_eq!(quantile(&[3.0, 1.0, 2.0], 0.5), 2.0);
        assert_eq!(quantile(&[0.0, 10.0], 0.95), 9.5);
    }
}
