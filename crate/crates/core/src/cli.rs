//! The `xcluster` command line.

use std::fs::File;
use std::io::{self, BufWriter};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::builders::Algorithm;
use crate::cost::{cost_of_tree, LeafCenterMode};
use crate::error::{invalid, Result};
use crate::instances::{gen_adversarial, gen_gaussian_mixture, gen_lower_bound, reference_centers, Instance};
use crate::io::{load_instance, read_tree, write_instance, write_tree};
use crate::oracle::{brute_force_opt_tree, delta_p, expected_one_cut_cost, OneCutLaw};
use crate::report::{curve_rows, known_opt, run_with_tree, write_curve, write_report, Campaign, RunSettings};
use crate::rng::RngStream;

#[derive(Debug, Parser)]
#[command(name = "xcluster", version, about = "Explainable clustering with random threshold trees")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate an instance file.
    Gen(GenArgs),
    /// Build a threshold tree for an instance and report its cost.
    Build(BuildArgs),
    /// Evaluate a saved tree on an instance.
    Eval(EvalArgs),
    /// Run a seeded benchmark campaign and write a CSV report.
    #[command(long_about = BENCH_HELP)]
    Bench(BenchArgs),
    /// Ground-truth computations.
    #[command(subcommand)]
    Oracle(OracleCommand),
}

const BENCH_HELP: &str = "Run a seeded benchmark campaign and write a CSV report.

Report columns: kind (run, mean, median, p95), instance, algorithm, p, seed,
cost_reference (leaves pay their own center), cost_optimal (leaves
recentered), ratio_reference (cost_reference over the cost of the reference
centers), ratio_opt (cost_reference over the best known optimum), accepted_cuts,
discarded_cuts, wall_ms, error. Run r of a group uses RNG substream r of --seed.

The curve file is long format: instance, k, dim, algorithm, p, statistic, value.";

#[derive(Debug, Args)]
pub struct GenArgs {
    #[command(subcommand)]
    pub kind: GenKind,
    /// Output instance file (JSON).
    #[arg(long, short, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum GenKind {
    /// Equidistant centers over Z_m with unit-distance neighbours.
    LowerBound {
        #[arg(long)]
        m: u64,
    },
    /// The instance family that fools the min-cut baseline.
    Adversarial {
        #[arg(long)]
        m: u64,
    },
    /// Uniform centers in the unit cube with Gaussian clusters around them.
    Gaussian {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        d: usize,
        /// Points per cluster.
        #[arg(long)]
        n: usize,
        #[arg(long)]
        sigma: f64,
        #[arg(long)]
        seed: u64,
    },
}

#[derive(Debug, Args)]
pub struct InstanceArgs {
    /// Instance JSON, or a points CSV (one point per row).
    #[arg(long)]
    pub instance: PathBuf,
    /// Centers CSV; overrides the centers stored in the instance.
    #[arg(long)]
    pub centers: Option<PathBuf>,
    /// Compute k reference centers when the instance has none.
    #[arg(long)]
    pub k: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum AlgoArg {
    Uniform,
    Modified,
    Lp,
    Imm,
    FastUniform,
    FastModified,
    FastLp,
}

impl From<AlgoArg> for Algorithm {
    fn from(a: AlgoArg) -> Self {
        match a {
            AlgoArg::Uniform => Self::Uniform,
            AlgoArg::Modified => Self::Modified,
            AlgoArg::Lp => Self::Lp,
            AlgoArg::Imm => Self::Imm,
            AlgoArg::FastUniform => Self::FastUniform,
            AlgoArg::FastModified => Self::FastModified,
            AlgoArg::FastLp => Self::FastLp,
        }
    }
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[command(flatten)]
    pub input: InstanceArgs,
    #[arg(long, value_enum)]
    pub algo: AlgoArg,
    /// Objective exponent: cost is the sum of ||x - c||_p^p.
    #[arg(long, default_value_t = 1.0)]
    pub p: f64,
    /// Discard exponent of the modified and l_p builders.
    #[arg(long, default_value_t = 4)]
    pub ell: u32,
    /// Required by every randomized algorithm.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output tree file (JSON).
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Also compute the ratio to the brute-force optimum (tiny instances only).
    #[arg(long)]
    pub oracle: bool,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub input: InstanceArgs,
    #[arg(long)]
    pub tree: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    pub p: f64,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Instance files; repeat for several.
    #[arg(long = "instance", required = true)]
    pub instances: Vec<PathBuf>,
    /// Algorithms; repeat for several.
    #[arg(long = "algo", value_enum, required = true)]
    pub algos: Vec<AlgoArg>,
    #[arg(long, default_value_t = 1.0)]
    pub p: f64,
    #[arg(long, default_value_t = 4)]
    pub ell: u32,
    /// Runs per randomized (instance, algorithm) pair.
    #[arg(long, default_value_t = 100)]
    pub reps: u64,
    #[arg(long)]
    pub seed: u64,
    /// Report CSV; stdout when absent.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Long-format curve CSV.
    #[arg(long)]
    pub curve: Option<PathBuf>,
    /// Compare against the brute-force optimum where the instance is small enough.
    #[arg(long)]
    pub oracle: bool,
    /// Worker threads.
    #[arg(long, env = "XCLUSTER_WORKERS")]
    pub workers: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum OracleCommand {
    /// Exhaustive optimal tree (k <= 4, d <= 3, n <= 14).
    Brute {
        #[command(flatten)]
        input: InstanceArgs,
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        /// Write the optimal-mode tree here.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Common center distance of the lower-bound family.
    Delta {
        #[arg(long)]
        m: u64,
        #[arg(long)]
        p: f64,
    },
    /// Expected cost of one random cut between two 1-D centers.
    OneCut {
        /// The two centers, e.g. `--centers=-1,100`.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        centers: Vec<f64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        points: Vec<f64>,
        #[arg(long)]
        p: f64,
        #[arg(long, value_enum, default_value = "uniform")]
        law: LawArg,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum LawArg {
    Uniform,
    Dp,
}

/// Parses the process arguments, runs, and maps the outcome to an exit code.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

/// Runs a parsed command. `Ok(false)` means some requested run failed.
pub fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Gen(args) => gen(args),
        Command::Build(args) => build(args),
        Command::Eval(args) => eval(args),
        Command::Bench(args) => bench(args),
        Command::Oracle(cmd) => oracle(cmd),
    }
}

fn gen(args: GenArgs) -> Result<bool> {
    let inst = match args.kind {
        GenKind::LowerBound { m } => gen_lower_bound(m)?,
        GenKind::Adversarial { m } => gen_adversarial(m)?,
        GenKind::Gaussian { k, d, n, sigma, seed } => gen_gaussian_mixture(k, d, n, sigma, &mut RngStream::new(seed))?,
    };
    let out = args.out.ok_or_else(|| invalid("--out is required"))?;
    write_instance(&out, &inst)?;
    let opt = inst.meta.opt_cost.map_or("unknown".to_string(), |o| o.to_string());
    println!("n={} k={} d={} OPT={}", inst.n(), inst.k().unwrap_or(0), inst.dim, opt);
    Ok(true)
}

fn load(input: &InstanceArgs, p: f64, seed: Option<u64>) -> Result<Instance> {
    let mut inst = load_instance(&input.instance, input.centers.as_deref())?;
    if inst.centers.is_none() {
        let k = input.k.ok_or_else(|| invalid("instance has no centers; pass --centers or --k"))?;
        let seed = seed.ok_or_else(|| invalid("--seed is required to compute reference centers"))?;
        let mut rng = RngStream::substream(seed, u64::MAX);
        inst.centers = Some(reference_centers(&inst.points, k, p, &mut rng)?);
    }
    Ok(inst)
}

fn build(args: BuildArgs) -> Result<bool> {
    let algo = Algorithm::from(args.algo);
    if algo.is_randomized() && args.seed.is_none() {
        return Err(invalid(format!("--seed is required for {algo}")));
    }
    let inst = load(&args.input, args.p, args.seed)?;
    if algo.needs_points() && inst.points.is_empty() {
        return Err(invalid("imm needs data points"));
    }
    let settings = RunSettings {
        p: args.p,
        ell: args.ell,
        seed: args.seed.unwrap_or(0),
    };
    let id = args.input.instance.display().to_string();
    let (row, tree) = run_with_tree(&id, &inst, algo, settings, 0, known_opt(&inst, args.p, args.oracle));
    if let (Some(out), Some(tree)) = (&args.out, &tree) {
        write_tree(out, tree)?;
    }
    write_report(io::stdout().lock(), std::slice::from_ref(&row))?;
    if let Some(e) = &row.error {
        eprintln!("error: {e}");
    }
    Ok(row.is_ok())
}

fn eval(args: EvalArgs) -> Result<bool> {
    let inst = load(&args.input, args.p, None)?;
    let tree = read_tree(&args.tree)?;
    let report = cost_of_tree(&inst.points, &tree, inst.centers()?, args.p, LeafCenterMode::Optimal)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(true)
}

fn bench(args: BenchArgs) -> Result<bool> {
    let instances = args
        .instances
        .iter()
        .map(|path| Ok((path.display().to_string(), load_instance(path, None)?)))
        .collect::<Result<Vec<_>>>()?;
    let campaign = Campaign {
        instances,
        algorithms: args.algos.iter().map(|&a| a.into()).collect(),
        settings: RunSettings {
            p: args.p,
            ell: args.ell,
            seed: args.seed,
        },
        repetitions: args.reps,
        use_oracle: args.oracle,
    };
    let workers = args.workers.unwrap_or_else(rayon::current_num_threads);
    let rows = campaign.run(workers)?;
    match &args.out {
        Some(path) => write_report(BufWriter::new(File::create(path)?), &rows)?,
        None => write_report(io::stdout().lock(), &rows)?,
    }
    if let Some(path) = &args.curve {
        write_curve(BufWriter::new(File::create(path)?), &curve_rows(&campaign, &rows))?;
    }
    let failed = rows.iter().filter(|r| !r.is_ok()).count();
    if failed > 0 {
        eprintln!("{failed} run(s) failed");
    }
    Ok(failed == 0)
}

fn oracle(cmd: OracleCommand) -> Result<bool> {
    match cmd {
        OracleCommand::Brute { input, p, out } => {
            let inst = load(&input, p, None)?;
            let r = brute_force_opt_tree(&inst.points, inst.centers()?, p)?;
            if let Some(out) = out {
                write_tree(&out, &r.tree_optimal)?;
            }
            println!(
                "cost_reference={} cost_optimal={} explored={}",
                r.cost_reference, r.cost_optimal, r.explored
            );
        }
        OracleCommand::Delta { m, p } => println!("{}", delta_p(m, p)),
        OracleCommand::OneCut { centers, points, p, law } => {
            let law = match law {
                LawArg::Uniform => OneCutLaw::Uniform,
                LawArg::Dp => OneCutLaw::Dp,
            };
            let [a, b] = centers[..] else {
                return Err(invalid("--centers takes exactly two values"));
            };
            let pair = [a, b];
            println!("{}", expected_one_cut_cost(pair, &points, p, law)?);
        }
    }
    Ok(true)
}
