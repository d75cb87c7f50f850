use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use bucketwin::clustering::{ClusterMethod, ClusterParams, ClusterProfile};
use bucketwin::diversity::{DivParams, DiversityKind, Objective, Solver};
use bucketwin::harness::{generate, parse_config, run_experiment, ExperimentConfig, GenSpec, ProblemConfig, StreamSource};
use bucketwin::kcover::{HashMode, KCoverParams, KCoverProfile, RecoverMode};
use bucketwin::reference::{BitParams, BitProblem};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "bucketwin", version, about = "Sliding-window sketches with seeded, reproducible experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Count of ones or toy 1-median over a 0/1 stream.
    Toy(ToyArgs),
    /// Maximum k-coverage over a (set, element) edge stream.
    Kcover(KcoverArgs),
    /// Diversity maximization over a point stream.
    Diversity(DiversityArgs),
    /// ℓp k-clustering coresets over a point stream.
    Cluster(ClusterArgs),
    /// Write a synthetic stream file.
    Gen(GenArgs),
    /// Re-run a config (JSON or report) with oracles on, or check a report reproduces.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct Common {
    /// Window length W.
    #[arg(long)]
    window: u64,
    /// First seed; trials use consecutive seeds.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    trials: u64,
    /// Stream file; without it a synthetic stream is generated per trial.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Length of the generated stream.
    #[arg(long, default_value_t = 1000)]
    len: usize,
    /// Query spacing (default W/2); the end of the stream is always queried.
    #[arg(long)]
    checkpoint_every: Option<u64>,
    /// Compare every query against the brute-force oracle.
    #[arg(long)]
    oracle: bool,
    /// Add a wall-clock column (reports are then not byte-reproducible).
    #[arg(long)]
    timings: bool,
    /// Report path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the resolved config as JSON instead of running.
    #[arg(long)]
    print_config: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProfileArg {
    Theory,
    Desk,
}

#[derive(Args)]
struct ToyArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum, default_value = "ones")]
    problem: ToyProblem,
    #[arg(long, default_value_t = 0.2)]
    eps: f64,
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    /// Constant c in the sampling rate.
    #[arg(long, default_value_t = 10.0)]
    c: f64,
    /// P(1) of the generated bits.
    #[arg(long, default_value_t = 0.5)]
    p_one: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum ToyProblem {
    Ones,
    Median,
}

#[derive(Args)]
struct KcoverArgs {
    #[command(flatten)]
    common: Common,
    /// Number of sets.
    #[arg(long)]
    n: u32,
    /// Number of elements.
    #[arg(long)]
    m: u32,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 0.25)]
    eps: f64,
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    #[arg(long, value_enum, default_value = "exact")]
    mode: ModeArg,
    #[arg(long, value_enum, default_value = "desk")]
    profile: ProfileArg,
    /// Use a polynomial hash of this independence (0 picks the default) instead of the PRF.
    #[arg(long)]
    poly_hash: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exact,
    Greedy,
}

#[derive(Args)]
struct DiversityArgs {
    #[command(flatten)]
    common: Common,
    /// Diversity function, e.g. edge, clique, tree, cycle, t-trees, t-cycles, star, bipartition, pseudoforest, matching.
    #[arg(long)]
    kind: String,
    #[arg(long)]
    k: usize,
    /// Number of trees or cycles for the t-variants.
    #[arg(long, default_value_t = 0)]
    t: usize,
    #[arg(long, default_value_t = 2)]
    d: usize,
    /// Grid side Δ.
    #[arg(long)]
    grid: i64,
    #[arg(long, default_value_t = 0.25)]
    eps: f64,
    #[arg(long, value_enum, default_value = "exact")]
    solver: SolverArg,
    #[command(flatten)]
    mixture: MixtureArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverArg {
    Exact,
    Greedy,
}

#[derive(Args)]
struct MixtureArgs {
    /// Clusters in the generated mixture.
    #[arg(long, default_value_t = 3)]
    centers: usize,
    /// Standard deviation of the generated clusters.
    #[arg(long, default_value_t = 4.0)]
    sigma: f64,
}

#[derive(Args)]
struct ClusterArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    #[arg(long, default_value_t = 2)]
    d: usize,
    /// Grid side Δ.
    #[arg(long)]
    grid: i64,
    #[arg(long, default_value_t = 0.3)]
    eps: f64,
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    #[arg(long, value_enum, default_value = "desk")]
    profile: ProfileArg,
    #[arg(long, value_enum, default_value = "exhaustive-candidates")]
    method: MethodArg,
    /// Project points with a random-sign matrix of this accuracy first.
    #[arg(long)]
    jl: Option<f64>,
    #[command(flatten)]
    mixture: MixtureArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    ExhaustiveCandidates,
    LocalSearch,
    Lloyd,
}

#[derive(Args)]
struct GenArgs {
    #[command(subcommand)]
    kind: GenKind,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output path; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum GenKind {
    Bits {
        #[arg(long)]
        len: usize,
        #[arg(long, default_value_t = 0.5)]
        p_one: f64,
    },
    Edges {
        #[arg(long)]
        len: usize,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        m: u32,
    },
    Mixture {
        #[arg(long)]
        len: usize,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        grid: i64,
        #[arg(long, default_value_t = 3)]
        centers: usize,
        #[arg(long, default_value_t = 4.0)]
        sigma: f64,
    },
    AppendixKcover {
        #[arg(long)]
        m: u32,
        #[arg(long, default_value_t = 1)]
        k: u32,
    },
    AppendixDiversity {
        #[arg(long, default_value_t = 2)]
        k: usize,
    },
}

#[derive(Args)]
struct VerifyArgs {
    /// A JSON config or a report whose first line holds the config.
    file: PathBuf,
    /// Re-run the config unchanged and require byte-identical output.
    #[arg(long)]
    check: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn experiment(common: &Common, problem: ProblemConfig, gen: GenSpec) -> ExperimentConfig {
    let stream = match &common.input {
        Some(path) => StreamSource::File { path: path.clone() },
        None => StreamSource::Generate { spec: gen },
    };
    let seeds = (common.seed..common.seed + common.trials).collect();
    let mut config = ExperimentConfig::new(problem, common.window, seeds, stream);
    config.checkpoint_every = common.checkpoint_every;
    config.oracle = common.oracle;
    config.timings = common.timings;
    config.output = common.out.clone();
    config
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(config: ExperimentConfig, print_config: bool) -> Result<()> {
    if print_config {
        println!("{}", serde_json::to_string_pretty(&config)?);
        return Ok(());
    }
    let report = run_experiment(&config)?;
    emit(&report.render(), config.output.as_ref())
}

fn profile_of<T>(p: ProfileArg, theory: T, desk: T) -> T {
    match p {
        ProfileArg::Theory => theory,
        ProfileArg::Desk => desk,
    }
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Toy(a) => {
            let kind = match a.problem {
                ToyProblem::Ones => BitProblem::Ones,
                ToyProblem::Median => BitProblem::Median,
            };
            let params = BitParams { eps: a.eps, delta: a.delta, c: a.c };
            let gen = GenSpec::Bits { len: a.common.len, p_one: a.p_one };
            run(experiment(&a.common, ProblemConfig::Toy { kind, params }, gen), a.common.print_config)
        }
        Command::Kcover(a) => {
            let params = KCoverParams {
                n: a.n,
                m: a.m,
                k: a.k,
                eps: a.eps,
                delta: a.delta,
                profile: profile_of(a.profile, KCoverProfile::theory(), KCoverProfile::desk()),
                hash: a.poly_hash.map_or(HashMode::Prf, |independence| HashMode::Polynomial { independence }),
                mode: match a.mode {
                    ModeArg::Exact => RecoverMode::Exact,
                    ModeArg::Greedy => RecoverMode::Greedy,
                },
            };
            let gen = GenSpec::Edges { len: a.common.len, n: a.n, m: a.m };
            run(experiment(&a.common, ProblemConfig::Kcover { params }, gen), a.common.print_config)
        }
        Command::Diversity(a) => {
            let objective = Objective::new(DiversityKind::parse(&a.kind)?, a.k, a.t)?;
            let mut params = DivParams::new(objective, a.d, a.grid, a.eps);
            params.solver = match a.solver {
                SolverArg::Exact => Solver::Exact,
                SolverArg::Greedy => Solver::Greedy,
            };
            let gen = GenSpec::Mixture { len: a.common.len, d: a.d, delta: a.grid, centers: a.mixture.centers, sigma: a.mixture.sigma };
            run(experiment(&a.common, ProblemConfig::Diversity { params }, gen), a.common.print_config)
        }
        Command::Cluster(a) => {
            let mut params = ClusterParams::new(a.k, a.p, a.d, a.grid, a.common.window, a.eps, a.delta);
            params.profile = profile_of(a.profile, ClusterProfile::theory(), ClusterProfile::desk());
            params.method = match a.method {
                MethodArg::ExhaustiveCandidates => ClusterMethod::ExhaustiveCandidates,
                MethodArg::LocalSearch => ClusterMethod::LocalSearch,
                MethodArg::Lloyd => ClusterMethod::Lloyd,
            };
            let gen = GenSpec::Mixture { len: a.common.len, d: a.d, delta: a.grid, centers: a.mixture.centers, sigma: a.mixture.sigma };
            run(experiment(&a.common, ProblemConfig::Cluster { params, jl_eps: a.jl }, gen), a.common.print_config)
        }
        Command::Gen(a) => {
            let spec = match a.kind {
                GenKind::Bits { len, p_one } => GenSpec::Bits { len, p_one },
                GenKind::Edges { len, n, m } => GenSpec::Edges { len, n, m },
                GenKind::Mixture { len, d, grid, centers, sigma } => GenSpec::Mixture { len, d, delta: grid, centers, sigma },
                GenKind::AppendixKcover { m, k } => GenSpec::AppendixKcover { m, k },
                GenKind::AppendixDiversity { k } => GenSpec::AppendixDiversity { k },
            };
            emit(&generate(&spec, a.seed)?.render(), a.out.as_ref())
        }
        Command::Verify(a) => {
            let text = std::fs::read_to_string(&a.file).with_context(|| format!("reading {}", a.file.display()))?;
            let mut config = parse_config(&text)?;
            if a.check {
                let again = run_experiment(&config)?.render();
                if again != text {
                    bail!("report differs from a fresh run of its config");
                }
                eprintln!("report reproduced byte for byte");
                return Ok(());
            }
            config.oracle = true;
            emit(&run_experiment(&config)?.render(), a.out.as_ref())
        }
    }
}
