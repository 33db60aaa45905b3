mod bench;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use robustnet::gen::{self, CostDist, RandomSpec};
use robustnet::lp::LpConfig;
use robustnet::mst::{CoinConfig, CoinMode};
use robustnet::{oracle, DiscreteSolution, Error, Instance, RunReport};

#[derive(Parser)]
#[command(
    name = "robustnet",
    version,
    about = "Min-max shortest path and spanning tree under cost scenarios"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an instance file and print the solution and run report as JSON.
    Solve(SolveArgs),
    /// Write generated instances as canonical JSON.
    Generate(GenerateArgs),
    /// Run a benchmark suite and print CSV.
    Bench(bench::BenchArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Algo {
    SpAlg1,
    SpAvg,
    MstDet,
    MstRand,
    Exact,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long, value_enum)]
    algo: Algo,
    /// Instance JSON file.
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
    /// RNG seed; required for mst-rand.
    #[arg(long)]
    seed: Option<u64>,
    /// Slack in the coin-flip count ceil((40 + gamma) ln n).
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    /// Use a fixed number of coin flips instead of the analysed count.
    #[arg(long, value_name = "K")]
    practical_k: Option<usize>,
    /// Extra attempts when --practical-k is given.
    #[arg(long, default_value_t = 20, requires = "practical_k")]
    retries: usize,
    /// Enumeration limit for --algo exact.
    #[arg(long, default_value_t = oracle::DEFAULT_LIMIT)]
    limit: u64,
    /// Write LP pivots, cuts and solves as JSON lines to this file.
    #[arg(long, value_name = "FILE")]
    lp_trace: Option<PathBuf>,
}

#[derive(Args)]
#[command(args_conflicts_with_subcommands = true)]
struct GenerateArgs {
    /// Write the full fixture suite into this directory.
    #[arg(long, value_name = "DIR")]
    fixtures: Option<PathBuf>,
    #[command(subcommand)]
    family: Option<Family>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KindArg {
    Sp,
    Mst,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CostArg {
    Uniform,
    Binary,
}

#[derive(Subcommand)]
enum Family {
    /// Recursive shortest-path gap instance.
    GapSp {
        #[arg(long)]
        r: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Series-composition spanning-tree gap instance.
    GapMst {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Random instance.
    Random {
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long)]
        n: usize,
        #[arg(long = "K", value_name = "K")]
        scenarios: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 0.3)]
        density: f64,
        #[arg(long, value_enum, default_value_t = CostArg::Uniform)]
        costs: CostArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Crossing spanning tree: graph of an instance file plus a JSON list of node sets.
    Cst {
        #[arg(long, value_name = "FILE")]
        graph: PathBuf,
        #[arg(long, value_name = "FILE")]
        cuts: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Failure with its exit code.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        let code = match error.downcast_ref::<Error>() {
            Some(e) => exit_code(e),
            None => 1,
        };
        Failure { code, error }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure {
        code: 1,
        error: anyhow::anyhow!(msg.into()),
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse { .. } | Error::InvalidInput(_) | Error::Range(_) => 1,
        Error::Invariant(_) => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("ROBUSTNET_LOG", "off"))
        .format_timestamp(None)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Solve(args) => solve(args),
        Command::Generate(args) => generate(args),
        Command::Bench(args) => bench::run(args).map_err(Failure::from),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn read_instance(path: &Path) -> Result<Instance, Failure> {
    let bytes = fs::read(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(|e| Failure { code: 1, error: e })?;
    robustnet::parse_instance(&bytes)
        .with_context(|| format!("parsing {}", path.display()))
        .map_err(Failure::from)
}

#[derive(Serialize)]
struct SolveOutput<'a> {
    solution: &'a DiscreteSolution,
    report: &'a RunReport,
}

fn solve(args: SolveArgs) -> Result<(), Failure> {
    if args.algo == Algo::MstRand && args.seed.is_none() {
        return Err(usage(
            "--algo mst-rand requires --seed N (randomized runs must be reproducible)",
        ));
    }
    let instance = read_instance(&args.input)?;
    let wants_sp = matches!(args.algo, Algo::SpAlg1 | Algo::SpAvg);
    let wants_mst = matches!(args.algo, Algo::MstDet | Algo::MstRand);
    if (wants_sp && !instance.is_shortest_path()) || (wants_mst && instance.is_shortest_path()) {
        return Err(usage(format!(
            "algorithm does not match instance kind \"{}\"",
            instance.kind().tag()
        )));
    }
    let config = LpConfig {
        trace: args.lp_trace.is_some(),
        ..LpConfig::default()
    };
    let (solution, report) = run_algorithm(
        &instance,
        args.algo,
        &config,
        args.seed,
        args.gamma,
        args.practical_k,
        args.retries,
        args.limit,
    )?;
    if let Some(path) = &args.lp_trace {
        let mut out = String::new();
        for event in &report.lp.trace {
            out.push_str(
                &serde_json::to_string(event)
                    .context("serializing trace")
                    .map_err(Failure::from)?,
            );
            out.push('\n');
        }
        fs::write(path, out)
            .with_context(|| format!("writing {}", path.display()))
            .map_err(Failure::from)?;
    }
    let json = serde_json::to_string_pretty(&SolveOutput {
        solution: &solution,
        report: &report,
    })
    .context("serializing result")?;
    writeln!(std::io::stdout(), "{json}").context("writing stdout")?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn run_algorithm(
    instance: &Instance,
    algo: Algo,
    config: &LpConfig,
    seed: Option<u64>,
    gamma: f64,
    practical_k: Option<usize>,
    retries: usize,
    limit: u64,
) -> Result<(DiscreteSolution, RunReport), Failure> {
    let result = match algo {
        Algo::SpAlg1 => robustnet::sp::solve_sp(instance, config),
        Algo::SpAvg => robustnet::sp::solve_sp_average(instance, config),
        Algo::MstDet => robustnet::mst::solve_mst_deterministic(instance, config),
        Algo::MstRand => {
            let mode = match practical_k {
                Some(k_hat) => CoinMode::Practical { k_hat, retries },
                None => CoinMode::Analytic { gamma },
            };
            let coin = CoinConfig {
                mode,
                seed: seed.expect("checked by the caller"),
            };
            robustnet::mst::solve_mst_randomized(instance, &coin, config)
        }
        Algo::Exact => solve_exact(instance, config, limit),
    };
    result.map_err(|e| Failure::from(anyhow::Error::new(e)))
}

fn solve_exact(
    instance: &Instance,
    config: &LpConfig,
    limit: u64,
) -> robustnet::Result<(DiscreteSolution, RunReport)> {
    let start = std::time::Instant::now();
    let (frac, stats) = robustnet::lp::minimize_l(instance, config)?;
    let solution = oracle::brute_force_opt(instance, limit)?;
    let mut report = RunReport::new("exact", frac.bound, solution.max_cost);
    report.lp = stats;
    report.selections.push(solution.edges.clone());
    report.millis = start.elapsed().as_millis() as u64;
    Ok((solution, report))
}

fn emit(instance: &Instance, out: Option<&Path>) -> Result<(), Failure> {
    let json = instance.to_json();
    let summary = format!(
        "{}: n={} m={} K={}",
        instance.name(),
        instance.num_nodes(),
        instance.num_edges(),
        instance.num_scenarios()
    );
    match out {
        Some(path) => {
            fs::write(path, json).with_context(|| format!("writing {}", path.display()))?;
            println!("{summary}");
        }
        None => {
            std::io::stdout()
                .write_all(json.as_bytes())
                .context("writing stdout")?;
            eprintln!("{summary}");
        }
    }
    Ok(())
}

fn generated(result: robustnet::Result<Instance>) -> Result<Instance, Failure> {
    result.map_err(|e| Failure::from(anyhow::Error::new(e)))
}

fn generate(args: GenerateArgs) -> Result<(), Failure> {
    if let Some(dir) = &args.fixtures {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        for instance in fixture_suite().map_err(|e| Failure::from(anyhow::Error::new(e)))? {
            let path = dir.join(format!("{}.json", instance.name()));
            emit(&instance, Some(&path))?;
        }
        return Ok(());
    }
    let Some(family) = args.family else {
        return Err(usage(
            "generate needs a family (gap-sp, gap-mst, random, cst) or --fixtures DIR",
        ));
    };
    match family {
        Family::GapSp { r, out } => emit(&generated(gen::gen_gap_sp(r))?, out.as_deref()),
        Family::GapMst { k, out } => emit(&generated(gen::gen_gap_mst(k))?, out.as_deref()),
        Family::Random {
            kind,
            n,
            scenarios,
            seed,
            density,
            costs,
            out,
        } => {
            let spec = RandomSpec {
                shortest_path: kind == KindArg::Sp,
                n,
                density,
                scenarios,
                seed,
                cost_dist: match costs {
                    CostArg::Uniform => CostDist::Uniform,
                    CostArg::Binary => CostDist::Binary,
                },
            };
            emit(&generated(gen::gen_random(&spec))?, out.as_deref())
        }
        Family::Cst { graph, cuts, out } => {
            let base = read_instance(&graph)?;
            let text = fs::read_to_string(&cuts).with_context(|| format!("reading {}", cuts.display()))?;
            let sets: Vec<Vec<usize>> = serde_json::from_str(&text)
                .with_context(|| format!("{} must be a JSON list of node-id lists", cuts.display()))?;
            let name = format!("cst_{}", base.name());
            let instance = generated(gen::gen_cst(
                &name,
                base.num_nodes(),
                base.edges().to_vec(),
                &sets,
            ))?;
            emit(&instance, out.as_deref())
        }
    }
}

/// Gap instances, the crossing-tree example on K4 and small random instances.
fn fixture_suite() -> robustnet::Result<Vec<Instance>> {
    let mut suite = vec![
        gen::gen_gap_sp(0)?,
        gen::gen_gap_sp(1)?,
        gen::gen_gap_mst(2)?,
        gen::gen_gap_mst(3)?,
    ];
    let k4 = vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
    let singletons: Vec<Vec<usize>> = (0..4).map(|v| vec![v]).collect();
    suite.push(gen::gen_cst("cst_k4_singletons", 4, k4, &singletons)?);
    for (shortest_path, n) in [(true, 10), (false, 8)] {
        for seed in 1..=3 {
            suite.push(gen::gen_random(&RandomSpec {
                shortest_path,
                n,
                density: 0.3,
                scenarios: 8,
                seed,
                cost_dist: CostDist::Uniform,
            })?);
        }
    }
    Ok(suite)
}
