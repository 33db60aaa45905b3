use std::io;

use anyhow::Context;
use clap::{Args, ValueEnum};
use serde::Serialize;

use robustnet::gen::{self, CostDist, RandomSpec};
use robustnet::lp::LpConfig;
use robustnet::model::rational::format_cost;
use robustnet::{oracle, Error, Instance};

use crate::{run_algorithm, Algo, Failure};

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Gaps,
    Random,
}

#[derive(Args)]
pub struct BenchArgs {
    #[arg(long, value_enum)]
    suite: Suite,
    /// Random instances per kind.
    #[arg(long, default_value_t = 5)]
    trials: u64,
    /// Base seed for instance generation and randomized rounding.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Record wall-clock milliseconds (otherwise 0, keeping output byte-stable).
    #[arg(long)]
    timings: bool,
}

#[derive(Serialize)]
struct BenchRow {
    instance: String,
    kind: &'static str,
    n: usize,
    m: usize,
    #[serde(rename = "K")]
    k: usize,
    #[serde(rename = "L_star")]
    l_star: String,
    algorithm: &'static str,
    max_cost: String,
    ratio: String,
    rounds: usize,
    seed: String,
    millis: u64,
}

fn algo_name(algo: Algo) -> &'static str {
    match algo {
        Algo::SpAlg1 => "sp-alg1",
        Algo::SpAvg => "sp-avg",
        Algo::MstDet => "mst-det",
        Algo::MstRand => "mst-rand",
        Algo::Exact => "exact",
    }
}

fn suite_instances(args: &BenchArgs) -> robustnet::Result<Vec<(Instance, u64)>> {
    match args.suite {
        Suite::Gaps => Ok(vec![
            (gen::gen_gap_sp(0)?, args.seed),
            (gen::gen_gap_sp(1)?, args.seed),
            (gen::gen_gap_mst(2)?, args.seed),
            (gen::gen_gap_mst(3)?, args.seed),
        ]),
        Suite::Random => {
            let mut out = Vec::new();
            for (shortest_path, n, density) in [(true, 10, 0.3), (false, 8, 0.4)] {
                for t in 0..args.trials {
                    let seed = args.seed.wrapping_add(t);
                    let spec = RandomSpec {
                        shortest_path,
                        n,
                        density,
                        scenarios: 8,
                        seed,
                        cost_dist: CostDist::Uniform,
                    };
                    out.push((gen::gen_random(&spec)?, seed));
                }
            }
            Ok(out)
        }
    }
}

pub fn run(args: BenchArgs) -> anyhow::Result<()> {
    let instances = suite_instances(&args)?;
    let mut writer = csv::Writer::from_writer(io::stdout());
    let config = LpConfig::default();
    for (instance, seed) in &instances {
        let algos: &[Algo] = if instance.is_shortest_path() {
            &[Algo::Exact, Algo::SpAlg1, Algo::SpAvg]
        } else {
            &[Algo::Exact, Algo::MstDet, Algo::MstRand]
        };
        for &algo in algos {
            let run_seed = (algo == Algo::MstRand).then_some(*seed);
            let result = run_algorithm(
                instance,
                algo,
                &config,
                run_seed,
                1.0,
                None,
                0,
                oracle::DEFAULT_LIMIT,
            );
            let (_, report) = match result {
                Ok(r) => r,
                Err(Failure { error, .. })
                    if algo == Algo::Exact
                        && matches!(error.downcast_ref::<Error>(), Some(Error::LimitExceeded { .. })) =>
                {
                    log::info!(
                        "{}: too many solutions to enumerate, skipping exact row",
                        instance.name()
                    );
                    continue;
                }
                Err(f) => {
                    return Err(f
                        .error
                        .context(format!("{} on {}", algo_name(algo), instance.name())))
                }
            };
            writer.serialize(BenchRow {
                instance: instance.name().to_string(),
                kind: instance.kind().tag(),
                n: instance.num_nodes(),
                m: instance.num_edges(),
                k: instance.num_scenarios(),
                l_star: format_cost(&report.l_star),
                algorithm: algo_name(algo),
                max_cost: format_cost(&report.max_cost),
                ratio: format!("{:.6}", report.ratio),
                rounds: report.rounds,
                seed: run_seed.map_or_else(|| "-".to_string(), |s| s.to_string()),
                millis: if args.timings { report.millis } else { 0 },
            })?;
        }
    }
    writer.flush().context("writing CSV")?;
    Ok(())
}
