use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};
use cvrp_loc::aos::PolicyParams;
use cvrp_loc::instance::UniformSpec;
use cvrp_loc::ops::OperatorId;
use cvrp_loc::search::DEFAULT_PERTURBATION_STRENGTH;
use cvrp_loc::solution::DistanceMode;
use cvrp_loc_harness::config::Config;
use cvrp_loc_harness::experiments::{
    cmd_compare, cmd_gen, cmd_loc_sim, cmd_optimize, cmd_sample_loc, parse_ops_list, CompareArgs,
    GenArgs, InstanceFormat, InstanceSource, LocSimArgs, OptimizeArgs, PolicySpec, SampleLocArgs,
};
use cvrp_loc_harness::report;
use std::path::PathBuf;

/// CVRP local search with correlation-assisted adaptive operator selection.
#[derive(Parser)]
#[command(name = "cvrploc", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate uniform random instances.
    Gen(GenCmd),
    /// Print the operator catalog as CSV.
    Ops(OpsCmd),
    /// Sample trap matrices and emit correlation matrices.
    SampleLoc(SampleLocCmd),
    /// Pairwise similarity table over correlation-matrix files.
    LocSim(LocSimCmd),
    /// One optimisation run with a full trace.
    Optimize(OptimizeCmd),
    /// Run a policy comparison grid with paired seeds.
    Compare(CompareCmd),
}

/// Flags shared by config-file-driven subcommands; explicit flags override
/// file values.
#[derive(Args, Clone)]
struct ConfigFile {
    /// Flat key = value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl ConfigFile {
    fn load(&self) -> Result<Config> {
        match &self.config {
            Some(path) => Config::from_file(path),
            None => Ok(Config::default()),
        }
    }
}

#[derive(Args)]
struct GenCmd {
    #[command(flatten)]
    config: ConfigFile,
    /// Output directory for instance files.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// How many instances to generate.
    #[arg(long)]
    count: Option<usize>,
    /// Customers per instance.
    #[arg(long)]
    customers: Option<usize>,
    /// Vehicle capacity.
    #[arg(long)]
    capacity: Option<f64>,
    /// Smallest customer demand.
    #[arg(long)]
    demand_lo: Option<u32>,
    /// Largest customer demand.
    #[arg(long)]
    demand_hi: Option<u32>,
    /// Base seed; instance i uses seed + i.
    #[arg(long)]
    seed: Option<u64>,
    /// Overwrite existing files.
    #[arg(long)]
    force: bool,
    /// Instance file format: cvrplib or json.
    #[arg(long)]
    format: Option<InstanceFormat>,
}

#[derive(Args)]
struct OpsCmd {
    /// Write the catalog here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SampleLocCmd {
    #[command(flatten)]
    config: ConfigFile,
    /// Instance file (CVRPLIB text or .json).
    #[arg(long)]
    instance: Option<PathBuf>,
    /// Independent sampling trials.
    #[arg(long)]
    trials: Option<usize>,
    /// Sampling steps per trial; defaults to 40000 for generated instances
    /// and 2000 for benchmarks.
    #[arg(long)]
    max_ite: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Comma-separated operator ids; defaults to the full catalog.
    #[arg(long)]
    ops: Option<String>,
    /// exact or rounded edge costs.
    #[arg(long)]
    distance_mode: Option<DistanceModeArg>,
}

#[derive(Args)]
struct LocSimCmd {
    /// Correlation matrix CSV files (two or more).
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    matrices: Vec<PathBuf>,
    /// Write the similarity table here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OptimizeCmd {
    #[command(flatten)]
    config: ConfigFile,
    #[arg(long)]
    instance: Option<PathBuf>,
    /// uniform, pm, ap, or a -loc variant (e.g. pm-loc).
    #[arg(long)]
    policy: Option<PolicySpec>,
    /// Correlation matrix CSV for -loc policies.
    #[arg(long)]
    loc: Option<PathBuf>,
    /// Iteration budget; defaults to 40000 for generated instances and 2000
    /// for benchmarks.
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    /// Probability floor; defaults to 0.5 / (K - 1).
    #[arg(long)]
    p_min: Option<f64>,
    #[arg(long)]
    perturbation_strength: Option<usize>,
    #[arg(long)]
    ops: Option<String>,
    #[arg(long)]
    distance_mode: Option<DistanceModeArg>,
}

#[derive(Args)]
struct CompareCmd {
    #[command(flatten)]
    config: ConfigFile,
    /// Instance files; mutually exclusive with the gen-* suite flags.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    instances: Vec<PathBuf>,
    /// Generate this many instances instead of loading files.
    #[arg(long)]
    gen_count: Option<usize>,
    #[arg(long)]
    gen_customers: Option<usize>,
    #[arg(long)]
    gen_capacity: Option<f64>,
    #[arg(long)]
    gen_demand_lo: Option<u32>,
    #[arg(long)]
    gen_demand_hi: Option<u32>,
    #[arg(long)]
    gen_seed: Option<u64>,
    /// Policies to compare, e.g. pm,pm-loc,ap,ap-loc.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    policies: Vec<PolicySpec>,
    #[arg(long)]
    repeats: Option<usize>,
    #[arg(long)]
    base_seed: Option<u64>,
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    loc: Option<PathBuf>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    p_min: Option<f64>,
    #[arg(long)]
    perturbation_strength: Option<usize>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Worker threads for independent cells.
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    ops: Option<String>,
    #[arg(long)]
    distance_mode: Option<DistanceModeArg>,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum DistanceModeArg {
    Exact,
    Rounded,
}

impl From<DistanceModeArg> for DistanceMode {
    fn from(value: DistanceModeArg) -> Self {
        match value {
            DistanceModeArg::Exact => DistanceMode::Exact,
            DistanceModeArg::Rounded => DistanceMode::Rounded,
        }
    }
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Gen(cmd) => {
            let cfg = cmd.config.load()?;
            let spec = UniformSpec {
                n_customers: pick(cmd.customers, &cfg, "gen.customers")?.unwrap_or(100),
                capacity: pick(cmd.capacity, &cfg, "gen.capacity")?.unwrap_or(50.0),
                demand_lo: pick(cmd.demand_lo, &cfg, "gen.demand_lo")?.unwrap_or(1),
                demand_hi: pick(cmd.demand_hi, &cfg, "gen.demand_hi")?.unwrap_or(9),
            };
            let args = GenArgs {
                out_dir: pick(cmd.out_dir, &cfg, "out_dir")?
                    .unwrap_or_else(|| PathBuf::from("instances")),
                count: pick(cmd.count, &cfg, "gen.count")?.unwrap_or(1),
                spec,
                seed: pick(cmd.seed, &cfg, "gen.seed")?.unwrap_or(0),
                force: cmd.force,
                format: pick_str(cmd.format, &cfg, "gen.format")?
                    .unwrap_or(InstanceFormat::Cvrplib),
            };
            let paths = cmd_gen(&args)?;
            for p in paths {
                println!("{}", p.display());
            }
        }
        Command::Ops(cmd) => {
            let csv = report::ops_catalog_csv(&OperatorId::full_set());
            match cmd.out {
                Some(path) => std::fs::write(path, csv)?,
                None => print!("{csv}"),
            }
        }
        Command::SampleLoc(cmd) => {
            let cfg = cmd.config.load()?;
            let ops_raw = cmd.ops.or_else(|| cfg.get("ops").map(str::to_string));
            let args = SampleLocArgs {
                instance: require(pick(cmd.instance, &cfg, "instance")?, "--instance")?,
                trials: pick(cmd.trials, &cfg, "trials")?.unwrap_or(10),
                max_ite: pick(cmd.max_ite, &cfg, "max_ite")?,
                seed: pick(cmd.seed, &cfg, "seed")?.unwrap_or(0),
                out_dir: pick(cmd.out_dir, &cfg, "out_dir")?
                    .unwrap_or_else(|| PathBuf::from("loc-out")),
                ops: parse_ops_list(ops_raw.as_deref())?,
                distance_mode: distance_mode(cmd.distance_mode, &cfg)?,
            };
            let summary = cmd_sample_loc(&args)?;
            println!(
                "{} trials, recorded rows {:?}",
                summary.trials, summary.recorded_rows
            );
            if let (Some(mean), Some(var)) = (
                summary.pairwise_similarity_mean,
                summary.pairwise_similarity_variance,
            ) {
                println!("pairwise similarity mean {mean:.4} variance {var:.5}");
            }
        }
        Command::LocSim(cmd) => {
            if cmd.matrices.len() < 2 {
                bail!("--matrices needs at least two files");
            }
            let args = LocSimArgs {
                matrices: cmd.matrices,
                out: cmd.out.clone(),
            };
            let table = cmd_loc_sim(&args)?;
            if cmd.out.is_none() {
                print!("{}", report::sim_table_csv(&table));
            }
        }
        Command::Optimize(cmd) => {
            let cfg = cmd.config.load()?;
            let ops_raw = cmd.ops.or_else(|| cfg.get("ops").map(str::to_string));
            let policy: PolicySpec = require(pick_str(cmd.policy, &cfg, "policy")?, "--policy")?;
            let args = OptimizeArgs {
                instance: require(pick(cmd.instance, &cfg, "instance")?, "--instance")?,
                policy,
                budget: pick(cmd.budget, &cfg, "budget")?,
                seed: pick(cmd.seed, &cfg, "seed")?.unwrap_or(0),
                out_dir: pick(cmd.out_dir, &cfg, "out_dir")?
                    .unwrap_or_else(|| PathBuf::from("run-out")),
                loc: pick(cmd.loc, &cfg, "loc_matrix")?,
                params: PolicyParams {
                    alpha: pick(cmd.alpha, &cfg, "alpha")?.unwrap_or(0.2),
                    beta: pick(cmd.beta, &cfg, "beta")?.unwrap_or(0.2),
                    p_min: pick(cmd.p_min, &cfg, "p_min")?,
                },
                perturbation_strength: pick(
                    cmd.perturbation_strength,
                    &cfg,
                    "perturbation_strength",
                )?
                .unwrap_or(DEFAULT_PERTURBATION_STRENGTH),
                distance_mode: distance_mode(cmd.distance_mode, &cfg)?,
                ops: parse_ops_list(ops_raw.as_deref())?,
            };
            let summary = cmd_optimize(&args)?;
            println!(
                "{} {} best {:.6} final {:.6} trapped-after-trapped {} perturbations {}",
                summary.instance,
                summary.policy,
                summary.best_distance,
                summary.final_distance,
                summary.trapped_after_trapped_count,
                summary.perturbation_count
            );
        }
        Command::Compare(cmd) => {
            let cfg = cmd.config.load()?;
            let ops_raw = cmd.ops.or_else(|| cfg.get("ops").map(str::to_string));
            let policies = if cmd.policies.is_empty() {
                match cfg.get("policies") {
                    Some(raw) => raw
                        .split(',')
                        .map(|p| p.trim().parse::<PolicySpec>().map_err(anyhow::Error::msg))
                        .collect::<Result<Vec<_>>>()?,
                    None => bail!("--policies is required"),
                }
            } else {
                cmd.policies
            };
            let instances = if cmd.instances.is_empty() {
                cfg.get("instances")
                    .map(|raw| raw.split(',').map(|s| PathBuf::from(s.trim())).collect())
                    .unwrap_or_default()
            } else {
                cmd.instances
            };
            let gen_count = pick(cmd.gen_count, &cfg, "gen.count")?;
            let source = if !instances.is_empty() {
                if gen_count.is_some() {
                    bail!("pass either --instances or --gen-count, not both");
                }
                InstanceSource::Files(instances)
            } else if let Some(count) = gen_count {
                InstanceSource::Generated {
                    count,
                    spec: UniformSpec {
                        n_customers: pick(cmd.gen_customers, &cfg, "gen.customers")?.unwrap_or(100),
                        capacity: pick(cmd.gen_capacity, &cfg, "gen.capacity")?.unwrap_or(50.0),
                        demand_lo: pick(cmd.gen_demand_lo, &cfg, "gen.demand_lo")?.unwrap_or(1),
                        demand_hi: pick(cmd.gen_demand_hi, &cfg, "gen.demand_hi")?.unwrap_or(9),
                    },
                    seed: pick(cmd.gen_seed, &cfg, "gen.seed")?.unwrap_or(0),
                }
            } else {
                bail!("pass --instances or a --gen-count suite");
            };
            let args = CompareArgs {
                source,
                policies,
                repeats: pick(cmd.repeats, &cfg, "repeats")?.unwrap_or(1),
                base_seed: pick(cmd.base_seed, &cfg, "base_seed")?.unwrap_or(0),
                budget: pick(cmd.budget, &cfg, "budget")?,
                loc: pick(cmd.loc, &cfg, "loc_matrix")?,
                params: PolicyParams {
                    alpha: pick(cmd.alpha, &cfg, "alpha")?.unwrap_or(0.2),
                    beta: pick(cmd.beta, &cfg, "beta")?.unwrap_or(0.2),
                    p_min: pick(cmd.p_min, &cfg, "p_min")?,
                },
                perturbation_strength: pick(
                    cmd.perturbation_strength,
                    &cfg,
                    "perturbation_strength",
                )?
                .unwrap_or(DEFAULT_PERTURBATION_STRENGTH),
                out_dir: pick(cmd.out_dir, &cfg, "out_dir")?
                    .unwrap_or_else(|| PathBuf::from("compare-out")),
                jobs: pick(cmd.jobs, &cfg, "jobs")?
                    .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())),
                distance_mode: distance_mode(cmd.distance_mode, &cfg)?,
                ops: parse_ops_list(ops_raw.as_deref())?,
            };
            let report = cmd_compare(&args)?;
            for agg in &report.aggregates {
                println!(
                    "{}: mean best {:.6} (var {:.6}), mean trapped-after-trapped {:.2}",
                    agg.policy,
                    agg.mean_best_distance,
                    agg.variance_best_distance,
                    agg.mean_trapped_after_trapped
                );
            }
            for pair in &report.pairs {
                println!(
                    "{} vs {}: distance p {:.5}{}, trapped p {:.5}{}, wins {}/{}/{}",
                    pair.policy_a,
                    pair.policy_b,
                    pair.distance_p_value,
                    if pair.distance_degenerate {
                        " (degenerate)"
                    } else {
                        ""
                    },
                    pair.trapped_p_value,
                    if pair.trapped_degenerate {
                        " (degenerate)"
                    } else {
                        ""
                    },
                    pair.wins_a,
                    pair.wins_b,
                    pair.ties
                );
            }
        }
    }
    Ok(())
}

/// CLI flag wins, then the config file, then the caller's default.
fn pick<T: std::str::FromStr>(flag: Option<T>, cfg: &Config, key: &str) -> Result<Option<T>>
where
    T::Err: std::fmt::Display,
{
    match flag {
        Some(v) => Ok(Some(v)),
        None => cfg.get_parse(key),
    }
}

/// Same as `pick` for types whose FromStr error is a plain String.
fn pick_str<T: std::str::FromStr<Err = String>>(
    flag: Option<T>,
    cfg: &Config,
    key: &str,
) -> Result<Option<T>> {
    match flag {
        Some(v) => Ok(Some(v)),
        None => match cfg.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|e: String| anyhow::anyhow!("config key `{key}`: {e}")),
        },
    }
}

fn require<T>(value: Option<T>, flag: &str) -> Result<T> {
    value.ok_or_else(|| anyhow::anyhow!("{flag} is required (flag or config file)"))
}

fn distance_mode(flag: Option<DistanceModeArg>, cfg: &Config) -> Result<DistanceMode> {
    if let Some(arg) = flag {
        return Ok(arg.into());
    }
    match cfg.get("distance_mode") {
        None => Ok(DistanceMode::Exact),
        Some("exact") => Ok(DistanceMode::Exact),
        Some("rounded") => Ok(DistanceMode::Rounded),
        Some(other) => bail!("config key `distance_mode`: unknown mode `{other}`"),
    }
}
