//! Experiment drivers behind the CLI subcommands: instance generation,
//! correlation-matrix sampling, matrix similarity tables, single optimisation
//! runs, and paired policy comparisons with Wilcoxon tests.

use crate::config::Config;
use crate::report::{self, fmt_f64};
use crate::stats::{self, wilcoxon_signed_rank};
use anyhow::{bail, Context, Result};
use cvrp_loc::aos::{PolicyKind, PolicyParams};
use cvrp_loc::instance::{
    generate_uniform_instance, load_instance, write_cvrplib, write_json, Instance, UniformSpec,
};
use cvrp_loc::loc::{
    kendall_similarity, loc_matrix, parse_loc_csv, sample_trap_matrix, write_loc_csv,
    write_trap_csv, LocMatrix,
};
use cvrp_loc::ops::OperatorId;
use cvrp_loc::rng::{fnv1a, mix_seed};
use cvrp_loc::search::{
    run_base, run_loc_assisted, SearchConfig, SearchTrace, DEFAULT_BUDGET_BENCHMARK,
    DEFAULT_BUDGET_GENERATED,
};
use cvrp_loc::solution::{DistanceMode, Evaluator};
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

/// A policy to run: the base selection rule, optionally wrapped in
/// correlation-assisted modulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PolicySpec {
    pub kind: PolicyKind,
    pub loc_assisted: bool,
}

impl PolicySpec {
    pub fn label(&self) -> String {
        if self.loc_assisted {
            format!("{}-loc", self.kind.label())
        } else {
            self.kind.label().to_string()
        }
    }
}

impl std::str::FromStr for PolicySpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.to_ascii_lowercase();
        let (base, loc_assisted) = match lower.strip_suffix("-loc") {
            Some(base) => (base, true),
            None => (lower.as_str(), false),
        };
        Ok(PolicySpec {
            kind: base.parse()?,
            loc_assisted,
        })
    }
}

impl std::fmt::Display for PolicySpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.label())
    }
}

/// Default iteration budget: generated instances get the long budget,
/// loaded benchmarks the short one.
pub fn default_budget(inst: &Instance) -> usize {
    if inst.name().starts_with("unirand") {
        DEFAULT_BUDGET_GENERATED
    } else {
        DEFAULT_BUDGET_BENCHMARK
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstanceFormat {
    Cvrplib,
    Json,
}

impl std::str::FromStr for InstanceFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "cvrplib" | "vrp" => Ok(InstanceFormat::Cvrplib),
            "json" => Ok(InstanceFormat::Json),
            other => Err(format!("unknown instance format `{other}`")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct GenArgs {
    pub out_dir: PathBuf,
    pub count: usize,
    pub spec: UniformSpec,
    pub seed: u64,
    pub force: bool,
    pub format: InstanceFormat,
}

/// Write `count` seeded instances to disk; instance i uses seed `seed + i`.
/// Refuses to overwrite existing files unless forced.
pub fn cmd_gen(args: &GenArgs) -> Result<Vec<PathBuf>> {
    if args.count == 0 {
        bail!("count must be at least 1");
    }
    std::fs::create_dir_all(&args.out_dir)?;
    let mut paths = Vec::with_capacity(args.count);
    for i in 0..args.count {
        let seed = args.seed + i as u64;
        let inst = generate_uniform_instance(&args.spec, seed)?;
        let (ext, text) = match args.format {
            InstanceFormat::Cvrplib => ("vrp", write_cvrplib(&inst)),
            InstanceFormat::Json => ("json", write_json(&inst)?),
        };
        let path = args.out_dir.join(format!("{}.{ext}", inst.name()));
        if path.exists() && !args.force {
            bail!(
                "{} already exists; pass --force to overwrite",
                path.display()
            );
        }
        std::fs::write(&path, text)?;
        paths.push(path);
    }
    Ok(paths)
}

#[derive(Debug, Clone)]
pub struct SampleLocArgs {
    pub instance: PathBuf,
    pub trials: usize,
    /// Sampling steps per trial; `None` applies the instance-based budget
    /// default.
    pub max_ite: Option<usize>,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub ops: Vec<OperatorId>,
    pub distance_mode: DistanceMode,
}

#[derive(Debug, Serialize)]
pub struct SampleLocSummary {
    pub instance: String,
    pub trials: usize,
    pub recorded_rows: Vec<usize>,
    pub pairwise_similarity_mean: Option<f64>,
    pub pairwise_similarity_variance: Option<f64>,
    pub matrix_files: Vec<String>,
    pub mean_matrix_file: String,
    pub config: std::collections::BTreeMap<String, String>,
}

/// Run the sampling protocol `trials` times and emit one correlation matrix
/// per trial plus their elementwise mean; with at least two trials the
/// pairwise similarity statistics are reported as well.
pub fn cmd_sample_loc(args: &SampleLocArgs) -> Result<SampleLocSummary> {
    if args.trials == 0 {
        bail!("trials must be at least 1");
    }
    let inst = load_instance(&args.instance)
        .with_context(|| format!("loading {}", args.instance.display()))?;
    let eval = Evaluator::with_mode(&inst, args.distance_mode);
    let max_ite = args.max_ite.unwrap_or_else(|| default_budget(&inst));
    std::fs::create_dir_all(&args.out_dir)?;

    let mut matrices = Vec::with_capacity(args.trials);
    let mut matrix_files = Vec::with_capacity(args.trials);
    let mut recorded_rows = Vec::with_capacity(args.trials);
    for t in 0..args.trials {
        let trial_seed = mix_seed(args.seed, &[t as u64]);
        let outcome = sample_trap_matrix(&eval, &args.ops, max_ite, trial_seed);
        if outcome.traps.n_rows() == 0 {
            bail!("trial {t}: no solution was recorded; raise --max-ite");
        }
        let matrix = loc_matrix(&outcome.traps)?;
        let loc_path = args.out_dir.join(format!("trial_{t:03}.loc.csv"));
        std::fs::write(&loc_path, write_loc_csv(&matrix, &args.ops))?;
        let trap_path = args.out_dir.join(format!("trial_{t:03}.traps.csv"));
        std::fs::write(&trap_path, write_trap_csv(&outcome.traps))?;
        recorded_rows.push(outcome.traps.n_rows());
        matrix_files.push(loc_path.file_name().unwrap().to_string_lossy().into_owned());
        matrices.push(matrix);
    }

    let mean_matrix = LocMatrix::mean(&matrices)?;
    let mean_path = args.out_dir.join("mean.loc.csv");
    std::fs::write(&mean_path, write_loc_csv(&mean_matrix, &args.ops))?;

    let (pair_mean, pair_var) = if matrices.len() >= 2 {
        let mut sims = Vec::new();
        for i in 0..matrices.len() {
            for j in (i + 1)..matrices.len() {
                sims.push(kendall_similarity(&matrices[i], &matrices[j])?);
            }
        }
        (
            Some(stats::mean(&sims)),
            Some(stats::sample_variance(&sims)),
        )
    } else {
        (None, None)
    };

    let mut config = Config::default();
    config.set("command", "sample-loc");
    config.set("instance", args.instance.display().to_string());
    config.set("trials", args.trials.to_string());
    config.set("max_ite", max_ite.to_string());
    config.set("seed", args.seed.to_string());
    config.set("ops", ops_csv(&args.ops));
    config.set("distance_mode", mode_label(args.distance_mode));

    let summary = SampleLocSummary {
        instance: inst.name().to_string(),
        trials: args.trials,
        recorded_rows,
        pairwise_similarity_mean: pair_mean,
        pairwise_similarity_variance: pair_var,
        matrix_files,
        mean_matrix_file: "mean.loc.csv".into(),
        config: config.entries().clone(),
    };
    std::fs::write(
        args.out_dir.join("summary.json"),
        serde_json::to_string_pretty(&summary)?,
    )?;
    Ok(summary)
}

#[derive(Debug, Clone)]
pub struct LocSimArgs {
    pub matrices: Vec<PathBuf>,
    pub out: Option<PathBuf>,
}

pub struct SimTable {
    pub names: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

/// Pairwise similarity table over a set of correlation-matrix files.
pub fn cmd_loc_sim(args: &LocSimArgs) -> Result<SimTable> {
    if args.matrices.len() < 2 {
        bail!("need at least two matrix files");
    }
    let mut names = Vec::new();
    let mut loaded = Vec::new();
    for path in &args.matrices {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let (matrix, _ops) = parse_loc_csv(&text)?;
        names.push(
            path.file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_else(|| path.display().to_string()),
        );
        loaded.push(matrix);
    }
    let n = loaded.len();
    let mut values = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            values[i][j] = kendall_similarity(&loaded[i], &loaded[j])?;
        }
    }
    let table = SimTable { names, values };
    if let Some(out) = &args.out {
        if let Some(parent) = out.parent() {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(out, report::sim_table_csv(&table))?;
    }
    Ok(table)
}

#[derive(Debug, Clone)]
pub struct OptimizeArgs {
    pub instance: PathBuf,
    pub policy: PolicySpec,
    pub budget: Option<usize>,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub loc: Option<PathBuf>,
    pub params: PolicyParams,
    pub perturbation_strength: usize,
    pub distance_mode: DistanceMode,
    pub ops: Vec<OperatorId>,
}

#[derive(Debug, Serialize)]
pub struct RunSummary {
    pub instance: String,
    pub policy: String,
    pub seed: u64,
    pub budget: usize,
    pub initial_distance: f64,
    pub best_distance: f64,
    pub final_distance: f64,
    pub trapped_after_trapped_count: usize,
    pub perturbation_count: usize,
    pub perturbation_iterations: Vec<usize>,
    pub wall_time_s: f64,
    pub config: std::collections::BTreeMap<String, String>,
}

/// One optimisation run; writes the full iteration trace and a summary.
pub fn cmd_optimize(args: &OptimizeArgs) -> Result<RunSummary> {
    let inst = load_instance(&args.instance)
        .with_context(|| format!("loading {}", args.instance.display()))?;
    let eval = Evaluator::with_mode(&inst, args.distance_mode);
    let budget = args.budget.unwrap_or_else(|| default_budget(&inst));
    let loc = load_loc_for(&args.policy, args.loc.as_deref(), args.ops.len())?;

    let mut config = SearchConfig::new(args.policy.kind, budget, args.seed);
    config.params = args.params;
    config.perturbation_strength = args.perturbation_strength;

    let start = Instant::now();
    let trace = execute(&eval, &args.ops, &config, loc.as_ref())?;
    let wall = start.elapsed().as_secs_f64();

    std::fs::create_dir_all(&args.out_dir)?;
    let mut echo = Config::default();
    echo.set("command", "optimize");
    echo.set("instance", args.instance.display().to_string());
    echo.set("policy", args.policy.label());
    echo.set("budget", budget.to_string());
    echo.set("seed", args.seed.to_string());
    echo.set("alpha", fmt_f64(args.params.alpha));
    echo.set("beta", fmt_f64(args.params.beta));
    echo.set(
        "p_min",
        fmt_f64(resolved_p_min(&args.params, args.ops.len())),
    );
    echo.set(
        "perturbation_strength",
        args.perturbation_strength.to_string(),
    );
    echo.set("ops", ops_csv(&args.ops));
    echo.set("distance_mode", mode_label(args.distance_mode));
    if let Some(path) = &args.loc {
        echo.set("loc_matrix", path.display().to_string());
        echo.set("loc_checksum", loc_file_checksum(path)?);
    }

    std::fs::write(
        args.out_dir.join("trace.csv"),
        report::trace_csv(&trace, &echo),
    )?;
    let summary = RunSummary {
        instance: inst.name().to_string(),
        policy: args.policy.label(),
        seed: args.seed,
        budget,
        initial_distance: trace.initial_distance,
        best_distance: trace.best_distance,
        final_distance: trace.final_distance,
        trapped_after_trapped_count: trace.trapped_after_trapped_count,
        perturbation_count: trace.perturbation_count,
        perturbation_iterations: trace
            .records
            .iter()
            .filter(|r| r.perturbed)
            .map(|r| r.ite)
            .collect(),
        wall_time_s: wall,
        config: echo.entries().clone(),
    };
    std::fs::write(
        args.out_dir.join("summary.json"),
        serde_json::to_string_pretty(&summary)?,
    )?;
    Ok(summary)
}

/// Instance sources for a comparison: explicit files or a generated suite.
#[derive(Debug, Clone)]
pub enum InstanceSource {
    Files(Vec<PathBuf>),
    Generated {
        count: usize,
        spec: UniformSpec,
        seed: u64,
    },
}

#[derive(Debug, Clone)]
pub struct CompareArgs {
    pub source: InstanceSource,
    pub policies: Vec<PolicySpec>,
    pub repeats: usize,
    pub base_seed: u64,
    pub budget: Option<usize>,
    pub loc: Option<PathBuf>,
    pub params: PolicyParams,
    pub perturbation_strength: usize,
    pub out_dir: PathBuf,
    pub jobs: usize,
    pub distance_mode: DistanceMode,
    pub ops: Vec<OperatorId>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CellSummary {
    /// Position in the configured instance list; names need not be unique.
    pub instance_idx: usize,
    pub instance: String,
    pub policy: String,
    pub repeat: usize,
    pub seed: u64,
    pub best_distance: f64,
    pub final_distance: f64,
    pub trapped_after_trapped_count: usize,
    pub perturbation_count: usize,
}

#[derive(Debug, Serialize)]
pub struct PolicyAggregate {
    pub policy: String,
    pub mean_best_distance: f64,
    pub variance_best_distance: f64,
    pub mean_final_distance: f64,
    pub variance_final_distance: f64,
    pub mean_trapped_after_trapped: f64,
    pub variance_trapped_after_trapped: f64,
}

#[derive(Debug, Serialize)]
pub struct PairedComparison {
    pub policy_a: String,
    pub policy_b: String,
    /// Wilcoxon over per-cell best distances, paired by (instance, repeat).
    pub distance_p_value: f64,
    pub distance_degenerate: bool,
    /// Wilcoxon over per-cell trapped-selection counts.
    pub trapped_p_value: f64,
    pub trapped_degenerate: bool,
    /// Per-instance mean-best-distance wins for a / for b / ties.
    pub wins_a: usize,
    pub wins_b: usize,
    pub ties: usize,
    /// Instances on which a's mean trapped count is strictly lower.
    pub trapped_wins_a: usize,
    pub trapped_wins_b: usize,
    pub trapped_ties: usize,
}

#[derive(Debug, Serialize)]
pub struct ComparisonReport {
    pub instances: Vec<String>,
    pub policies: Vec<String>,
    pub repeats: usize,
    pub cells: Vec<CellSummary>,
    pub aggregates: Vec<PolicyAggregate>,
    pub pairs: Vec<PairedComparison>,
    pub wall_time_s: f64,
    pub config: std::collections::BTreeMap<String, String>,
}

/// Run every (instance, policy, repeat) cell with paired seeds and report
/// per-policy aggregates plus pairwise Wilcoxon tests. Cells run on a worker
/// pool; results merge in sorted cell order so outputs are byte-stable for
/// any job count.
pub fn cmd_compare(args: &CompareArgs) -> Result<ComparisonReport> {
    if args.policies.len() < 2 {
        bail!("need at least two policies to compare");
    }
    if args.repeats == 0 {
        bail!("repeats must be at least 1");
    }
    let start = Instant::now();

    let instances: Vec<Instance> = match &args.source {
        InstanceSource::Files(paths) => {
            if paths.is_empty() {
                bail!("no instances given");
            }
            paths
                .iter()
                .map(|p| load_instance(p).with_context(|| format!("loading {}", p.display())))
                .collect::<Result<_>>()?
        }
        InstanceSource::Generated { count, spec, seed } => {
            if *count == 0 {
                bail!("generated instance count must be at least 1");
            }
            (0..*count)
                .map(|i| Ok(generate_uniform_instance(spec, seed + i as u64)?))
                .collect::<Result<_>>()?
        }
    };

    let needs_loc = args.policies.iter().any(|p| p.loc_assisted);
    let loc = if needs_loc {
        let Some(path) = &args.loc else {
            bail!("a correlation matrix file is required for *-loc policies");
        };
        Some(load_loc_matrix(path, args.ops.len())?)
    } else {
        None
    };

    let evaluators: Vec<Evaluator> = instances
        .iter()
        .map(|inst| Evaluator::with_mode(inst, args.distance_mode))
        .collect();

    // cell grid, sorted by construction
    struct Cell {
        instance_idx: usize,
        policy_idx: usize,
        repeat: usize,
    }
    let mut cells = Vec::new();
    for instance_idx in 0..instances.len() {
        for policy_idx in 0..args.policies.len() {
            for repeat in 0..args.repeats {
                cells.push(Cell {
                    instance_idx,
                    policy_idx,
                    repeat,
                });
            }
        }
    }

    let jobs = args.jobs.max(1);
    let next = AtomicUsize::new(0);

    let worker = || -> Result<Vec<(usize, CellSummary)>> {
        let mut done = Vec::new();
        loop {
            let idx = next.fetch_add(1, Ordering::Relaxed);
            if idx >= cells.len() {
                return Ok(done);
            }
            let cell = &cells[idx];
            let inst = &instances[cell.instance_idx];
            let eval = &evaluators[cell.instance_idx];
            let policy = args.policies[cell.policy_idx];
            // paired seeds: identical across policies for a given
            // (instance, repeat) cell
            let seed = mix_seed(
                args.base_seed,
                &[cell.instance_idx as u64, cell.repeat as u64],
            );
            let budget = args.budget.unwrap_or_else(|| default_budget(inst));
            let mut config = SearchConfig::new(policy.kind, budget, seed);
            config.params = args.params;
            config.perturbation_strength = args.perturbation_strength;
            let trace = execute(
                eval,
                &args.ops,
                &config,
                loc.as_ref().filter(|_| policy.loc_assisted),
            )?;
            done.push((
                idx,
                CellSummary {
                    instance_idx: cell.instance_idx,
                    instance: inst.name().to_string(),
                    policy: policy.label(),
                    repeat: cell.repeat,
                    seed,
                    best_distance: trace.best_distance,
                    final_distance: trace.final_distance,
                    trapped_after_trapped_count: trace.trapped_after_trapped_count,
                    perturbation_count: trace.perturbation_count,
                },
            ));
        }
    };

    // merge in cell order so output files are byte-stable for any job count
    let mut indexed: Vec<(usize, CellSummary)> = if jobs == 1 {
        worker()?
    } else {
        std::thread::scope(|scope| -> Result<Vec<(usize, CellSummary)>> {
            let handles: Vec<_> = (0..jobs).map(|_| scope.spawn(worker)).collect();
            let mut all = Vec::with_capacity(cells.len());
            for h in handles {
                all.extend(h.join().expect("worker panicked")?);
            }
            Ok(all)
        })?
    };
    indexed.sort_by_key(|(idx, _)| *idx);
    assert_eq!(indexed.len(), cells.len());
    let cells_out: Vec<CellSummary> = indexed.into_iter().map(|(_, c)| c).collect();

    // aggregates per policy
    let policy_labels: Vec<String> = args.policies.iter().map(|p| p.label()).collect();
    let mut aggregates = Vec::new();
    for label in &policy_labels {
        let best: Vec<f64> = cells_out
            .iter()
            .filter(|c| &c.policy == label)
            .map(|c| c.best_distance)
            .collect();
        let finals: Vec<f64> = cells_out
            .iter()
            .filter(|c| &c.policy == label)
            .map(|c| c.final_distance)
            .collect();
        let trapped: Vec<f64> = cells_out
            .iter()
            .filter(|c| &c.policy == label)
            .map(|c| c.trapped_after_trapped_count as f64)
            .collect();
        aggregates.push(PolicyAggregate {
            policy: label.clone(),
            mean_best_distance: stats::mean(&best),
            variance_best_distance: stats::sample_variance(&best),
            mean_final_distance: stats::mean(&finals),
            variance_final_distance: stats::sample_variance(&finals),
            mean_trapped_after_trapped: stats::mean(&trapped),
            variance_trapped_after_trapped: stats::sample_variance(&trapped),
        });
    }

    // pairwise tests with pairing by (instance, repeat)
    let instance_names: Vec<String> = instances.iter().map(|i| i.name().to_string()).collect();
    let mut pairs = Vec::new();
    for a in 0..policy_labels.len() {
        for b in (a + 1)..policy_labels.len() {
            pairs.push(compare_pair(
                &cells_out,
                instances.len(),
                args.repeats,
                &policy_labels[a],
                &policy_labels[b],
            ));
        }
    }

    let mut echo = Config::default();
    echo.set("command", "compare");
    match &args.source {
        InstanceSource::Files(paths) => {
            let joined: Vec<String> = paths.iter().map(|p| p.display().to_string()).collect();
            echo.set("instances", joined.join(","));
        }
        InstanceSource::Generated { count, spec, seed } => {
            echo.set("gen.count", count.to_string());
            echo.set("gen.customers", spec.n_customers.to_string());
            echo.set("gen.capacity", fmt_f64(spec.capacity));
            echo.set("gen.demand_lo", spec.demand_lo.to_string());
            echo.set("gen.demand_hi", spec.demand_hi.to_string());
            echo.set("gen.seed", seed.to_string());
        }
    }
    echo.set("policies", policy_labels.join(","));
    echo.set("repeats", args.repeats.to_string());
    echo.set("base_seed", args.base_seed.to_string());
    if let Some(budget) = args.budget {
        echo.set("budget", budget.to_string());
    }
    echo.set("alpha", fmt_f64(args.params.alpha));
    echo.set("beta", fmt_f64(args.params.beta));
    echo.set(
        "p_min",
        fmt_f64(resolved_p_min(&args.params, args.ops.len())),
    );
    echo.set(
        "perturbation_strength",
        args.perturbation_strength.to_string(),
    );
    echo.set("ops", ops_csv(&args.ops));
    echo.set("distance_mode", mode_label(args.distance_mode));
    if let Some(path) = &args.loc {
        echo.set("loc_matrix", path.display().to_string());
        echo.set("loc_checksum", loc_file_checksum(path)?);
    }
    // cell seeds are derived, but echo them so rows are reproducible alone
    let seed_echo: Vec<String> = (0..instances.len())
        .flat_map(|i| {
            (0..args.repeats)
                .map(move |r| mix_seed(args.base_seed, &[i as u64, r as u64]).to_string())
        })
        .collect();
    echo.set("cell_seeds", seed_echo.join(","));

    let report = ComparisonReport {
        instances: instance_names,
        policies: policy_labels,
        repeats: args.repeats,
        cells: cells_out,
        aggregates,
        pairs,
        wall_time_s: start.elapsed().as_secs_f64(),
        config: echo.entries().clone(),
    };

    std::fs::create_dir_all(&args.out_dir)?;
    std::fs::write(
        args.out_dir.join("cells.csv"),
        report::cells_csv(&report.cells, &echo),
    )?;
    std::fs::write(
        args.out_dir.join("report.json"),
        serde_json::to_string_pretty(&report)?,
    )?;
    Ok(report)
}

fn compare_pair(
    cells: &[CellSummary],
    n_instances: usize,
    repeats: usize,
    a: &str,
    b: &str,
) -> PairedComparison {
    let pick = |policy: &str, instance_idx: usize, repeat: usize| -> &CellSummary {
        cells
            .iter()
            .find(|c| c.policy == policy && c.instance_idx == instance_idx && c.repeat == repeat)
            .expect("cell grid is complete")
    };
    let mut dist_pairs = Vec::new();
    let mut trap_pairs = Vec::new();
    let mut wins_a = 0;
    let mut wins_b = 0;
    let mut ties = 0;
    let mut trapped_wins_a = 0;
    let mut trapped_wins_b = 0;
    let mut trapped_ties = 0;
    for inst in 0..n_instances {
        let mut best_a = Vec::new();
        let mut best_b = Vec::new();
        let mut trap_a = Vec::new();
        let mut trap_b = Vec::new();
        for r in 0..repeats {
            let ca = pick(a, inst, r);
            let cb = pick(b, inst, r);
            dist_pairs.push((ca.best_distance, cb.best_distance));
            trap_pairs.push((
                ca.trapped_after_trapped_count as f64,
                cb.trapped_after_trapped_count as f64,
            ));
            best_a.push(ca.best_distance);
            best_b.push(cb.best_distance);
            trap_a.push(ca.trapped_after_trapped_count as f64);
            trap_b.push(cb.trapped_after_trapped_count as f64);
        }
        let (ma, mb) = (stats::mean(&best_a), stats::mean(&best_b));
        if ma < mb {
            wins_a += 1;
        } else if mb < ma {
            wins_b += 1;
        } else {
            ties += 1;
        }
        let (ta, tb) = (stats::mean(&trap_a), stats::mean(&trap_b));
        if ta < tb {
            trapped_wins_a += 1;
        } else if tb < ta {
            trapped_wins_b += 1;
        } else {
            trapped_ties += 1;
        }
    }
    let dist = wilcoxon_signed_rank(&dist_pairs);
    let trap = wilcoxon_signed_rank(&trap_pairs);
    PairedComparison {
        policy_a: a.to_string(),
        policy_b: b.to_string(),
        distance_p_value: dist.p_value,
        distance_degenerate: dist.degenerate,
        trapped_p_value: trap.p_value,
        trapped_degenerate: trap.degenerate,
        wins_a,
        wins_b,
        ties,
        trapped_wins_a,
        trapped_wins_b,
        trapped_ties,
    }
}

fn execute(
    eval: &Evaluator,
    ops: &[OperatorId],
    config: &SearchConfig,
    loc: Option<&LocMatrix>,
) -> Result<SearchTrace> {
    Ok(match loc {
        Some(loc) => run_loc_assisted(eval, ops, config, loc)?,
        None => Ok::<_, cvrp_loc::LocError>(run_base(eval, ops, config))?,
    })
}

fn load_loc_for(
    policy: &PolicySpec,
    path: Option<&Path>,
    n_ops: usize,
) -> Result<Option<LocMatrix>> {
    if !policy.loc_assisted {
        return Ok(None);
    }
    let Some(path) = path else {
        bail!(
            "policy {} requires a correlation matrix file",
            policy.label()
        );
    };
    Ok(Some(load_loc_matrix(path, n_ops)?))
}

fn load_loc_matrix(path: &Path, n_ops: usize) -> Result<LocMatrix> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let (matrix, _ops) = parse_loc_csv(&text)?;
    if matrix.dim() != n_ops {
        bail!(
            "correlation matrix {} is {}x{} but {} operators are configured",
            path.display(),
            matrix.dim(),
            matrix.dim(),
            n_ops
        );
    }
    Ok(matrix)
}

pub fn loc_file_checksum(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path)?;
    Ok(format!("fnv1a:{:016x}", fnv1a(&bytes)))
}

/// The probability floor actually in force: the configured value or the
/// 0.5 / (K - 1) default.
fn resolved_p_min(params: &PolicyParams, n_ops: usize) -> f64 {
    params.p_min.unwrap_or_else(|| {
        if n_ops > 1 {
            0.5 / (n_ops as f64 - 1.0)
        } else {
            1.0
        }
    })
}

pub fn ops_csv(ops: &[OperatorId]) -> String {
    let ids: Vec<String> = ops.iter().map(|o| o.to_string()).collect();
    ids.join(",")
}

pub fn mode_label(mode: DistanceMode) -> &'static str {
    match mode {
        DistanceMode::Exact => "exact",
        DistanceMode::Rounded => "rounded",
    }
}

/// Parse a comma-separated operator id list; empty means the full catalog.
pub fn parse_ops_list(raw: Option<&str>) -> Result<Vec<OperatorId>> {
    match raw {
        None | Some("") => Ok(OperatorId::full_set()),
        Some(list) => list
            .split(',')
            .map(|tok| {
                let tok = tok.trim();
                tok.parse::<u8>()
                    .ok()
                    .and_then(OperatorId::new)
                    .with_context(|| format!("bad operator id `{tok}`"))
            })
            .collect(),
    }
}
