//! End-to-end checks of the command-line surface: error paths, overwrite
//! protection, paired-seed echoes and derived-file consistency.

use cvrp_loc::aos::PolicyParams;
use cvrp_loc::instance::UniformSpec;
use cvrp_loc::loc::parse_loc_csv;
use cvrp_loc::ops::OperatorId;
use cvrp_loc_harness::experiments::{
    cmd_compare, cmd_gen, cmd_loc_sim, cmd_sample_loc, CompareArgs, GenArgs, InstanceFormat,
    InstanceSource, LocSimArgs, SampleLocArgs,
};
use std::path::{Path, PathBuf};
use std::process::Command;

fn tmp(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    if dir.exists() {
        std::fs::remove_dir_all(&dir).unwrap();
    }
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn cvrploc(dir: &Path, args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_cvrploc"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn small_spec() -> UniformSpec {
    UniformSpec {
        n_customers: 10,
        capacity: 15.0,
        demand_lo: 1,
        demand_hi: 5,
    }
}

#[test]
fn gen_rejects_zero_customers() {
    let dir = tmp("cli-gen-zero");
    let out = cvrploc(
        &dir,
        &["gen", "--out-dir", "x", "--count", "1", "--customers", "0"],
    );
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("n_customers"), "stderr was: {stderr}");
}

#[test]
fn gen_refuses_to_overwrite_without_force() {
    let dir = tmp("cli-gen-overwrite");
    let args = GenArgs {
        out_dir: dir.join("inst"),
        count: 1,
        spec: small_spec(),
        seed: 1,
        force: false,
        format: InstanceFormat::Cvrplib,
    };
    let first = cmd_gen(&args).unwrap();
    assert_eq!(first.len(), 1);
    let err = cmd_gen(&args).unwrap_err().to_string();
    assert!(err.contains("--force"), "error was: {err}");
    let mut forced = args;
    forced.force = true;
    cmd_gen(&forced).unwrap();
}

#[test]
fn gen_json_round_trips_through_load() {
    let dir = tmp("cli-gen-json");
    let args = GenArgs {
        out_dir: dir.clone(),
        count: 1,
        spec: small_spec(),
        seed: 4,
        force: false,
        format: InstanceFormat::Json,
    };
    let paths = cmd_gen(&args).unwrap();
    let inst = cvrp_loc::instance::load_instance(&paths[0]).unwrap();
    assert_eq!(inst.n_customers(), 10);
}

#[test]
fn gen_reruns_are_byte_identical_and_files_reload() {
    let dir = tmp("cli-gen-rerun");
    let mut args = GenArgs {
        out_dir: dir,
        count: 5,
        spec: small_spec(),
        seed: 3,
        force: false,
        format: InstanceFormat::Cvrplib,
    };
    let first = cmd_gen(&args).unwrap();
    assert_eq!(first.len(), 5);
    let before: Vec<Vec<u8>> = first.iter().map(|p| std::fs::read(p).unwrap()).collect();
    args.force = true;
    let second = cmd_gen(&args).unwrap();
    for (path, old) in second.iter().zip(&before) {
        assert_eq!(&std::fs::read(path).unwrap(), old, "rerun changed {path:?}");
        // parse-back oracle: every emitted file reloads as a valid instance
        let inst = cvrp_loc::instance::load_instance(path).unwrap();
        assert_eq!(inst.n_customers(), 10);
    }
}

#[test]
fn compare_requires_a_matrix_for_loc_policies() {
    let dir = tmp("cli-compare-noloc");
    let args = CompareArgs {
        source: InstanceSource::Generated {
            count: 2,
            spec: small_spec(),
            seed: 9,
        },
        policies: vec!["pm".parse().unwrap(), "pm-loc".parse().unwrap()],
        repeats: 1,
        base_seed: 1,
        budget: Some(20),
        loc: None,
        params: PolicyParams::default(),
        perturbation_strength: 5,
        out_dir: dir,
        jobs: 1,
        distance_mode: cvrp_loc::solution::DistanceMode::Exact,
        ops: OperatorId::full_set(),
    };
    let err = cmd_compare(&args).unwrap_err().to_string();
    assert!(err.contains("correlation matrix"), "error was: {err}");
}

#[test]
fn self_comparison_is_degenerate_with_p_one() {
    let dir = tmp("cli-compare-self");
    let args = CompareArgs {
        source: InstanceSource::Generated {
            count: 3,
            spec: small_spec(),
            seed: 5,
        },
        policies: vec!["pm".parse().unwrap(), "pm".parse().unwrap()],
        repeats: 2,
        base_seed: 11,
        budget: Some(60),
        loc: None,
        params: PolicyParams::default(),
        perturbation_strength: 5,
        out_dir: dir,
        jobs: 2,
        distance_mode: cvrp_loc::solution::DistanceMode::Exact,
        ops: OperatorId::full_set(),
    };
    let report = cmd_compare(&args).unwrap();
    let pair = &report.pairs[0];
    assert!(pair.distance_degenerate);
    assert_eq!(pair.distance_p_value, 1.0);
    assert_eq!(pair.wins_a + pair.wins_b, 0);
    assert_eq!(pair.ties, 3);
}

#[test]
fn paired_cells_share_seeds_across_policies() {
    let dir = tmp("cli-compare-paired");
    let args = CompareArgs {
        source: InstanceSource::Generated {
            count: 2,
            spec: small_spec(),
            seed: 21,
        },
        policies: vec!["uniform".parse().unwrap(), "ap".parse().unwrap()],
        repeats: 2,
        base_seed: 33,
        budget: Some(40),
        loc: None,
        params: PolicyParams::default(),
        perturbation_strength: 5,
        out_dir: dir.clone(),
        jobs: 1,
        distance_mode: cvrp_loc::solution::DistanceMode::Exact,
        ops: OperatorId::full_set(),
    };
    let report = cmd_compare(&args).unwrap();
    for instance in &report.instances {
        for repeat in 0..args.repeats {
            let seeds: Vec<u64> = report
                .cells
                .iter()
                .filter(|c| &c.instance == instance && c.repeat == repeat)
                .map(|c| c.seed)
                .collect();
            assert_eq!(seeds.len(), 2);
            assert_eq!(seeds[0], seeds[1], "seed pairing broken");
        }
    }
    // the seed echo in cells.csv carries the same pairing
    let csv = std::fs::read_to_string(dir.join("cells.csv")).unwrap();
    assert!(csv.contains("# cell_seeds ="));
}

#[test]
fn sample_loc_mean_matrix_is_the_elementwise_average() {
    let dir = tmp("cli-sample-mean");
    let inst_dir = tmp("cli-sample-mean-inst");
    let gen = GenArgs {
        out_dir: inst_dir,
        count: 1,
        spec: small_spec(),
        seed: 7,
        force: false,
        format: InstanceFormat::Cvrplib,
    };
    let inst_path = cmd_gen(&gen).unwrap().remove(0);
    let args = SampleLocArgs {
        instance: inst_path,
        trials: 3,
        max_ite: Some(30),
        seed: 2,
        out_dir: dir.clone(),
        ops: OperatorId::full_set(),
        distance_mode: cvrp_loc::solution::DistanceMode::Exact,
    };
    let summary = cmd_sample_loc(&args).unwrap();
    assert_eq!(summary.trials, 3);
    assert!(summary.pairwise_similarity_mean.is_some());

    let mut trials = Vec::new();
    for name in &summary.matrix_files {
        let (m, _) = parse_loc_csv(&std::fs::read_to_string(dir.join(name)).unwrap()).unwrap();
        trials.push(m);
    }
    let (mean, _) =
        parse_loc_csv(&std::fs::read_to_string(dir.join("mean.loc.csv")).unwrap()).unwrap();
    for i in 0..mean.dim() {
        for j in 0..mean.dim() {
            let avg: f64 = trials.iter().map(|m| m.get(i, j)).sum::<f64>() / trials.len() as f64;
            assert!(
                (mean.get(i, j) - avg).abs() <= 1e-12,
                "mean matrix off at ({i},{j})"
            );
        }
    }
}

#[test]
fn loc_sim_table_is_symmetric_with_unit_self_similarity() {
    let dir = tmp("cli-locsim");
    let inst_dir = tmp("cli-locsim-inst");
    let gen = GenArgs {
        out_dir: inst_dir,
        count: 1,
        spec: small_spec(),
        seed: 13,
        force: false,
        format: InstanceFormat::Cvrplib,
    };
    let inst_path = cmd_gen(&gen).unwrap().remove(0);
    let sample = SampleLocArgs {
        instance: inst_path,
        trials: 2,
        max_ite: Some(30),
        seed: 6,
        out_dir: dir.clone(),
        ops: OperatorId::full_set(),
        distance_mode: cvrp_loc::solution::DistanceMode::Exact,
    };
    cmd_sample_loc(&sample).unwrap();
    let args = LocSimArgs {
        matrices: vec![
            dir.join("trial_000.loc.csv"),
            dir.join("trial_001.loc.csv"),
            dir.join("trial_000.loc.csv"),
        ],
        out: Some(dir.join("sim.csv")),
    };
    let table = cmd_loc_sim(&args).unwrap();
    let n = table.names.len();
    for i in 0..n {
        for j in 0..n {
            assert!((table.values[i][j] - table.values[j][i]).abs() < 1e-12);
        }
    }
    // files 0 and 2 are the same matrix
    assert!((table.values[0][2] - 1.0).abs() < 1e-12);
    assert!(dir.join("sim.csv").exists());
}

#[test]
fn loc_sim_rejects_mismatched_dimensions() {
    let dir = tmp("cli-locsim-dim");
    std::fs::write(dir.join("a.csv"), "1,2\n1.0,0.0\n0.0,1.0\n").unwrap();
    std::fs::write(
        dir.join("b.csv"),
        "1,2,3\n1.0,0.0,0.0\n0.0,1.0,0.0\n0.0,0.0,1.0\n",
    )
    .unwrap();
    let args = LocSimArgs {
        matrices: vec![dir.join("a.csv"), dir.join("b.csv")],
        out: None,
    };
    assert!(cmd_loc_sim(&args).is_err());
}

#[test]
fn optimize_reports_loc_dimension_mismatch() {
    let dir = tmp("cli-opt-dim");
    let gen = GenArgs {
        out_dir: dir.clone(),
        count: 1,
        spec: small_spec(),
        seed: 3,
        force: false,
        format: InstanceFormat::Cvrplib,
    };
    let inst_path = cmd_gen(&gen).unwrap().remove(0);
    std::fs::write(dir.join("small.loc.csv"), "1,2\n1.0,0.0\n0.0,1.0\n").unwrap();
    let out = cvrploc(
        &dir,
        &[
            "optimize",
            "--instance",
            inst_path.to_str().unwrap(),
            "--policy",
            "pm-loc",
            "--loc",
            dir.join("small.loc.csv").to_str().unwrap(),
            "--budget",
            "10",
            "--seed",
            "1",
            "--out-dir",
            dir.join("out").to_str().unwrap(),
        ],
    );
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("2x2"), "stderr was: {stderr}");
}
