//! Deterministic CSV rendering for traces, comparison cells and similarity
//! tables. Floats print at 17 significant digits so identical runs produce
//! byte-identical files; result CSVs open with `#`-prefixed lines echoing
//! the resolved configuration.

use crate::config::Config;
use crate::experiments::{CellSummary, SimTable};
use cvrp_loc::ops::OperatorId;
use cvrp_loc::search::SearchTrace;

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn config_comment(echo: &Config) -> String {
    let mut out = String::new();
    for (k, v) in echo.entries() {
        out.push_str(&format!("# {k} = {v}\n"));
    }
    out
}

/// One row per iteration: ite, op, reward, trapped, distance.
pub fn trace_csv(trace: &SearchTrace, echo: &Config) -> String {
    let mut out = config_comment(echo);
    out.push_str("ite,op,reward,trapped,distance\n");
    for rec in &trace.records {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            rec.ite,
            rec.op,
            fmt_f64(rec.reward),
            u8::from(rec.trapped),
            fmt_f64(rec.distance),
        ));
    }
    out
}

/// One row per (instance, policy, repeat) cell, in grid order.
pub fn cells_csv(cells: &[CellSummary], echo: &Config) -> String {
    let mut out = config_comment(echo);
    out.push_str(
        "instance_idx,instance,policy,repeat,seed,best_distance,final_distance,trapped_after_trapped,perturbations\n",
    );
    for c in cells {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            c.instance_idx,
            c.instance,
            c.policy,
            c.repeat,
            c.seed,
            fmt_f64(c.best_distance),
            fmt_f64(c.final_distance),
            c.trapped_after_trapped_count,
            c.perturbation_count,
        ));
    }
    out
}

/// Symmetric matrix-file similarity table with a name header column.
pub fn sim_table_csv(table: &SimTable) -> String {
    let mut out = String::from("matrix");
    for name in &table.names {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for (name, row) in table.names.iter().zip(&table.values) {
        out.push_str(name);
        for v in row {
            out.push(',');
            out.push_str(&fmt_f64(*v));
        }
        out.push('\n');
    }
    out
}

/// Machine-readable operator catalog: id, name, route arity, segment
/// lengths.
pub fn ops_catalog_csv(ops: &[OperatorId]) -> String {
    let mut out = String::from("id,name,routes,lengths\n");
    for op in ops {
        out.push_str(&format!(
            "{},{},{},{}\n",
            op,
            op.name(),
            op.arity(),
            op.segment_lengths(),
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_lists_all_seventeen_operators() {
        let csv = ops_catalog_csv(&OperatorId::full_set());
        assert_eq!(csv.lines().count(), 18);
        assert!(csv.contains("1,2opt,1,2..\n"));
        assert!(csv.contains("11,cyclic-exchange,3,1|1|1\n"));
        assert!(csv.contains("17,asymmetric-exchange,2,3|2\n"));
    }

    #[test]
    fn float_format_round_trips() {
        for v in [0.1, 1.0 / 3.0, 12345.6789, -0.0, 1e-300] {
            let s = fmt_f64(v);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
    }
}
