//! CVRP instances: representation, CVRPLIB-style text I/O, JSON I/O and
//! seeded uniform generation.

use crate::error::InstanceError;
use crate::rng::substream;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// A Euclidean CVRP instance: one depot, customers with demands, a fleet of
/// identical vehicles of fixed capacity. Immutable after construction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Instance {
    name: String,
    depot: usize,
    coords: Vec<(f64, f64)>,
    demands: Vec<f64>,
    capacity: f64,
    min_vehicles: Option<usize>,
}

impl Instance {
    pub fn new(
        name: impl Into<String>,
        depot: usize,
        coords: Vec<(f64, f64)>,
        demands: Vec<f64>,
        capacity: f64,
        min_vehicles: Option<usize>,
    ) -> Result<Self, InstanceError> {
        let inst = Instance {
            name: name.into(),
            depot,
            coords,
            demands,
            capacity,
            min_vehicles,
        };
        inst.validate()?;
        Ok(inst)
    }

    fn validate(&self) -> Result<(), InstanceError> {
        let err = |m: String| Err(InstanceError::Invalid(m));
        if self.coords.len() != self.demands.len() {
            return err(format!(
                "{} coordinates vs {} demands",
                self.coords.len(),
                self.demands.len()
            ));
        }
        if self.coords.len() < 2 {
            return err("need a depot and at least one customer".into());
        }
        if self.depot >= self.coords.len() {
            return err(format!("depot index {} out of range", self.depot));
        }
        if !self.capacity.is_finite() || self.capacity <= 0.0 {
            return err(format!("capacity {} must be positive", self.capacity));
        }
        if self.demands[self.depot] != 0.0 {
            return err(format!(
                "depot demand must be 0, got {}",
                self.demands[self.depot]
            ));
        }
        for (i, &d) in self.demands.iter().enumerate() {
            if i == self.depot {
                continue;
            }
            if !d.is_finite() || d < 0.0 {
                return err(format!("node {i} has invalid demand {d}"));
            }
            if d > self.capacity {
                return err(format!(
                    "node {i} demand {d} exceeds capacity {}",
                    self.capacity
                ));
            }
        }
        for (i, &(x, y)) in self.coords.iter().enumerate() {
            if !x.is_finite() || !y.is_finite() {
                return err(format!("node {i} has non-finite coordinates"));
            }
        }
        if let Some(m) = self.min_vehicles {
            if m == 0 {
                return err("min_vehicles must be positive".into());
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn depot(&self) -> usize {
        self.depot
    }

    /// Total node count, depot included.
    pub fn n_nodes(&self) -> usize {
        self.coords.len()
    }

    pub fn n_customers(&self) -> usize {
        self.coords.len() - 1
    }

    pub fn coord(&self, node: usize) -> (f64, f64) {
        self.coords[node]
    }

    pub fn coords(&self) -> &[(f64, f64)] {
        &self.coords
    }

    pub fn demand(&self, node: usize) -> f64 {
        self.demands[node]
    }

    pub fn demands(&self) -> &[f64] {
        &self.demands
    }

    pub fn capacity(&self) -> f64 {
        self.capacity
    }

    pub fn min_vehicles(&self) -> Option<usize> {
        self.min_vehicles
    }

    /// All node indices except the depot.
    pub fn customers(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.coords.len()).filter(move |&i| i != self.depot)
    }

    pub fn total_demand(&self) -> f64 {
        self.demands.iter().sum()
    }

    /// Smallest fleet size that could feasibly carry the total demand,
    /// honouring the instance hint when present.
    pub fn fleet_lower_bound(&self) -> usize {
        let by_demand = (self.total_demand() / self.capacity).ceil() as usize;
        self.min_vehicles.unwrap_or(0).max(by_demand).max(1)
    }
}

/// Generator parameters for uniform random instances. Captured in result
/// files so every generated instance is reproducible from its record.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct UniformSpec {
    pub n_customers: usize,
    pub capacity: f64,
    pub demand_lo: u32,
    pub demand_hi: u32,
}

impl Default for UniformSpec {
    fn default() -> Self {
        UniformSpec {
            n_customers: 100,
            capacity: 50.0,
            demand_lo: 1,
            demand_hi: 9,
        }
    }
}

/// Generate an instance with depot and customers placed uniformly in the
/// unit square and integer demands uniform in `[demand_lo, demand_hi]`.
/// Deterministic for a fixed seed.
pub fn generate_uniform_instance(spec: &UniformSpec, seed: u64) -> Result<Instance, InstanceError> {
    if spec.n_customers < 1 {
        return Err(InstanceError::InvalidParameter(
            "n_customers must be at least 1".into(),
        ));
    }
    if !spec.capacity.is_finite() || spec.capacity <= 0.0 {
        return Err(InstanceError::InvalidParameter(
            "capacity must be positive".into(),
        ));
    }
    if spec.demand_lo < 1 || spec.demand_hi < spec.demand_lo {
        return Err(InstanceError::InvalidParameter(format!(
            "demand range [{}, {}] is invalid",
            spec.demand_lo, spec.demand_hi
        )));
    }
    if f64::from(spec.demand_hi) > spec.capacity {
        return Err(InstanceError::InvalidParameter(format!(
            "demand_hi {} exceeds capacity {}",
            spec.demand_hi, spec.capacity
        )));
    }

    let mut rng = substream(seed, "instance-gen");
    let n = spec.n_customers + 1;
    let mut coords = Vec::with_capacity(n);
    let mut demands = Vec::with_capacity(n);
    coords.push((rng.random::<f64>(), rng.random::<f64>()));
    demands.push(0.0);
    for _ in 0..spec.n_customers {
        coords.push((rng.random::<f64>(), rng.random::<f64>()));
        demands.push(f64::from(rng.random_range(spec.demand_lo..=spec.demand_hi)));
    }
    Instance::new(
        format!("unirand-n{}-s{}", spec.n_customers, seed),
        0,
        coords,
        demands,
        spec.capacity,
        None,
    )
}

/// Parse the CVRPLIB/TSPLIB keyword format (EUC_2D only). Node ids are
/// 1-based in the file and re-based to 0 internally.
pub fn parse_cvrplib(text: &str) -> Result<Instance, InstanceError> {
    let mut name: Option<String> = None;
    let mut dimension: Option<(usize, usize)> = None; // (value, line)
    let mut capacity: Option<(f64, usize)> = None;
    let mut weight_type: Option<(String, usize)> = None;
    let mut coords: Option<(Vec<(f64, f64)>, usize)> = None;
    let mut demands: Option<(Vec<f64>, usize)> = None;
    let mut depot: Option<usize> = None;
    let mut saw_depot_section = false;

    let malformed = |message: String, line: usize| InstanceError::Malformed { message, line };

    let lines: Vec<&str> = text.lines().collect();
    let mut i = 0;
    while i < lines.len() {
        let lineno = i + 1;
        let line = lines[i].trim();
        i += 1;
        if line.is_empty() {
            continue;
        }
        let (key, value) = match line.split_once(':') {
            Some((k, v)) => (k.trim().to_ascii_uppercase(), v.trim().to_string()),
            None => (line.to_ascii_uppercase(), String::new()),
        };
        match key.as_str() {
            "NAME" => name = Some(value),
            "DIMENSION" => {
                let d: usize = value
                    .parse()
                    .map_err(|_| malformed(format!("bad DIMENSION `{value}`"), lineno))?;
                dimension = Some((d, lineno));
            }
            "CAPACITY" => {
                let c: f64 = value
                    .parse()
                    .map_err(|_| malformed(format!("bad CAPACITY `{value}`"), lineno))?;
                capacity = Some((c, lineno));
            }
            "EDGE_WEIGHT_TYPE" => weight_type = Some((value, lineno)),
            "NODE_COORD_SECTION" => {
                let dim = require_dimension(&dimension, lineno)?;
                let mut cs = Vec::with_capacity(dim);
                while i < lines.len() && cs.len() < dim {
                    let entry_no = i + 1;
                    let entry = lines[i].trim();
                    if entry.is_empty() {
                        i += 1;
                        continue;
                    }
                    if entry
                        .chars()
                        .next()
                        .is_some_and(|c| c.is_ascii_alphabetic())
                    {
                        break; // next keyword; length checked below
                    }
                    let mut parts = entry.split_whitespace();
                    let _id = parts.next();
                    let x: f64 = parse_num(parts.next(), "x coordinate", entry_no)?;
                    let y: f64 = parse_num(parts.next(), "y coordinate", entry_no)?;
                    cs.push((x, y));
                    i += 1;
                }
                coords = Some((cs, lineno));
            }
            "DEMAND_SECTION" => {
                let dim = require_dimension(&dimension, lineno)?;
                let mut ds = Vec::with_capacity(dim);
                while i < lines.len() && ds.len() < dim {
                    let entry_no = i + 1;
                    let entry = lines[i].trim();
                    if entry.is_empty() {
                        i += 1;
                        continue;
                    }
                    if entry
                        .chars()
                        .next()
                        .is_some_and(|c| c.is_ascii_alphabetic())
                    {
                        break;
                    }
                    let mut parts = entry.split_whitespace();
                    let _id = parts.next();
                    let d: f64 = parse_num(parts.next(), "demand", entry_no)?;
                    ds.push(d);
                    i += 1;
                }
                demands = Some((ds, lineno));
            }
            "DEPOT_SECTION" => {
                saw_depot_section = true;
                while i < lines.len() {
                    let entry_no = i + 1;
                    let entry = lines[i].trim();
                    if entry.is_empty() {
                        i += 1;
                        continue;
                    }
                    if entry == "-1" || entry.eq_ignore_ascii_case("EOF") {
                        break;
                    }
                    let id: i64 = entry
                        .parse()
                        .map_err(|_| malformed(format!("bad depot id `{entry}`"), entry_no))?;
                    if id < 1 {
                        return Err(malformed(
                            format!("depot id {id} is not positive"),
                            entry_no,
                        ));
                    }
                    if depot.is_some() {
                        return Err(malformed(
                            "multiple depots are not supported".into(),
                            entry_no,
                        ));
                    }
                    depot = Some((id - 1) as usize);
                    i += 1;
                }
            }
            "EOF" => break,
            // TYPE, COMMENT, VEHICLES and friends carry no structure we need.
            _ => {}
        }
    }

    let end = lines.len();
    let name = name.ok_or(InstanceError::MissingKeyword {
        keyword: "NAME",
        line: end,
    })?;
    let (dim, dim_line) = dimension.ok_or(InstanceError::MissingKeyword {
        keyword: "DIMENSION",
        line: end,
    })?;
    let (cap, cap_line) = capacity.ok_or(InstanceError::MissingKeyword {
        keyword: "CAPACITY",
        line: end,
    })?;
    let (wt, wt_line) = weight_type.ok_or(InstanceError::MissingKeyword {
        keyword: "EDGE_WEIGHT_TYPE",
        line: end,
    })?;
    if !wt.eq_ignore_ascii_case("EUC_2D") {
        return Err(InstanceError::UnsupportedWeightType {
            found: wt,
            line: wt_line,
        });
    }
    let (coords, coord_line) = coords.ok_or(InstanceError::MissingKeyword {
        keyword: "NODE_COORD_SECTION",
        line: end,
    })?;
    let (demands, demand_line) = demands.ok_or(InstanceError::MissingKeyword {
        keyword: "DEMAND_SECTION",
        line: end,
    })?;
    if !saw_depot_section {
        return Err(InstanceError::MissingKeyword {
            keyword: "DEPOT_SECTION",
            line: end,
        });
    }
    let depot = depot.ok_or(InstanceError::Malformed {
        message: "DEPOT_SECTION names no depot".into(),
        line: end,
    })?;
    if coords.len() != dim {
        return Err(InstanceError::DimensionMismatch {
            section: "NODE_COORD_SECTION",
            expected: dim,
            got: coords.len(),
            line: coord_line,
        });
    }
    if demands.len() != dim {
        return Err(InstanceError::DimensionMismatch {
            section: "DEMAND_SECTION",
            expected: dim,
            got: demands.len(),
            line: demand_line,
        });
    }
    if depot >= dim {
        return Err(InstanceError::Malformed {
            message: format!("depot id {} outside DIMENSION {dim}", depot + 1),
            line: dim_line,
        });
    }
    for (node, &d) in demands.iter().enumerate() {
        if node != depot && d > cap {
            return Err(InstanceError::DemandExceedsCapacity {
                node: node + 1,
                demand: d,
                capacity: cap,
                line: cap_line,
            });
        }
    }

    let min_vehicles = parse_k_suffix(&name);
    Instance::new(name, depot, coords, demands, cap, min_vehicles)
}

fn require_dimension(
    dimension: &Option<(usize, usize)>,
    line: usize,
) -> Result<usize, InstanceError> {
    dimension
        .map(|(d, _)| d)
        .ok_or(InstanceError::MissingKeyword {
            keyword: "DIMENSION",
            line,
        })
}

fn parse_num(field: Option<&str>, what: &str, line: usize) -> Result<f64, InstanceError> {
    let raw = field.ok_or_else(|| InstanceError::Malformed {
        message: format!("missing {what}"),
        line,
    })?;
    raw.parse().map_err(|_| InstanceError::Malformed {
        message: format!("bad {what} `{raw}`"),
        line,
    })
}

/// `Loggi-n401-k23` style names carry a fleet-size hint after the final `-k`.
fn parse_k_suffix(name: &str) -> Option<usize> {
    let idx = name.rfind("-k")?;
    let tail = &name[idx + 2..];
    if tail.is_empty() || !tail.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    tail.parse().ok().filter(|&k| k > 0)
}

/// Render an instance in the same keyword format `parse_cvrplib` reads.
/// Numbers use the shortest representation that parses back exactly, so a
/// write/parse cycle reproduces every field bit for bit.
pub fn write_cvrplib(inst: &Instance) -> String {
    let mut out = String::new();
    out.push_str(&format!("NAME : {}\n", inst.name()));
    out.push_str("TYPE : CVRP\n");
    out.push_str(&format!("DIMENSION : {}\n", inst.n_nodes()));
    out.push_str("EDGE_WEIGHT_TYPE : EUC_2D\n");
    out.push_str(&format!("CAPACITY : {}\n", inst.capacity()));
    out.push_str("NODE_COORD_SECTION\n");
    for (i, &(x, y)) in inst.coords().iter().enumerate() {
        out.push_str(&format!("{} {} {}\n", i + 1, x, y));
    }
    out.push_str("DEMAND_SECTION\n");
    for (i, &d) in inst.demands().iter().enumerate() {
        out.push_str(&format!("{} {}\n", i + 1, d));
    }
    out.push_str("DEPOT_SECTION\n");
    out.push_str(&format!("{}\n", inst.depot() + 1));
    out.push_str("-1\nEOF\n");
    out
}

/// JSON form mirrors the struct fields one-to-one in declaration order.
pub fn write_json(inst: &Instance) -> Result<String, InstanceError> {
    Ok(serde_json::to_string_pretty(inst)?)
}

pub fn parse_json(text: &str) -> Result<Instance, InstanceError> {
    let inst: Instance = serde_json::from_str(text)?;
    inst.validate()?;
    Ok(inst)
}

/// Load an instance from a path, dispatching on the `.json` extension.
pub fn load_instance(path: &std::path::Path) -> Result<Instance, InstanceError> {
    let text = std::fs::read_to_string(path)?;
    if path.extension().is_some_and(|e| e == "json") {
        parse_json(&text)
    } else {
        parse_cvrplib(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIXTURE: &str = "\
NAME : tiny5
TYPE : CVRP
DIMENSION : 5
EDGE_WEIGHT_TYPE : EUC_2D
CAPACITY : 10
NODE_COORD_SECTION
1 0 0
2 1 0
3 0 1
4 1 1
5 2 2
DEMAND_SECTION
1 0
2 1
3 1
4 1
5 1
DEPOT_SECTION
1
-1
EOF
";

    #[test]
    fn parses_hand_written_fixture() {
        let inst = parse_cvrplib(FIXTURE).unwrap();
        assert_eq!(inst.name(), "tiny5");
        assert_eq!(inst.n_customers(), 4);
        assert_eq!(inst.capacity(), 10.0);
        assert_eq!(inst.depot(), 0);
        assert_eq!(inst.demand(4), 1.0);
        assert_eq!(inst.coord(4), (2.0, 2.0));
    }

    #[test]
    fn parses_560_node_file() {
        // Benchmark-shaped file: 560 nodes, fleet hint in the name.
        let mut text = String::from(
            "NAME : Li-21-k10\nTYPE : CVRP\nDIMENSION : 560\nEDGE_WEIGHT_TYPE : EUC_2D\nCAPACITY : 1200\nNODE_COORD_SECTION\n",
        );
        for i in 0..560 {
            text.push_str(&format!("{} {} {}\n", i + 1, i % 40, i / 40));
        }
        text.push_str("DEMAND_SECTION\n1 0\n");
        for i in 1..560 {
            text.push_str(&format!("{} {}\n", i + 1, 10));
        }
        text.push_str("DEPOT_SECTION\n1\n-1\nEOF\n");
        let inst = parse_cvrplib(&text).unwrap();
        assert_eq!(inst.n_nodes(), 560);
        assert_eq!(inst.min_vehicles(), Some(10));
    }

    #[test]
    fn missing_demand_section_is_reported() {
        let text = FIXTURE.replace("DEMAND_SECTION", "COMMENT");
        let err = parse_cvrplib(&text).unwrap_err();
        match err {
            InstanceError::MissingKeyword { keyword, .. } => assert_eq!(keyword, "DEMAND_SECTION"),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn non_euclidean_weight_type_is_rejected() {
        let text = FIXTURE.replace("EUC_2D", "EXPLICIT");
        let err = parse_cvrplib(&text).unwrap_err();
        assert!(matches!(err, InstanceError::UnsupportedWeightType { .. }));
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let text = FIXTURE.replace("5 2 2\n", "");
        let err = parse_cvrplib(&text).unwrap_err();
        match err {
            InstanceError::DimensionMismatch {
                section,
                expected,
                got,
                ..
            } => {
                assert_eq!(section, "NODE_COORD_SECTION");
                assert_eq!((expected, got), (5, 4));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn demand_over_capacity_is_rejected() {
        let text = FIXTURE.replace("5 1\n", "5 11\n");
        let err = parse_cvrplib(&text).unwrap_err();
        assert!(matches!(
            err,
            InstanceError::DemandExceedsCapacity { node: 5, .. }
        ));
    }

    #[test]
    fn generator_is_deterministic() {
        let spec = UniformSpec {
            n_customers: 100,
            capacity: 50.0,
            demand_lo: 1,
            demand_hi: 9,
        };
        let a = generate_uniform_instance(&spec, 7).unwrap();
        let b = generate_uniform_instance(&spec, 7).unwrap();
        assert_eq!(a.coords(), b.coords());
        assert_eq!(a.demands(), b.demands());
        assert_eq!(a.name(), b.name());
    }

    #[test]
    fn generator_minimal_case() {
        let spec = UniformSpec {
            n_customers: 1,
            capacity: 10.0,
            demand_lo: 1,
            demand_hi: 1,
        };
        let inst = generate_uniform_instance(&spec, 0).unwrap();
        assert_eq!(inst.n_customers(), 1);
        assert_eq!(inst.demand(1), 1.0);
        assert_eq!(inst.demand(inst.depot()), 0.0);
    }

    #[test]
    fn generated_fields_stay_in_range() {
        let spec = UniformSpec {
            n_customers: 100,
            capacity: 50.0,
            demand_lo: 1,
            demand_hi: 9,
        };
        let inst = generate_uniform_instance(&spec, 7).unwrap();
        for &(x, y) in inst.coords() {
            assert!((0.0..=1.0).contains(&x) && (0.0..=1.0).contains(&y));
        }
        for node in inst.customers() {
            let d = inst.demand(node);
            assert!((1.0..=9.0).contains(&d) && d.fract() == 0.0);
        }
    }

    #[test]
    fn generator_rejects_bad_parameters() {
        let cases = [
            UniformSpec {
                n_customers: 0,
                ..Default::default()
            },
            UniformSpec {
                demand_hi: 0,
                ..Default::default()
            },
            // demand range exceeding capacity
            UniformSpec {
                demand_hi: 99,
                ..Default::default()
            },
        ];
        for spec in cases {
            assert!(generate_uniform_instance(&spec, 1).is_err());
        }
    }

    #[test]
    fn cvrplib_round_trip_is_exact() {
        let inst = generate_uniform_instance(&UniformSpec::default(), 3).unwrap();
        let text = write_cvrplib(&inst);
        let back = parse_cvrplib(&text).unwrap();
        assert_eq!(back.name(), inst.name());
        assert_eq!(back.depot(), inst.depot());
        assert_eq!(back.coords(), inst.coords());
        assert_eq!(back.demands(), inst.demands());
        assert_eq!(back.capacity(), inst.capacity());
    }

    #[test]
    fn json_round_trip_is_exact() {
        let inst = generate_uniform_instance(&UniformSpec::default(), 11).unwrap();
        let text = write_json(&inst).unwrap();
        let back = parse_json(&text).unwrap();
        assert_eq!(back.coords(), inst.coords());
        assert_eq!(back.demands(), inst.demands());
    }

    #[test]
    fn fleet_lower_bound_uses_hint_and_demand() {
        let inst = Instance::new(
            "t",
            0,
            vec![(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)],
            vec![0.0, 3.0, 3.0],
            4.0,
            None,
        )
        .unwrap();
        assert_eq!(inst.fleet_lower_bound(), 2);
    }
}
