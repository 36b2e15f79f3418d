//! Routing scenarios: time grid, parkable nodes, road distances, fault islands
//! and the MER fleet, plus the derived integer travel-time matrix.
//!
//! Scenarios are read from JSON. Distances are given either as a full matrix or
//! as undirected road edges, in which case all-pairs shortest paths are used.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::path::Path;

use petgraph::algo::floyd_warshall;
use petgraph::graph::UnGraph;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed scenario: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
}

fn invalid(path: impl Into<String>, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid {
        path: path.into(),
        message: message.into(),
    }
}

/// Uniform discretization of the scheduling horizon into `num_spans` spans.
/// The index set is `{0, 1, ..., num_spans}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub span_minutes: u32,
    pub num_spans: u32,
}

impl TimeGrid {
    pub fn new(span_minutes: u32, num_spans: u32) -> Result<Self, ScenarioError> {
        if span_minutes == 0 {
            return Err(invalid("time_grid.span_minutes", "must be at least 1"));
        }
        if num_spans == 0 {
            return Err(invalid("time_grid.num_spans", "must be at least 1"));
        }
        Ok(TimeGrid {
            span_minutes,
            num_spans,
        })
    }

    pub fn horizon_minutes(&self) -> u64 {
        u64::from(self.span_minutes) * u64::from(self.num_spans)
    }

    /// Span length in hours, the energy multiplier of one span.
    pub fn span_hours(&self) -> f64 {
        f64::from(self.span_minutes) / 60.0
    }

    /// Number of time points, `num_spans + 1`.
    pub fn num_points(&self) -> usize {
        self.num_spans as usize + 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistanceUnit {
    #[default]
    Ft,
    M,
    Km,
    Mi,
}

impl fmt::Display for DistanceUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            DistanceUnit::Ft => "ft",
            DistanceUnit::M => "m",
            DistanceUnit::Km => "km",
            DistanceUnit::Mi => "mi",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: u32,
    pub island: Option<u32>,
    pub interrupted_load_kw: f64,
    pub weight: f64,
}

/// Road distances between every ordered pair of parkable nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct RoadDistances {
    rows: Vec<Vec<f64>>,
}

impl RoadDistances {
    pub fn from_matrix(rows: Vec<Vec<f64>>) -> Result<Self, ScenarioError> {
        let n = rows.len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(invalid(
                    format!("distances.matrix[{i}]"),
                    format!("expected {n} entries, found {}", row.len()),
                ));
            }
            for (k, &d) in row.iter().enumerate() {
                if !d.is_finite() || d < 0.0 {
                    return Err(invalid(
                        format!("distances.matrix[{i}][{k}]"),
                        format!("distance must be finite and nonnegative, got {d}"),
                    ));
                }
                if i == k && d != 0.0 {
                    return Err(invalid(
                        format!("distances.matrix[{i}][{k}]"),
                        "diagonal entries must be 0",
                    ));
                }
            }
        }
        Ok(RoadDistances { rows })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn get(&self, from: usize, to: usize) -> f64 {
        self.rows[from][to]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }
}

/// Integer travel times in spans. `T[i][i] = 0` and `T[i][k] >= 1` otherwise.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TravelTimeMatrix {
    n: usize,
    spans: Vec<u32>,
}

impl TravelTimeMatrix {
    pub fn from_rows(rows: &[Vec<u32>]) -> Result<Self, ScenarioError> {
        let n = rows.len();
        let mut spans = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(invalid(
                    format!("travel_times[{i}]"),
                    format!("expected {n} entries, found {}", row.len()),
                ));
            }
            for (k, &t) in row.iter().enumerate() {
                if i == k && t != 0 {
                    return Err(invalid(format!("travel_times[{i}][{k}]"), "diagonal must be 0"));
                }
                if i != k && t == 0 {
                    return Err(invalid(
                        format!("travel_times[{i}][{k}]"),
                        "travel between distinct nodes takes at least one span",
                    ));
                }
                spans.push(t);
            }
        }
        Ok(TravelTimeMatrix { n, spans })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, from: usize, to: usize) -> u32 {
        self.spans[from * self.n + to]
    }

    pub fn row_sum(&self, from: usize) -> u64 {
        self.spans[from * self.n..(from + 1) * self.n]
            .iter()
            .map(|&t| u64::from(t))
            .sum()
    }

    pub fn max_entry(&self) -> u32 {
        self.spans.iter().copied().max().unwrap_or(0)
    }

    pub fn rows(&self) -> Vec<Vec<u32>> {
        self.spans.chunks(self.n.max(1)).map(<[u32]>::to_vec).collect()
    }

    /// Sum over all ordered pairs.
    pub fn total(&self) -> u64 {
        self.spans.iter().map(|&t| u64::from(t)).sum()
    }

    pub fn total_squares(&self) -> u64 {
        self.spans.iter().map(|&t| u64::from(t) * u64::from(t)).sum()
    }

    /// Sum over the strict upper triangle, `i < k`.
    pub fn upper_triangle_total(&self) -> u64 {
        let mut s = 0;
        for i in 0..self.n {
            for k in i + 1..self.n {
                s += u64::from(self.get(i, k));
            }
        }
        s
    }
}

/// Converts distances to whole spans: `ceil(d / (speed * span))`, with a floor
/// of one span between distinct nodes.
///
/// Panics if `speed` is not a positive finite number.
pub fn compute_travel_times(
    distances: &RoadDistances,
    speed: f64,
    grid: TimeGrid,
) -> TravelTimeMatrix {
    assert!(
        speed.is_finite() && speed > 0.0,
        "speed must be positive, got {speed}"
    );
    let reach_per_span = speed * f64::from(grid.span_minutes);
    let n = distances.len();
    let mut spans = Vec::with_capacity(n * n);
    for i in 0..n {
        for k in 0..n {
            if i == k {
                spans.push(0);
                continue;
            }
            // absorb representation error so that exact multiples do not round up
            let ratio = distances.get(i, k) / reach_per_span;
            let whole = (ratio - 1e-9).ceil().max(1.0);
            spans.push(whole as u32);
        }
    }
    TravelTimeMatrix { n, spans }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RepairTime {
    /// Fault cleared at the start of this span; the island is de-energized for
    /// spans `0..span`.
    AtSpan(u32),
    Never,
}

impl RepairTime {
    pub fn is_outaged(&self, t: u32) -> bool {
        match *self {
            RepairTime::AtSpan(s) => t < s,
            RepairTime::Never => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Island {
    pub id: u32,
    /// Node indices (positions in `Scenario::nodes`).
    pub nodes: Vec<usize>,
    pub repair: RepairTime,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MerSpec {
    pub id: u32,
    /// Node index of the initial parking position.
    pub initial_node: usize,
    pub travel_cost_kwh_per_span: f64,
    /// Length units per minute.
    pub speed: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: Option<String>,
    pub units: DistanceUnit,
    pub grid: TimeGrid,
    pub nodes: Vec<Node>,
    pub distances: RoadDistances,
    pub islands: Vec<Island>,
    pub fleet: Vec<MerSpec>,
}

/// Reads and validates a scenario file.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario, ScenarioError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Scenario::from_json_str(&text)
}

impl Scenario {
    pub fn from_json_str(text: &str) -> Result<Self, ScenarioError> {
        let file: ScenarioFile = serde_json::from_str(text)?;
        Scenario::from_file(file)
    }

    pub fn from_file(file: ScenarioFile) -> Result<Self, ScenarioError> {
        let grid = TimeGrid::new(file.time_grid.span_minutes, file.time_grid.num_spans)?;

        if file.nodes.is_empty() {
            return Err(invalid("nodes", "at least one node is required"));
        }
        let mut index_of: HashMap<u32, usize> = HashMap::new();
        let mut nodes = Vec::with_capacity(file.nodes.len());
        for (pos, n) in file.nodes.iter().enumerate() {
            if index_of.insert(n.id, pos).is_some() {
                return Err(invalid(
                    format!("nodes[{pos}].id"),
                    format!("duplicate node id {}", n.id),
                ));
            }
            if !n.load_kw.is_finite() || n.load_kw < 0.0 {
                return Err(invalid(
                    format!("nodes[{pos}].load_kw"),
                    format!("must be finite and nonnegative, got {}", n.load_kw),
                ));
            }
            if !n.weight.is_finite() || n.weight < 0.0 {
                return Err(invalid(
                    format!("nodes[{pos}].weight"),
                    format!("must be finite and nonnegative, got {}", n.weight),
                ));
            }
            nodes.push(Node {
                id: n.id,
                island: n.island,
                interrupted_load_kw: n.load_kw,
                weight: n.weight,
            });
        }

        let distances = match (&file.distances.matrix, &file.distances.edges) {
            (Some(_), Some(_)) => {
                return Err(invalid("distances", "give either `matrix` or `edges`, not both"))
            }
            (None, None) => return Err(invalid("distances", "missing `matrix` or `edges`")),
            (Some(matrix), None) => {
                if matrix.len() != nodes.len() {
                    return Err(invalid(
                        "distances.matrix",
                        format!("expected {} rows, found {}", nodes.len(), matrix.len()),
                    ));
                }
                RoadDistances::from_matrix(matrix.clone())?
            }
            (None, Some(edges)) => shortest_path_distances(edges, &index_of)?,
        };

        let mut islands = Vec::with_capacity(file.islands.len());
        let mut island_ids = HashSet::new();
        let mut owner: HashMap<usize, u32> = HashMap::new();
        for (pos, isl) in file.islands.iter().enumerate() {
            if !island_ids.insert(isl.id) {
                return Err(invalid(
                    format!("islands[{pos}].id"),
                    format!("duplicate island id {}", isl.id),
                ));
            }
            if isl.nodes.is_empty() {
                return Err(invalid(format!("islands[{pos}].nodes"), "must not be empty"));
            }
            let mut members = Vec::with_capacity(isl.nodes.len());
            for (k, node_id) in isl.nodes.iter().enumerate() {
                let idx = *index_of.get(node_id).ok_or_else(|| {
                    invalid(
                        format!("islands[{pos}].nodes[{k}]"),
                        format!("unknown node id {node_id}"),
                    )
                })?;
                if let Some(other) = owner.insert(idx, isl.id) {
                    return Err(invalid(
                        format!("islands[{pos}].nodes[{k}]"),
                        format!("node {node_id} already belongs to island {other}"),
                    ));
                }
                members.push(idx);
            }
            let repair = match isl.repair_span {
                RepairSpanField::Span(s) => {
                    if s > grid.num_spans {
                        return Err(invalid(
                            format!("islands[{pos}].repair_span"),
                            format!("{s} exceeds the horizon of {} spans", grid.num_spans),
                        ));
                    }
                    RepairTime::AtSpan(s)
                }
                RepairSpanField::Never(_) => RepairTime::Never,
            };
            islands.push(Island {
                id: isl.id,
                nodes: members,
                repair,
            });
        }
        for (pos, n) in nodes.iter().enumerate() {
            let actual = owner.get(&pos).copied();
            if let Some(declared) = n.island {
                if actual != Some(declared) {
                    return Err(invalid(
                        format!("nodes[{pos}].island"),
                        format!(
                            "node {} declares island {declared} but is not listed in it",
                            n.id
                        ),
                    ));
                }
            }
        }
        for (pos, n) in nodes.iter_mut().enumerate() {
            n.island = owner.get(&pos).copied();
        }

        if file.fleet.is_empty() {
            return Err(invalid("fleet", "at least one MER is required"));
        }
        let mut fleet = Vec::with_capacity(file.fleet.len());
        let mut mer_ids = HashSet::new();
        for (pos, m) in file.fleet.iter().enumerate() {
            if !mer_ids.insert(m.id) {
                return Err(invalid(
                    format!("fleet[{pos}].id"),
                    format!("duplicate MER id {}", m.id),
                ));
            }
            let initial_node = *index_of.get(&m.initial_node).ok_or_else(|| {
                invalid(
                    format!("fleet[{pos}].initial_node"),
                    format!("unknown node id {}", m.initial_node),
                )
            })?;
            if !m.travel_cost_kwh_per_span.is_finite() || m.travel_cost_kwh_per_span < 0.0 {
                return Err(invalid(
                    format!("fleet[{pos}].travel_cost_kwh_per_span"),
                    "must be finite and nonnegative",
                ));
            }
            if !m.speed.is_finite() || m.speed <= 0.0 {
                return Err(invalid(format!("fleet[{pos}].speed"), "must be positive"));
            }
            fleet.push(MerSpec {
                id: m.id,
                initial_node,
                travel_cost_kwh_per_span: m.travel_cost_kwh_per_span,
                speed: m.speed,
            });
        }

        Ok(Scenario {
            name: file.name,
            units: file.units,
            grid,
            nodes,
            distances,
            islands,
            fleet,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_mers(&self) -> usize {
        self.fleet.len()
    }

    pub fn node_index(&self, id: u32) -> Option<usize> {
        self.nodes.iter().position(|n| n.id == id)
    }

    pub fn node_ids(&self) -> Vec<u32> {
        self.nodes.iter().map(|n| n.id).collect()
    }

    pub fn travel_times(&self, mer: usize) -> TravelTimeMatrix {
        compute_travel_times(&self.distances, self.fleet[mer].speed, self.grid)
    }

    /// `P_i(t)`: the node's load while its island is still faulted, else 0.
    pub fn interrupted_load(&self, node: usize, t: u32) -> f64 {
        let Some(island_id) = self.nodes[node].island else {
            return 0.0;
        };
        match self.islands.iter().find(|l| l.id == island_id) {
            Some(l) if l.repair.is_outaged(t) => self.nodes[node].interrupted_load_kw,
            _ => 0.0,
        }
    }

    /// Weighted interrupted load of an island at span `t`, in kW.
    pub fn island_load(&self, island: usize, t: u32) -> f64 {
        let l = &self.islands[island];
        if !l.repair.is_outaged(t) {
            return 0.0;
        }
        l.nodes
            .iter()
            .map(|&i| self.nodes[i].weight * self.nodes[i].interrupted_load_kw)
            .sum()
    }

    /// Energy (kWh) restored by keeping island `island` supplied during span `t`.
    pub fn island_energy(&self, island: usize, t: u32) -> f64 {
        self.island_load(island, t) * self.grid.span_hours()
    }

    /// Island index containing `node`, if any.
    pub fn island_of(&self, node: usize) -> Option<usize> {
        self.islands.iter().position(|l| l.nodes.contains(&node))
    }

    /// True when some island is still faulted at span `t`.
    pub fn any_outage(&self, t: u32) -> bool {
        self.islands.iter().any(|l| l.repair.is_outaged(t))
    }

    /// Re-discretizes the scenario with a different span length.
    ///
    /// The horizon and repair times are rounded up to whole spans and the
    /// per-span travel cost is scaled with the span length.
    pub fn with_span(&self, span_minutes: u32) -> Result<Scenario, ScenarioError> {
        if span_minutes == 0 {
            return Err(invalid("--span", "must be at least 1 minute"));
        }
        let old = self.grid;
        let ceil_div = |minutes: u64| minutes.div_ceil(u64::from(span_minutes)) as u32;
        let grid = TimeGrid::new(span_minutes, ceil_div(old.horizon_minutes()))?;
        let scale = f64::from(span_minutes) / f64::from(old.span_minutes);
        let mut out = self.clone();
        out.grid = grid;
        for l in &mut out.islands {
            if let RepairTime::AtSpan(s) = l.repair {
                let minutes = u64::from(s) * u64::from(old.span_minutes);
                l.repair = RepairTime::AtSpan(ceil_div(minutes).min(grid.num_spans));
            }
        }
        for m in &mut out.fleet {
            m.travel_cost_kwh_per_span *= scale;
        }
        Ok(out)
    }

    /// Serializable form using the full distance matrix.
    pub fn to_file(&self) -> ScenarioFile {
        ScenarioFile {
            name: self.name.clone(),
            units: self.units,
            time_grid: self.grid,
            nodes: self
                .nodes
                .iter()
                .map(|n| NodeRecord {
                    id: n.id,
                    island: n.island,
                    load_kw: n.interrupted_load_kw,
                    weight: n.weight,
                })
                .collect(),
            distances: DistancesRecord {
                matrix: Some(self.distances.rows().to_vec()),
                edges: None,
            },
            islands: self
                .islands
                .iter()
                .map(|l| IslandRecord {
                    id: l.id,
                    nodes: l.nodes.iter().map(|&i| self.nodes[i].id).collect(),
                    repair_span: match l.repair {
                        RepairTime::AtSpan(s) => RepairSpanField::Span(s),
                        RepairTime::Never => RepairSpanField::Never(NeverTag::Never),
                    },
                })
                .collect(),
            fleet: self
                .fleet
                .iter()
                .map(|m| MerRecord {
                    id: m.id,
                    initial_node: self.nodes[m.initial_node].id,
                    travel_cost_kwh_per_span: m.travel_cost_kwh_per_span,
                    speed: m.speed,
                })
                .collect(),
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("scenario serializes")
    }
}

fn shortest_path_distances(
    edges: &[EdgeRecord],
    index_of: &HashMap<u32, usize>,
) -> Result<RoadDistances, ScenarioError> {
    let n = index_of.len();
    let mut graph = UnGraph::<(), f64>::with_capacity(n, edges.len());
    let handles: Vec<_> = (0..n).map(|_| graph.add_node(())).collect();
    for (pos, e) in edges.iter().enumerate() {
        let lookup = |id: u32, field: &str| {
            index_of
                .get(&id)
                .copied()
                .ok_or_else(|| invalid(format!("distances.edges[{pos}].{field}"), format!("unknown node id {id}")))
        };
        let a = lookup(e.from, "from")?;
        let b = lookup(e.to, "to")?;
        if !e.length.is_finite() || e.length < 0.0 {
            return Err(invalid(
                format!("distances.edges[{pos}].length"),
                "must be finite and nonnegative",
            ));
        }
        graph.add_edge(handles[a], handles[b], e.length);
    }
    let paths = floyd_warshall(&graph, |e| *e.weight())
        .map_err(|_| invalid("distances.edges", "negative cycle"))?;
    let mut rows = vec![vec![0.0; n]; n];
    let id_of: BTreeMap<usize, u32> = index_of.iter().map(|(&id, &i)| (i, id)).collect();
    for i in 0..n {
        for k in 0..n {
            // unreachable pairs come back as the measure's maximum value
            let d = paths.get(&(handles[i], handles[k])).copied().unwrap_or(f64::MAX);
            if !d.is_finite() || d >= f64::MAX / 2.0 {
                return Err(invalid(
                    "distances.edges",
                    format!("node {} cannot reach node {}", id_of[&i], id_of[&k]),
                ));
            }
            rows[i][k] = if i == k { 0.0 } else { d };
        }
    }
    RoadDistances::from_matrix(rows)
}

// ---- file schema ----

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default)]
    pub units: DistanceUnit,
    pub time_grid: TimeGrid,
    pub nodes: Vec<NodeRecord>,
    pub distances: DistancesRecord,
    #[serde(default)]
    pub islands: Vec<IslandRecord>,
    pub fleet: Vec<MerRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeRecord {
    pub id: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub island: Option<u32>,
    #[serde(default)]
    pub load_kw: f64,
    #[serde(default = "unit_weight")]
    pub weight: f64,
}

fn unit_weight() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistancesRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<EdgeRecord>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeRecord {
    pub from: u32,
    pub to: u32,
    pub length: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IslandRecord {
    pub id: u32,
    pub nodes: Vec<u32>,
    pub repair_span: RepairSpanField,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RepairSpanField {
    Span(u32),
    Never(NeverTag),
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NeverTag {
    Never,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MerRecord {
    pub id: u32,
    pub initial_node: u32,
    pub travel_cost_kwh_per_span: f64,
    pub speed: f64,
}
