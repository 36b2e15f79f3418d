//! Helpers shared by the integration tests: scenario construction, a seeded
//! random scenario generator, a catalog of small travel-time matrices, and an
//! exhaustive search over label sequences of one MER's mobility block.

#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mer_routing::itinerary::SpanState;
use mer_routing::milp::{MilpModel, VarId};
use mer_routing::mobility::{
    build_mobility_block, exact_fuel, MobileUnit, MobilityBlock, TransitionCoefficients,
};
use mer_routing::scenario::{
    DistanceUnit, DistancesRecord, IslandRecord, MerRecord, NeverTag, NodeRecord, RepairSpanField, Scenario,
    ScenarioFile, TimeGrid, TravelTimeMatrix,
};

/// Span length used by generated scenarios; with [`SPEED`] one span covers
/// 1000 length units, so a distance of `1000 k` becomes `k` spans.
pub const SPAN_MINUTES: u32 = 10;
pub const SPEED: f64 = 100.0;

pub fn tt(rows: &[&[u32]]) -> TravelTimeMatrix {
    TravelTimeMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
}

/// Distance matrix realizing the travel times `rows` under [`SPEED`].
pub fn distances_for(rows: &[Vec<u32>]) -> Vec<Vec<f64>> {
    rows.iter()
        .map(|r| r.iter().map(|&k| f64::from(k) * 1000.0).collect())
        .collect()
}

/// Builder for small scenarios with node ids `1..=N`.
#[derive(Debug, Clone)]
pub struct ScenarioSpec {
    pub travel: Vec<Vec<u32>>,
    pub num_spans: u32,
    pub loads: Vec<f64>,
    /// `(node indices, repair span or None for never)`.
    pub islands: Vec<(Vec<usize>, Option<u32>)>,
    /// `(initial node index, travel cost per span)`.
    pub fleet: Vec<(usize, f64)>,
}

impl ScenarioSpec {
    pub fn file(&self) -> ScenarioFile {
        let n = self.travel.len();
        ScenarioFile {
            name: Some("generated".into()),
            units: DistanceUnit::default(),
            time_grid: TimeGrid::new(SPAN_MINUTES, self.num_spans).unwrap(),
            nodes: (0..n)
                .map(|i| NodeRecord {
                    id: i as u32 + 1,
                    island: None,
                    load_kw: self.loads.get(i).copied().unwrap_or(0.0),
                    weight: 1.0,
                })
                .collect(),
            distances: DistancesRecord {
                matrix: Some(distances_for(&self.travel)),
                edges: None,
            },
            islands: self
                .islands
                .iter()
                .enumerate()
                .map(|(l, (nodes, repair))| IslandRecord {
                    id: l as u32 + 1,
                    nodes: nodes.iter().map(|&i| i as u32 + 1).collect(),
                    repair_span: match repair {
                        Some(s) => RepairSpanField::Span(*s),
                        None => RepairSpanField::Never(NeverTag::Never),
                    },
                })
                .collect(),
            fleet: self
                .fleet
                .iter()
                .enumerate()
                .map(|(j, &(start, cost))| MerRecord {
                    id: j as u32 + 1,
                    initial_node: start as u32 + 1,
                    travel_cost_kwh_per_span: cost,
                    speed: SPEED,
                })
                .collect(),
        }
    }

    pub fn build(&self) -> Scenario {
        Scenario::from_file(self.file()).expect("generated scenario is valid")
    }
}

/// Random symmetric travel times in `1..=max` with a zero diagonal.
pub fn random_travel(rng: &mut impl Rng, n: usize, max: u32) -> Vec<Vec<u32>> {
    // draw the upper triangle row by row, then mirror it
    let upper: Vec<Vec<u32>> = (0..n)
        .map(|i| (i + 1..n).map(|_| rng.gen_range(1..=max)).collect())
        .collect();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|k| match i.cmp(&k) {
                    std::cmp::Ordering::Less => upper[i][k - i - 1],
                    std::cmp::Ordering::Equal => 0,
                    std::cmp::Ordering::Greater => upper[k][i - k - 1],
                })
                .collect()
        })
        .collect()
}

/// Random scenario within the oracle's limits, reproducible from `seed`.
pub fn random_scenario(seed: u64) -> ScenarioSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=4);
    let num_spans = rng.gen_range(3..=8);
    let travel = random_travel(&mut rng, n, 3);
    let loads: Vec<f64> = (0..n).map(|_| f64::from(rng.gen_range(0..=20u32)) * 10.0).collect();
    let mut free: Vec<usize> = (0..n).collect();
    let mut islands = Vec::new();
    for _ in 0..rng.gen_range(1..=2) {
        if free.is_empty() {
            break;
        }
        let size = rng.gen_range(1..=free.len().min(2));
        let mut nodes = Vec::new();
        for _ in 0..size {
            let k = rng.gen_range(0..free.len());
            nodes.push(free.swap_remove(k));
        }
        nodes.sort_unstable();
        let repair = if rng.gen_bool(0.2) {
            None
        } else {
            Some(rng.gen_range(0..=num_spans))
        };
        islands.push((nodes, repair));
    }
    let mers = rng.gen_range(1..=2);
    let fleet = (0..mers)
        .map(|_| (rng.gen_range(0..n), f64::from(rng.gen_range(1..=10u32)) / 10.0))
        .collect();
    ScenarioSpec {
        travel,
        num_spans,
        loads,
        islands,
        fleet,
    }
}

/// Fixed catalog of travel-time matrices with entries in {1, 2, 3}.
pub fn travel_catalog() -> Vec<Vec<Vec<u32>>> {
    vec![
        vec![vec![0]],
        vec![vec![0, 1], vec![1, 0]],
        vec![vec![0, 2], vec![2, 0]],
        vec![vec![0, 3], vec![3, 0]],
        vec![vec![0, 1], vec![3, 0]],
        vec![vec![0, 1, 1], vec![1, 0, 1], vec![1, 1, 0]],
        vec![vec![0, 2, 3], vec![2, 0, 1], vec![3, 1, 0]],
        vec![vec![0, 3, 3], vec![3, 0, 3], vec![3, 3, 0]],
        vec![vec![0, 1, 2], vec![2, 0, 3], vec![3, 1, 0]],
        vec![vec![0, 2, 2], vec![2, 0, 2], vec![2, 2, 0]],
        vec![vec![0, 1, 3], vec![1, 0, 2], vec![3, 2, 0]],
        vec![vec![0, 3, 1], vec![2, 0, 2], vec![1, 3, 0]],
    ]
}

/// A one-MER model containing only the mobility block.
pub fn single_block(travel: &TravelTimeMatrix, initial: usize, num_spans: u32) -> (MilpModel, MobilityBlock) {
    let mut model = MilpModel::new("block");
    let ids: Vec<u32> = (1..=travel.len() as u32).collect();
    let unit = MobileUnit {
        id: 1,
        initial_node: initial,
        travel_times: travel.clone(),
    };
    let block = build_mobility_block(
        &mut model,
        &[unit],
        &ids,
        TimeGrid::new(SPAN_MINUTES, num_spans).unwrap(),
        TransitionCoefficients::canonical(),
    )
    .unwrap();
    (model, block)
}

/// Every label sequence of the single MER in `block` whose canonical
/// completion (exact fuel, residual by recursion, lock on consecutive
/// traveling spans) satisfies all model rows and bounds.
///
/// The canonical lock is without loss of generality: the lock row forces it
/// to 1 on consecutive traveling spans, and elsewhere 0 is the value that
/// loosens the direction rows. Prefixes are pruned with the rows whose
/// latest time index has been fixed.
pub fn feasible_label_sequences(model: &MilpModel, block: &MobilityBlock) -> BTreeSet<Vec<SpanState>> {
    let mer = &block.mers[0];
    let travel = &mer.unit.travel_times;
    let n = travel.len();
    let d = block.grid.num_spans as usize;

    let mut time_of = vec![0usize; model.num_vars()];
    for t in 0..=d {
        let ids = mer.parking[t]
            .iter()
            .chain(&mer.traveling[t])
            .chain([&mer.fuel[t], &mer.residual[t], &mer.lock[t]]);
        for v in ids {
            time_of[v.index()] = t;
        }
    }
    let mut rows_at: Vec<Vec<usize>> = vec![Vec::new(); d + 1];
    for (idx, c) in model.constraints().iter().enumerate() {
        let last = c.terms.iter().map(|(_, v)| time_of[v.index()]).max().unwrap_or(0);
        rows_at[last].push(idx);
    }

    struct Search<'a> {
        model: &'a MilpModel,
        rows_at: &'a [Vec<usize>],
        parking: &'a [Vec<VarId>],
        traveling: &'a [Vec<VarId>],
        fuel: &'a [VarId],
        residual: &'a [VarId],
        lock: &'a [VarId],
        travel: &'a TravelTimeMatrix,
        n: usize,
        d: usize,
        values: Vec<f64>,
        labels: Vec<SpanState>,
        found: BTreeSet<Vec<SpanState>>,
    }

    impl Search<'_> {
        fn set_span(&mut self, t: usize, s: SpanState) {
            for i in 0..self.n {
                self.values[self.parking[t][i].index()] = 0.0;
                self.values[self.traveling[t][i].index()] = 0.0;
            }
            match s {
                SpanState::Parked(i) => self.values[self.parking[t][i].index()] = 1.0,
                SpanState::Traveling(i) => self.values[self.traveling[t][i].index()] = 1.0,
            }
            let (mut fuel, mut residual, mut lock) = (0.0, 0.0, 0.0);
            if t > 0 {
                let bit = |v: VarId| self.values[v.index()] > 0.5;
                let prev: Vec<bool> = self.parking[t - 1].iter().map(|&v| bit(v)).collect();
                let now: Vec<bool> = self.traveling[t].iter().map(|&v| bit(v)).collect();
                fuel = exact_fuel(&prev, &now, self.travel) as f64;
                let moved: f64 = self.traveling[t - 1].iter().map(|&v| self.values[v.index()]).sum();
                residual = self.values[self.residual[t - 1].index()] + fuel - moved;
                if self.labels[t - 1].is_traveling() && s.is_traveling() {
                    lock = 1.0;
                }
            }
            self.values[self.fuel[t].index()] = fuel;
            self.values[self.residual[t].index()] = residual;
            self.values[self.lock[t].index()] = lock;
        }

        fn span_ok(&self, t: usize) -> bool {
            let vars = [self.fuel[t], self.residual[t], self.lock[t]];
            for v in vars {
                let var = self.model.var(v);
                let x = self.values[v.index()];
                if x < var.lower - 1e-9 || x > var.upper + 1e-9 {
                    return false;
                }
            }
            self.rows_at[t]
                .iter()
                .all(|&r| self.model.constraints()[r].violation(&self.values) <= 1e-9)
        }

        fn descend(&mut self, t: usize) {
            for k in 0..2 * self.n {
                let s = if k < self.n {
                    SpanState::Parked(k)
                } else {
                    SpanState::Traveling(k - self.n)
                };
                self.labels.push(s);
                self.set_span(t, s);
                if self.span_ok(t) {
                    if t == self.d {
                        self.found.insert(self.labels.clone());
                    } else {
                        self.descend(t + 1);
                    }
                }
                self.labels.pop();
            }
        }
    }

    let mut search = Search {
        model,
        rows_at: &rows_at,
        parking: &mer.parking,
        traveling: &mer.traveling,
        fuel: &mer.fuel,
        residual: &mer.residual,
        lock: &mer.lock,
        travel,
        n,
        d,
        values: vec![0.0; model.num_vars()],
        labels: Vec::new(),
        found: BTreeSet::new(),
    };
    search.descend(0);
    search.found
}

/// Label sequences of every oracle itinerary of one MER.
pub fn oracle_label_sequences(travel: &TravelTimeMatrix, initial: usize, num_spans: u32) -> BTreeSet<Vec<SpanState>> {
    mer_routing::oracle::enumerate_mer_itineraries(travel, 1, initial, num_spans)
        .iter()
        .map(|it| it.states(num_spans))
        .collect()
}

/// External solver command, if one can be resolved in this environment.
pub fn external_solver() -> Option<String> {
    mer_routing::solver::resolve_external_command(None).ok()
}

/// Path of a bundled dataset.
pub fn data_path(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}
