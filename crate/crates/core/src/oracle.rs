//! Ground-truth engine for small instances: enumerate every valid itinerary,
//! simulate the restoration objective directly, and encode itineraries into
//! full variable assignments.
//!
//! Per MER, an itinerary is a sequence of decisions "stay parked" or "depart
//! at span `d` toward node `k`". A departure needs the MER parked at `d - 1`,
//! so the earliest departure is span 1 and consecutive legs are separated by
//! at least one parked span. Legs that the horizon cuts are included, as the
//! mobility constraints allow them.
//!
//! [`best_itinerary`] runs a dynamic program over joint per-span states and is
//! equivalent to an argmax over [`enumerate_itineraries`] with the same
//! tie-breaking; [`best_itinerary_exhaustive`] is that literal argmax.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

use crate::itinerary::{Itinerary, Leg, SpanState};
use crate::mobility::MobilityAssignment;
use crate::restoration::indicator_name;
use crate::scenario::{Scenario, TravelTimeMatrix};

pub const MAX_NODES: usize = 6;
pub const MAX_SPANS: u32 = 14;
pub const MAX_MERS: usize = 2;

/// Objective values closer than this are treated as ties.
pub const TIE_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error(
        "instance too large for exhaustive search: N={nodes}, D={spans}, M={mers} \
         (limits N<={MAX_NODES}, D<={MAX_SPANS}, M<={MAX_MERS})"
    )]
    SizeGuard { nodes: usize, spans: u32, mers: usize },
    #[error("invalid itinerary: {0}")]
    Invalid(String),
}

/// One itinerary per MER, in fleet order.
pub type JointItinerary = Vec<Itinerary>;

pub fn check_size_guard(scenario: &Scenario) -> Result<(), OracleError> {
    let (nodes, spans, mers) = (scenario.num_nodes(), scenario.grid.num_spans, scenario.num_mers());
    if nodes > MAX_NODES || spans > MAX_SPANS || mers > MAX_MERS {
        return Err(OracleError::SizeGuard { nodes, spans, mers });
    }
    Ok(())
}

/// Calls `visit` with the legs of every itinerary of one MER.
pub fn for_each_mer_itinerary(
    travel: &TravelTimeMatrix,
    initial_node: usize,
    num_spans: u32,
    visit: &mut dyn FnMut(&[Leg]),
) {
    fn walk(
        travel: &TravelTimeMatrix,
        here: usize,
        parked_from: u32,
        d: u32,
        legs: &mut Vec<Leg>,
        visit: &mut dyn FnMut(&[Leg]),
    ) {
        visit(legs);
        for depart in parked_from + 1..=d {
            for dest in 0..travel.len() {
                if dest == here {
                    continue;
                }
                let last = depart + travel.get(here, dest) - 1;
                legs.push(Leg {
                    origin: here,
                    destination: dest,
                    depart_span: depart,
                    arrive_span: last.min(d),
                });
                if last >= d {
                    visit(legs);
                } else {
                    walk(travel, dest, last + 1, d, legs, visit);
                }
                legs.pop();
            }
        }
    }
    walk(travel, initial_node, 0, num_spans, &mut Vec::new(), visit);
}

/// Every itinerary of one MER, in enumeration order.
pub fn enumerate_mer_itineraries(
    travel: &TravelTimeMatrix,
    mer_id: u32,
    initial_node: usize,
    num_spans: u32,
) -> Vec<Itinerary> {
    let mut out = Vec::new();
    for_each_mer_itinerary(travel, initial_node, num_spans, &mut |legs| {
        out.push(Itinerary {
            mer_id,
            initial_node,
            legs: legs.to_vec(),
        })
    });
    out
}

/// Number of itineraries of one MER, by memoized recursion over
/// (node, first parked span).
pub fn count_mer_itineraries(travel: &TravelTimeMatrix, initial_node: usize, num_spans: u32) -> u128 {
    fn count(
        travel: &TravelTimeMatrix,
        here: usize,
        parked_from: u32,
        d: u32,
        memo: &mut HashMap<(usize, u32), u128>,
    ) -> u128 {
        if let Some(&c) = memo.get(&(here, parked_from)) {
            return c;
        }
        let mut total = 1u128;
        for depart in parked_from + 1..=d {
            for dest in (0..travel.len()).filter(|&k| k != here) {
                let next = depart + travel.get(here, dest);
                total += if next > d { 1 } else { count(travel, dest, next, d, memo) };
            }
        }
        memo.insert((here, parked_from), total);
        total
    }
    count(travel, initial_node, 0, num_spans, &mut HashMap::new())
}

/// All joint itineraries: the cross product of the per-MER sets.
pub fn enumerate_itineraries(
    scenario: &Scenario,
) -> Result<impl Iterator<Item = JointItinerary>, OracleError> {
    check_size_guard(scenario)?;
    let per_mer: Vec<Vec<Itinerary>> = scenario
        .fleet
        .iter()
        .enumerate()
        .map(|(j, m)| {
            enumerate_mer_itineraries(&scenario.travel_times(j), m.id, m.initial_node, scenario.grid.num_spans)
        })
        .collect();
    let total: usize = per_mer.iter().map(Vec::len).product();
    Ok((0..total).map(move |mut k| {
        let mut joint = Vec::with_capacity(per_mer.len());
        let mut parts = vec![0; per_mer.len()];
        // last MER varies fastest
        for (j, list) in per_mer.iter().enumerate().rev() {
            parts[j] = k % list.len();
            k /= list.len();
        }
        for (j, list) in per_mer.iter().enumerate() {
            joint.push(list[parts[j]].clone());
        }
        joint
    }))
}

fn validate_joint(joint: &[Itinerary], scenario: &Scenario) -> Result<(), OracleError> {
    if joint.len() != scenario.num_mers() {
        return Err(OracleError::Invalid(format!(
            "{} itineraries for {} MERs",
            joint.len(),
            scenario.num_mers()
        )));
    }
    for (j, (it, m)) in joint.iter().zip(&scenario.fleet).enumerate() {
        if it.mer_id != m.id || it.initial_node != m.initial_node {
            return Err(OracleError::Invalid(format!("itinerary {j} does not belong to MER {}", m.id)));
        }
        it.validate(&scenario.travel_times(j), scenario.grid.num_spans)
            .map_err(|e| OracleError::Invalid(format!("MER {}: {e}", m.id)))?;
    }
    Ok(())
}

/// Restored energy minus travel cost of a joint itinerary, computed directly
/// from the parking positions.
pub fn simulate_objective(joint: &[Itinerary], scenario: &Scenario) -> Result<f64, OracleError> {
    validate_joint(joint, scenario)?;
    let d = scenario.grid.num_spans;
    let states: Vec<Vec<SpanState>> = joint.iter().map(|it| it.states(d)).collect();
    let mut total = 0.0;
    for t in 0..=d {
        let labels: Vec<SpanState> = states.iter().map(|s| s[t as usize]).collect();
        total += span_reward(scenario, t, &labels);
    }
    Ok(total)
}

fn span_reward(scenario: &Scenario, t: u32, labels: &[SpanState]) -> f64 {
    let mut r = 0.0;
    for (l, island) in scenario.islands.iter().enumerate() {
        let hosted = labels
            .iter()
            .any(|s| matches!(*s, SpanState::Parked(i) if island.nodes.contains(&i)));
        if hosted {
            r += scenario.island_energy(l, t);
        }
    }
    for (s, m) in labels.iter().zip(&scenario.fleet) {
        if s.is_traveling() {
            r -= m.travel_cost_kwh_per_span;
        }
    }
    r
}

/// Ranking key: higher objective, then fewer traveling spans, then the
/// lexicographically smallest time-major joint label sequence (parked before
/// traveling, then lower node index).
#[derive(Debug, Clone)]
struct Rank {
    objective: f64,
    travel: u32,
}

impl Rank {
    /// `Less` means `self` is preferred.
    fn compare(&self, other: &Rank) -> Ordering {
        if self.objective > other.objective + TIE_TOL {
            Ordering::Less
        } else if other.objective > self.objective + TIE_TOL {
            Ordering::Greater
        } else {
            self.travel.cmp(&other.travel)
        }
    }
}

fn joint_labels(joint: &[Itinerary], d: u32) -> Vec<(u8, usize)> {
    let states: Vec<Vec<SpanState>> = joint.iter().map(|it| it.states(d)).collect();
    (0..=d as usize)
        .flat_map(|t| states.iter().map(move |s| s[t].order_key()))
        .collect()
}

/// Literal argmax over [`enumerate_itineraries`]. Only practical for very
/// small instances; used to cross-check [`best_itinerary`].
pub fn best_itinerary_exhaustive(scenario: &Scenario) -> Result<(JointItinerary, f64), OracleError> {
    let d = scenario.grid.num_spans;
    type Candidate = (Rank, Vec<(u8, usize)>, JointItinerary);
    let mut best: Option<Candidate> = None;
    for joint in enumerate_itineraries(scenario)? {
        let objective = simulate_objective(&joint, scenario)?;
        let rank = Rank {
            objective,
            travel: joint.iter().map(Itinerary::travel_spans).sum(),
        };
        let replace = match &best {
            None => true,
            Some((b, labels, _)) => match rank.compare(b) {
                Ordering::Less => true,
                Ordering::Greater => false,
                Ordering::Equal => joint_labels(&joint, d) < *labels,
            },
        };
        if replace {
            let labels = joint_labels(&joint, d);
            best = Some((rank, labels, joint));
        }
    }
    let (rank, _, joint) = best.expect("the stay-forever itinerary always exists");
    Ok((joint, rank.objective))
}

/// Per-MER state at one span: parked, or traveling with `remaining` spans
/// still to go after the current one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum MerState {
    Parked(usize),
    Traveling { dest: usize, remaining: u32 },
}

impl MerState {
    fn label(self) -> SpanState {
        match self {
            MerState::Parked(i) => SpanState::Parked(i),
            MerState::Traveling { dest, .. } => SpanState::Traveling(dest),
        }
    }

    fn successors(self, travel: &TravelTimeMatrix) -> Vec<MerState> {
        match self {
            MerState::Parked(i) => {
                let mut out = vec![MerState::Parked(i)];
                out.extend((0..travel.len()).filter(|&k| k != i).map(|k| MerState::Traveling {
                    dest: k,
                    remaining: travel.get(i, k) - 1,
                }));
                out
            }
            MerState::Traveling { dest, remaining: 0 } => vec![MerState::Parked(dest)],
            MerState::Traveling { dest, remaining } => vec![MerState::Traveling {
                dest,
                remaining: remaining - 1,
            }],
        }
    }
}

type Joint = Vec<MerState>;

fn joint_successors(state: &Joint, travel: &[TravelTimeMatrix]) -> Vec<Joint> {
    let mut out: Vec<Joint> = vec![Vec::new()];
    for (s, tt) in state.iter().zip(travel) {
        let next = s.successors(tt);
        out = out
            .into_iter()
            .flat_map(|prefix| {
                next.iter().map(move |&n| {
                    let mut p = prefix.clone();
                    p.push(n);
                    p
                })
            })
            .collect();
    }
    out
}

fn label_key(state: &Joint) -> Vec<(u8, usize)> {
    state.iter().map(|s| s.label().order_key()).collect()
}

/// Optimal joint itinerary by dynamic programming over joint per-span states,
/// with the same ranking as [`best_itinerary_exhaustive`].
pub fn best_itinerary(scenario: &Scenario) -> Result<(JointItinerary, f64), OracleError> {
    check_size_guard(scenario)?;
    let d = scenario.grid.num_spans as usize;
    let travel: Vec<TravelTimeMatrix> = (0..scenario.num_mers()).map(|j| scenario.travel_times(j)).collect();

    let start: Joint = scenario.fleet.iter().map(|m| MerState::Parked(m.initial_node)).collect();
    let mut layers: Vec<BTreeSet<Joint>> = vec![BTreeSet::from([start.clone()])];
    for t in 0..d {
        let next: BTreeSet<Joint> = layers[t]
            .iter()
            .flat_map(|s| joint_successors(s, &travel))
            .collect();
        layers.push(next);
    }

    let reward = |t: usize, s: &Joint| {
        let labels: Vec<SpanState> = s.iter().map(|m| m.label()).collect();
        let travel = labels.iter().filter(|l| l.is_traveling()).count() as u32;
        (span_reward(scenario, t as u32, &labels), travel)
    };

    // value-to-go from each state, including its own span
    let mut values: Vec<BTreeMap<Joint, Rank>> = vec![BTreeMap::new(); d + 1];
    for s in &layers[d] {
        let (objective, travel) = reward(d, s);
        values[d].insert(s.clone(), Rank { objective, travel });
    }
    for t in (0..d).rev() {
        for s in &layers[t] {
            let best = joint_successors(s, &travel)
                .iter()
                .map(|n| &values[t + 1][n])
                .min_by(|a, b| a.compare(b))
                .cloned()
                .expect("every state has a successor");
            let (objective, travel_now) = reward(t, s);
            values[t].insert(
                s.clone(),
                Rank {
                    objective: objective + best.objective,
                    travel: travel_now + best.travel,
                },
            );
        }
    }

    let mut path = vec![start.clone()];
    for t in 0..d {
        let succ = joint_successors(&path[t], &travel);
        let best = succ
            .iter()
            .map(|n| &values[t + 1][n])
            .min_by(|a, b| a.compare(b))
            .cloned()
            .expect("every state has a successor");
        let next = succ
            .into_iter()
            .filter(|n| values[t + 1][n].compare(&best) == Ordering::Equal)
            .min_by_key(label_key)
            .expect("the best successor ties with itself");
        path.push(next);
    }

    let joint = scenario
        .fleet
        .iter()
        .enumerate()
        .map(|(j, m)| {
            let states: Vec<SpanState> = path.iter().map(|s| s[j].label()).collect();
            Itinerary::from_states(m.id, &states).expect("DP paths are valid label sequences")
        })
        .collect::<Vec<_>>();
    let objective = simulate_objective(&joint, scenario)?;
    Ok((joint, objective))
}

/// Full variable assignment induced by a joint itinerary.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedAssignment {
    pub mobility: Vec<MobilityAssignment>,
    /// `indicators[l][t]`: some MER is parked in island `l` at span `t`.
    pub indicators: Vec<Vec<bool>>,
}

impl EncodedAssignment {
    /// `(name, value)` pairs matching the restoration model's variable names.
    pub fn named_values(&self, scenario: &Scenario) -> Vec<(String, f64)> {
        let ids = scenario.node_ids();
        let mut out: Vec<(String, f64)> = self
            .mobility
            .iter()
            .zip(&scenario.fleet)
            .flat_map(|(a, m)| a.named_values(m.id, &ids))
            .collect();
        for (row, island) in self.indicators.iter().zip(&scenario.islands) {
            for (t, &on) in row.iter().enumerate() {
                out.push((indicator_name(island.id, t as u32), if on { 1.0 } else { 0.0 }));
            }
        }
        out
    }
}

/// Encodes a joint itinerary: state labels per span, fuel injected at each
/// departure, the residual countdown, the direction lock on consecutive
/// traveling spans, and island indicators from parking positions.
pub fn encode_itinerary(joint: &[Itinerary], scenario: &Scenario) -> Result<EncodedAssignment, OracleError> {
    validate_joint(joint, scenario)?;
    let d = scenario.grid.num_spans;
    let mobility: Vec<MobilityAssignment> = joint
        .iter()
        .enumerate()
        .map(|(j, it)| MobilityAssignment::from_states(&it.states(d), &scenario.travel_times(j)))
        .collect();
    let indicators = scenario
        .islands
        .iter()
        .map(|island| {
            (0..=d as usize)
                .map(|t| {
                    mobility
                        .iter()
                        .any(|a| island.nodes.iter().any(|&i| a.parking[t][i]))
                })
                .collect()
        })
        .collect();
    Ok(EncodedAssignment { mobility, indicators })
}
