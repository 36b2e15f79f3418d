//! Linear mobility model for MERs.
//!
//! Each MER carries, per time point `t` in `0..=D`, binary parking labels
//! `x[t][i]` and traveling labels `v[t][i]`, a continuous "fuel" injection
//! `S[t]` equal to the travel time at the first span of a leg, the residual
//! travel `R[t]`, and a binary direction lock `w[t]`. The generated families:
//!
//! * single state: `sum_i x + sum_i v = 1`
//! * parking transitions: `x[t] - D <= x[t+1] <= x[t] + U`, with `D` and `U`
//!   affine in the traveling-label changes (see [`TransitionCoefficients`])
//! * fuel: `S[t] >= x[t-1][i] * rowsum_i + sum_k T[i][k] v[t][k] - rowsum_i`
//!   for every `i`, and `S[t] >= 0`
//! * residual: `R[t] = R[t-1] + S[t] - sum_i v[t-1][i]`
//! * persistence: `R[t] / M <= sum_i v[t] <= R[t]`
//! * direction lock: `w[t] >= sum v[t-1] + sum v[t] - 2 + eps` and
//!   `|v[t][i] - v[t-1][i]| <= 1 - w[t]`
//! * initial state: parked at the initial node with `S = R = w = 0`
//!
//! The fuel family is a relaxation of the exact row-sum maximum; it is tight
//! whenever the objective penalizes travel. [`validate_assignment`] always
//! recomputes the exact value.

use std::fmt;

use thiserror::Error;

use crate::itinerary::{Itinerary, SpanState};
use crate::milp::{MilpModel, ModelError, Sense, Solution, VarId};
use crate::scenario::{TimeGrid, TravelTimeMatrix};

/// Parameters of the affine maps from traveling-label changes to the parking
/// transition slacks: `D = a1*d1 + b1*d2 + c1`, `U = a2*d1 + b2*d2 + c2`,
/// where `d1 = v[t][i] - v[t+1][i]` and `d2 = sum v[t] - sum v[t+1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionCoefficients {
    pub a1: f64,
    pub b1: f64,
    pub c1: f64,
    pub a2: f64,
    pub b2: f64,
    pub c2: f64,
}

impl TransitionCoefficients {
    /// The reference tuple `[-1.2, -0.4, 0.8]`, `[1, -0.5, 0.7]`.
    pub const fn canonical() -> Self {
        TransitionCoefficients {
            a1: -1.2,
            b1: -0.4,
            c1: 0.8,
            a2: 1.0,
            b2: -0.5,
            c2: 0.7,
        }
    }

    pub fn down(&self) -> [f64; 3] {
        [self.a1, self.b1, self.c1]
    }

    pub fn up(&self) -> [f64; 3] {
        [self.a2, self.b2, self.c2]
    }

    /// `(D, U)` for a given `(d1, d2)` label change.
    pub fn slacks(&self, d1: f64, d2: f64) -> (f64, f64) {
        (
            self.a1 * d1 + self.b1 * d2 + self.c1,
            self.a2 * d1 + self.b2 * d2 + self.c2,
        )
    }
}

impl Default for TransitionCoefficients {
    fn default() -> Self {
        TransitionCoefficients::canonical()
    }
}

impl fmt::Display for TransitionCoefficients {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[a1, b1, c1] = [{}, {}, {}], [a2, b2, c2] = [{}, {}, {}]",
            self.a1, self.b1, self.c1, self.a2, self.b2, self.c2
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Block {
    Down,
    Up,
}

/// One scalar inequality `g . (a, b, c) >= rhs` on a coefficient block.
struct Inequality {
    name: &'static str,
    block: Block,
    g: [f64; 3],
    rhs: f64,
}

// Strict upper bounds are closed here; the 0.2 margins keep the slacks away
// from the integer thresholds.
const INEQUALITIES: [Inequality; 14] = [
    Inequality { name: "−b1+c1 ≥ 1.2", block: Block::Down, g: [0.0, -1.0, 1.0], rhs: 1.2 },
    Inequality { name: "−a1−b1+c1 ≥ 0.2", block: Block::Down, g: [-1.0, -1.0, 1.0], rhs: 0.2 },
    Inequality { name: "−0.8 ≤ a1+b1+c1", block: Block::Down, g: [1.0, 1.0, 1.0], rhs: -0.8 },
    Inequality { name: "a1+b1+c1 ≤ −0.2", block: Block::Down, g: [-1.0, -1.0, -1.0], rhs: 0.2 },
    Inequality { name: "b1+c1 ≥ 0.2", block: Block::Down, g: [0.0, 1.0, 1.0], rhs: 0.2 },
    Inequality { name: "0.2 ≤ c1", block: Block::Down, g: [0.0, 0.0, 1.0], rhs: 0.2 },
    Inequality { name: "c1 ≤ 0.8", block: Block::Down, g: [0.0, 0.0, -1.0], rhs: -0.8 },
    Inequality { name: "−b2+c2 ≥ 0.2", block: Block::Up, g: [0.0, -1.0, 1.0], rhs: 0.2 },
    Inequality { name: "−a2−b2+c2 ≥ 0.2", block: Block::Up, g: [-1.0, -1.0, 1.0], rhs: 0.2 },
    Inequality { name: "a2+b2+c2 ≥ 1.2", block: Block::Up, g: [1.0, 1.0, 1.0], rhs: 1.2 },
    Inequality { name: "0.2 ≤ b2+c2", block: Block::Up, g: [0.0, 1.0, 1.0], rhs: 0.2 },
    Inequality { name: "b2+c2 ≤ 0.8", block: Block::Up, g: [0.0, -1.0, -1.0], rhs: -0.8 },
    Inequality { name: "0.2 ≤ c2", block: Block::Up, g: [0.0, 0.0, 1.0], rhs: 0.2 },
    Inequality { name: "c2 ≤ 0.8", block: Block::Up, g: [0.0, 0.0, -1.0], rhs: -0.8 },
];

const MARGIN_TOL: f64 = 1e-9;

/// Slack of one coefficient inequality; negative means violated.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientMargin {
    pub name: &'static str,
    pub margin: f64,
}

/// Margins of all fourteen scalar inequalities (the ten rows, with the two
/// double-sided rows of each block split).
pub fn coefficient_margins(c: &TransitionCoefficients) -> Vec<CoefficientMargin> {
    INEQUALITIES
        .iter()
        .map(|q| {
            let x = match q.block {
                Block::Down => c.down(),
                Block::Up => c.up(),
            };
            let lhs: f64 = q.g.iter().zip(x).map(|(g, v)| g * v).sum();
            CoefficientMargin {
                name: q.name,
                margin: lhs - q.rhs,
            }
        })
        .collect()
}

/// Returns the violated inequalities (empty when the tuple is admissible).
pub fn check_coefficients(c: &TransitionCoefficients) -> Vec<CoefficientMargin> {
    coefficient_margins(c)
        .into_iter()
        .filter(|m| m.margin < -MARGIN_TOL)
        .collect()
}

/// Linear objective weights on `(a, b, c)` for each block; both minimized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientObjective {
    pub down: [f64; 3],
    pub up: [f64; 3],
}

impl Default for CoefficientObjective {
    /// `a1 + b1 + c1` and `a2 + b2 + c2`.
    fn default() -> Self {
        CoefficientObjective {
            down: [1.0; 3],
            up: [1.0; 3],
        }
    }
}

fn solve3(rows: [[f64; 3]; 3], rhs: [f64; 3]) -> Option<[f64; 3]> {
    let det = |m: [[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(rows);
    if d.abs() < 1e-12 {
        return None;
    }
    let mut out = [0.0; 3];
    for (col, slot) in out.iter_mut().enumerate() {
        let mut m = rows;
        for r in 0..3 {
            m[r][col] = rhs[r];
        }
        // snap to a 1e-12 grid so that vertices print cleanly
        *slot = (det(m) / d * 1e12).round() / 1e12;
    }
    Some(out)
}

/// Minimizes `weights . x` over one block by enumerating the vertices of its
/// (bounded) polytope.
fn solve_block(block: Block, weights: [f64; 3]) -> [f64; 3] {
    let rows: Vec<&Inequality> = INEQUALITIES.iter().filter(|q| q.block == block).collect();
    let mut best: Option<(f64, [f64; 3])> = None;
    for i in 0..rows.len() {
        for j in i + 1..rows.len() {
            for k in j + 1..rows.len() {
                let Some(x) = solve3(
                    [rows[i].g, rows[j].g, rows[k].g],
                    [rows[i].rhs, rows[j].rhs, rows[k].rhs],
                ) else {
                    continue;
                };
                let feasible = rows.iter().all(|q| {
                    q.g.iter().zip(x).map(|(g, v)| g * v).sum::<f64>() >= q.rhs - MARGIN_TOL
                });
                if !feasible {
                    continue;
                }
                let f: f64 = weights.iter().zip(x).map(|(w, v)| w * v).sum();
                if best.is_none_or(|(bf, _)| f < bf - 1e-12) {
                    best = Some((f, x));
                }
            }
        }
    }
    best.expect("coefficient polytope is nonempty and bounded").1
}

/// Solves the two small coefficient LPs. `None` uses the sum objectives.
pub fn derive_transition_coefficients(
    objective: Option<CoefficientObjective>,
) -> TransitionCoefficients {
    let obj = objective.unwrap_or_default();
    let [a1, b1, c1] = solve_block(Block::Down, obj.down);
    let [a2, b2, c2] = solve_block(Block::Up, obj.up);
    TransitionCoefficients {
        a1,
        b1,
        c1,
        a2,
        b2,
        c2,
    }
}

/// Interval check of one traveling-label transition class.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionClassCheck {
    pub d1: i8,
    pub d2: i8,
    pub down: f64,
    pub up: f64,
    pub ok: bool,
}

#[derive(Clone, Copy)]
enum Interval {
    AtLeast(f64),
    HalfOpen(f64, f64),
}

impl Interval {
    fn contains(self, x: f64) -> bool {
        match self {
            Interval::AtLeast(lo) => x >= lo,
            Interval::HalfOpen(lo, hi) => x >= lo && x < hi,
        }
    }
}

/// Evaluates `(D, U)` on each class of traveling-label change and checks the
/// values fall in the intervals that realize the intended parking transition.
pub fn replay_transition_classes(c: &TransitionCoefficients) -> Vec<TransitionClassCheck> {
    use Interval::*;
    let classes: [(i8, i8, Interval, Interval); 5] = [
        // departure, node other than the destination
        (0, -1, AtLeast(1.0), AtLeast(0.0)),
        // departure, the destination node
        (-1, -1, AtLeast(0.0), AtLeast(0.0)),
        // arrival, the destination node
        (1, 1, HalfOpen(-1.0, 0.0), AtLeast(1.0)),
        // arrival, every other node
        (0, 1, AtLeast(0.0), HalfOpen(0.0, 1.0)),
        // no change: parked or traveling on
        (0, 0, HalfOpen(0.0, 1.0), HalfOpen(0.0, 1.0)),
    ];
    classes
        .iter()
        .map(|&(d1, d2, di, ui)| {
            let (down, up) = c.slacks(f64::from(d1), f64::from(d2));
            TransitionClassCheck {
                d1,
                d2,
                down,
                up,
                ok: di.contains(down) && ui.contains(up),
            }
        })
        .collect()
}

// ---- variable naming ----

pub fn parking_name(mer: u32, node: u32, t: u32) -> String {
    format!("x_j{mer}_i{node}_t{t}")
}

pub fn traveling_name(mer: u32, node: u32, t: u32) -> String {
    format!("v_j{mer}_i{node}_t{t}")
}

pub fn fuel_name(mer: u32, t: u32) -> String {
    format!("S_j{mer}_t{t}")
}

pub fn residual_name(mer: u32, t: u32) -> String {
    format!("R_j{mer}_t{t}")
}

pub fn lock_name(mer: u32, t: u32) -> String {
    format!("w_j{mer}_t{t}")
}

/// Direction-lock threshold; any value in `(0, 1]` is valid.
pub const LOCK_EPSILON: f64 = 1.0;

/// Smallest safe persistence constant for a travel-time matrix.
pub fn big_m_for(travel: &TravelTimeMatrix) -> f64 {
    f64::from(travel.max_entry()) + 1.0
}

#[derive(Debug, Error)]
pub enum MobilityError {
    #[error("travel-time matrix for MER {mer} is {got}x{got}, expected {expected}x{expected}")]
    Dimension { mer: u32, got: usize, expected: usize },
    #[error("initial node index {node} of MER {mer} is out of range")]
    InitialNode { mer: u32, node: usize },
    #[error("transition coefficients violate: {0}")]
    Coefficients(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Routing inputs for one MER.
#[derive(Debug, Clone, PartialEq)]
pub struct MobileUnit {
    pub id: u32,
    pub initial_node: usize,
    pub travel_times: TravelTimeMatrix,
}

/// Variable handles of one MER, indexed `[t][i]` or `[t]`.
#[derive(Debug, Clone)]
pub struct MerVariables {
    pub unit: MobileUnit,
    pub big_m: f64,
    pub parking: Vec<Vec<VarId>>,
    pub traveling: Vec<Vec<VarId>>,
    pub fuel: Vec<VarId>,
    pub residual: Vec<VarId>,
    pub lock: Vec<VarId>,
}

#[derive(Debug, Clone)]
pub struct MobilityBlock {
    pub mers: Vec<MerVariables>,
    pub node_ids: Vec<u32>,
    pub grid: TimeGrid,
    pub coefficients: TransitionCoefficients,
    pub epsilon: f64,
    /// Indices of the generated constraints in the model.
    pub constraints: std::ops::Range<usize>,
}

impl MobilityBlock {
    pub fn num_binary(&self) -> usize {
        self.mers
            .iter()
            .map(|m| m.parking.iter().chain(&m.traveling).map(Vec::len).sum::<usize>() + m.lock.len())
            .sum()
    }

    pub fn num_continuous(&self) -> usize {
        self.mers.iter().map(|m| m.fuel.len() + m.residual.len()).sum()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    /// Reads one MER's labels and continuous values from a solution.
    pub fn assignment(&self, mer: usize, solution: &Solution) -> Result<MobilityAssignment, String> {
        let vars = &self.mers[mer];
        let bit = |v: VarId| {
            solution.binary(v).ok_or_else(|| {
                format!("non-integral binary value {} in MER {}", solution.value(v), vars.unit.id)
            })
        };
        let labels = |rows: &Vec<Vec<VarId>>| -> Result<Vec<Vec<bool>>, String> {
            rows.iter()
                .map(|row| row.iter().map(|&v| bit(v)).collect())
                .collect()
        };
        Ok(MobilityAssignment {
            parking: labels(&vars.parking)?,
            traveling: labels(&vars.traveling)?,
            fuel: vars.fuel.iter().map(|&v| solution.value(v)).collect(),
            residual: vars.residual.iter().map(|&v| solution.value(v)).collect(),
            lock: vars.lock.iter().map(|&v| bit(v)).collect::<Result<_, _>>()?,
        })
    }
}

/// Adds the mobility variables and constraints for every unit to `model`.
pub fn build_mobility_block(
    model: &mut MilpModel,
    units: &[MobileUnit],
    node_ids: &[u32],
    grid: TimeGrid,
    coefficients: TransitionCoefficients,
) -> Result<MobilityBlock, MobilityError> {
    let bad = check_coefficients(&coefficients);
    if !bad.is_empty() {
        let names: Vec<&str> = bad.iter().map(|m| m.name).collect();
        return Err(MobilityError::Coefficients(names.join(", ")));
    }
    let n = node_ids.len();
    for u in units {
        if u.travel_times.len() != n {
            return Err(MobilityError::Dimension {
                mer: u.id,
                got: u.travel_times.len(),
                expected: n,
            });
        }
        if u.initial_node >= n {
            return Err(MobilityError::InitialNode {
                mer: u.id,
                node: u.initial_node,
            });
        }
    }

    let first_constraint = model.num_constraints();
    let d = grid.num_spans;
    let mut mers = Vec::with_capacity(units.len());
    for u in units {
        let j = u.id;
        let mut parking = Vec::with_capacity(d as usize + 1);
        let mut traveling = Vec::with_capacity(d as usize + 1);
        for t in 0..=d {
            parking.push(
                node_ids
                    .iter()
                    .map(|&i| model.add_binary(parking_name(j, i, t)))
                    .collect::<Result<Vec<_>, _>>()?,
            );
            traveling.push(
                node_ids
                    .iter()
                    .map(|&i| model.add_binary(traveling_name(j, i, t)))
                    .collect::<Result<Vec<_>, _>>()?,
            );
        }
        let fuel = (0..=d)
            .map(|t| model.add_continuous(fuel_name(j, t), 0.0, f64::INFINITY))
            .collect::<Result<Vec<_>, _>>()?;
        let residual = (0..=d)
            .map(|t| model.add_continuous(residual_name(j, t), 0.0, f64::INFINITY))
            .collect::<Result<Vec<_>, _>>()?;
        let lock = (0..=d)
            .map(|t| model.add_binary(lock_name(j, t)))
            .collect::<Result<Vec<_>, _>>()?;
        let vars = MerVariables {
            unit: u.clone(),
            big_m: big_m_for(&u.travel_times),
            parking,
            traveling,
            fuel,
            residual,
            lock,
        };
        add_mer_constraints(model, &vars, node_ids, d, &coefficients)?;
        mers.push(vars);
    }

    Ok(MobilityBlock {
        mers,
        node_ids: node_ids.to_vec(),
        grid,
        coefficients,
        epsilon: LOCK_EPSILON,
        constraints: first_constraint..model.num_constraints(),
    })
}

fn add_mer_constraints(
    model: &mut MilpModel,
    m: &MerVariables,
    node_ids: &[u32],
    d: u32,
    c: &TransitionCoefficients,
) -> Result<(), ModelError> {
    let j = m.unit.id;
    let n = node_ids.len();
    let tt = &m.unit.travel_times;
    let all_v = |t: u32, coef: f64| m.traveling[t as usize].iter().map(move |&v| (coef, v));

    for t in 0..=d {
        let ti = t as usize;
        let terms = m.parking[ti].iter().chain(&m.traveling[ti]).map(|&v| (1.0, v));
        model.add_constraint(format!("one_state_j{j}_t{t}"), terms, Sense::Eq, 1.0)?;
    }

    for t in 0..d {
        let (now, next) = (t as usize, t as usize + 1);
        for (i, &node) in node_ids.iter().enumerate() {
            let mut lo = vec![(1.0, m.parking[next][i]), (-1.0, m.parking[now][i])];
            lo.push((c.a1, m.traveling[now][i]));
            lo.push((-c.a1, m.traveling[next][i]));
            lo.extend(all_v(t, c.b1));
            lo.extend(all_v(t + 1, -c.b1));
            model.add_constraint(format!("park_lo_j{j}_i{node}_t{t}"), lo, Sense::Ge, -c.c1)?;

            let mut hi = vec![(1.0, m.parking[next][i]), (-1.0, m.parking[now][i])];
            hi.push((-c.a2, m.traveling[now][i]));
            hi.push((c.a2, m.traveling[next][i]));
            hi.extend(all_v(t, -c.b2));
            hi.extend(all_v(t + 1, c.b2));
            model.add_constraint(format!("park_hi_j{j}_i{node}_t{t}"), hi, Sense::Le, c.c2)?;
        }
    }

    for t in 1..=d {
        let (prev, now) = (t as usize - 1, t as usize);
        for (i, &node) in node_ids.iter().enumerate() {
            let row = tt.row_sum(i) as f64;
            let mut terms = vec![(1.0, m.fuel[now]), (-row, m.parking[prev][i])];
            for k in 0..n {
                terms.push((-f64::from(tt.get(i, k)), m.traveling[now][k]));
            }
            model.add_constraint(format!("fuel_j{j}_i{node}_t{t}"), terms, Sense::Ge, -row)?;
        }
        model.add_constraint(format!("fuel_nonneg_j{j}_t{t}"), [(1.0, m.fuel[now])], Sense::Ge, 0.0)?;
    }

    for t in 1..=d {
        let (prev, now) = (t as usize - 1, t as usize);
        let mut terms = vec![
            (1.0, m.residual[now]),
            (-1.0, m.residual[prev]),
            (-1.0, m.fuel[now]),
        ];
        terms.extend(all_v(t - 1, 1.0));
        model.add_constraint(format!("residual_j{j}_t{t}"), terms, Sense::Eq, 0.0)?;
    }

    for t in 0..=d {
        let now = t as usize;
        // R / M <= sum v, scaled by M
        let mut lo: Vec<_> = all_v(t, m.big_m).collect();
        lo.push((-1.0, m.residual[now]));
        model.add_constraint(format!("persist_lo_j{j}_t{t}"), lo, Sense::Ge, 0.0)?;
        let mut hi: Vec<_> = all_v(t, 1.0).collect();
        hi.push((-1.0, m.residual[now]));
        model.add_constraint(format!("persist_hi_j{j}_t{t}"), hi, Sense::Le, 0.0)?;
    }

    for t in 1..=d {
        let (prev, now) = (t as usize - 1, t as usize);
        let mut terms = vec![(1.0, m.lock[now])];
        terms.extend(all_v(t - 1, -1.0));
        terms.extend(all_v(t, -1.0));
        model.add_constraint(format!("lock_j{j}_t{t}"), terms, Sense::Ge, LOCK_EPSILON - 2.0)?;
        for (i, &node) in node_ids.iter().enumerate() {
            let diff = [(1.0, m.traveling[now][i]), (-1.0, m.traveling[prev][i])];
            let mut lo = diff.to_vec();
            lo.push((-1.0, m.lock[now]));
            model.add_constraint(format!("dir_lo_j{j}_i{node}_t{t}"), lo, Sense::Ge, -1.0)?;
            let mut hi = diff.to_vec();
            hi.push((1.0, m.lock[now]));
            model.add_constraint(format!("dir_hi_j{j}_i{node}_t{t}"), hi, Sense::Le, 1.0)?;
        }
    }

    model.add_constraint(
        format!("init_park_j{j}"),
        [(1.0, m.parking[0][m.unit.initial_node])],
        Sense::Eq,
        1.0,
    )?;
    model.add_constraint(format!("init_fuel_j{j}"), [(1.0, m.fuel[0])], Sense::Eq, 0.0)?;
    model.add_constraint(format!("init_residual_j{j}"), [(1.0, m.residual[0])], Sense::Eq, 0.0)?;
    model.add_constraint(format!("init_lock_j{j}"), [(1.0, m.lock[0])], Sense::Eq, 0.0)?;
    Ok(())
}

/// Exact fuel injection at span `t`: the largest row sum of
/// `A[t-1] + B[t] - T`, floored at zero.
pub fn exact_fuel(prev_parking: &[bool], traveling: &[bool], travel: &TravelTimeMatrix) -> i64 {
    let n = travel.len();
    let mut best = 0i64;
    for (i, &parked) in prev_parking.iter().enumerate().take(n) {
        let row = travel.row_sum(i) as i64;
        let mut s = if parked { row } else { 0 } - row;
        for (k, &on) in traveling.iter().enumerate().take(n) {
            if on {
                s += i64::from(travel.get(i, k));
            }
        }
        best = best.max(s);
    }
    best
}

/// Values of one MER's mobility variables, indexed by time point.
#[derive(Debug, Clone, PartialEq)]
pub struct MobilityAssignment {
    pub parking: Vec<Vec<bool>>,
    pub traveling: Vec<Vec<bool>>,
    pub fuel: Vec<f64>,
    pub residual: Vec<f64>,
    pub lock: Vec<bool>,
}

impl MobilityAssignment {
    /// Canonical completion of a label sequence: exact fuel, residual by
    /// recursion, and the lock set exactly on spans traveling at both `t-1`
    /// and `t`.
    pub fn from_states(states: &[SpanState], travel: &TravelTimeMatrix) -> Self {
        let n = travel.len();
        let len = states.len();
        let mut parking = vec![vec![false; n]; len];
        let mut traveling = vec![vec![false; n]; len];
        for (t, s) in states.iter().enumerate() {
            match *s {
                SpanState::Parked(i) => parking[t][i] = true,
                SpanState::Traveling(i) => traveling[t][i] = true,
            }
        }
        let mut fuel = vec![0.0; len];
        let mut residual = vec![0.0; len];
        let mut lock = vec![false; len];
        for t in 1..len {
            fuel[t] = exact_fuel(&parking[t - 1], &traveling[t], travel) as f64;
            let moved = traveling[t - 1].iter().filter(|&&b| b).count() as f64;
            residual[t] = residual[t - 1] + fuel[t] - moved;
            lock[t] = states[t - 1].is_traveling() && states[t].is_traveling();
        }
        MobilityAssignment {
            parking,
            traveling,
            fuel,
            residual,
            lock,
        }
    }

    /// Labels, if every span carries exactly one.
    pub fn states(&self) -> Option<Vec<SpanState>> {
        self.parking
            .iter()
            .zip(&self.traveling)
            .map(|(x, v)| {
                let mut found = None;
                for (i, (&p, &m)) in x.iter().zip(v).enumerate() {
                    for (on, s) in [(p, SpanState::Parked(i)), (m, SpanState::Traveling(i))] {
                        if on {
                            if found.is_some() {
                                return None;
                            }
                            found = Some(s);
                        }
                    }
                }
                found
            })
            .collect()
    }

    /// `(name, value)` pairs using the model's naming scheme.
    pub fn named_values(&self, mer: u32, node_ids: &[u32]) -> Vec<(String, f64)> {
        let b = |x: bool| if x { 1.0 } else { 0.0 };
        let mut out = Vec::new();
        for t in 0..self.parking.len() {
            let tu = t as u32;
            for (i, &node) in node_ids.iter().enumerate() {
                out.push((parking_name(mer, node, tu), b(self.parking[t][i])));
                out.push((traveling_name(mer, node, tu), b(self.traveling[t][i])));
            }
            out.push((fuel_name(mer, tu), self.fuel[t]));
            out.push((residual_name(mer, tu), self.residual[t]));
            out.push((lock_name(mer, tu), b(self.lock[t])));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    SingleState,
    ParkingTransition,
    Fuel,
    Residual,
    Persistence,
    DirectionLock,
    Initial,
    Labels,
    LegDuration,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rule::SingleState => "single state",
            Rule::ParkingTransition => "parking transition",
            Rule::Fuel => "fuel injection",
            Rule::Residual => "residual travel",
            Rule::Persistence => "travel persistence",
            Rule::DirectionLock => "direction lock",
            Rule::Initial => "initial state",
            Rule::Labels => "label sequence",
            Rule::LegDuration => "leg duration",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub rule: Rule,
    pub span: u32,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "span {}: {} ({})", self.span, self.rule, self.detail)
    }
}

const CHECK_TOL: f64 = 1e-6;

/// Checks one MER's assignment against every mobility rule, recomputing the
/// fuel by the exact row-sum maximum and the residual by its recursion, and
/// requires every complete leg to last exactly its travel time.
pub fn validate_assignment(
    a: &MobilityAssignment,
    unit: &MobileUnit,
    num_spans: u32,
    coefficients: &TransitionCoefficients,
) -> Result<(), Vec<Violation>> {
    let mut out = Vec::new();
    let tt = &unit.travel_times;
    let big_m = big_m_for(tt);
    let len = num_spans as usize + 1;
    let mut push = |rule: Rule, span: usize, detail: String| {
        out.push(Violation {
            rule,
            span: span as u32,
            detail,
        })
    };
    if a.parking.len() != len || a.traveling.len() != len || a.fuel.len() != len
        || a.residual.len() != len || a.lock.len() != len
    {
        push(Rule::Labels, 0, format!("expected {len} time points"));
        return Err(out);
    }
    let moving = |t: usize| a.traveling[t].iter().filter(|&&b| b).count() as f64;

    for t in 0..len {
        let count = a.parking[t].iter().chain(&a.traveling[t]).filter(|&&b| b).count();
        if count != 1 {
            push(Rule::SingleState, t, format!("{count} labels set"));
        }
    }

    if !a.parking[0][unit.initial_node] {
        push(Rule::Initial, 0, format!("not parked at node #{}", unit.initial_node));
    }
    if a.fuel[0].abs() > CHECK_TOL || a.residual[0].abs() > CHECK_TOL || a.lock[0] {
        push(Rule::Initial, 0, "fuel, residual and lock must start at 0".into());
    }

    let mut residual = vec![0.0; len];
    for t in 1..len {
        let exact = exact_fuel(&a.parking[t - 1], &a.traveling[t], tt) as f64;
        if (a.fuel[t] - exact).abs() > CHECK_TOL {
            push(Rule::Fuel, t, format!("value {} but exact injection is {exact}", a.fuel[t]));
        }
        residual[t] = residual[t - 1] + exact - moving(t - 1);
        if residual[t] < -CHECK_TOL {
            push(Rule::Residual, t, format!("negative residual {}", residual[t]));
        }
        if (a.residual[t] - residual[t]).abs() > CHECK_TOL {
            push(
                Rule::Residual,
                t,
                format!("value {} but recursion gives {}", a.residual[t], residual[t]),
            );
        }
    }

    let as_f = |b: bool| if b { 1.0 } else { 0.0 };
    for t in 0..len - 1 {
        let d2 = moving(t) - moving(t + 1);
        for i in 0..tt.len() {
            let d1 = as_f(a.traveling[t][i]) - as_f(a.traveling[t + 1][i]);
            let (down, up) = coefficients.slacks(d1, d2);
            let (x0, x1) = (as_f(a.parking[t][i]), as_f(a.parking[t + 1][i]));
            if x1 < x0 - down - CHECK_TOL || x1 > x0 + up + CHECK_TOL {
                push(Rule::ParkingTransition, t + 1, format!("parking label of node #{i}"));
            }
        }
    }

    for (t, &r) in residual.iter().enumerate() {
        let v = moving(t);
        if r / big_m > v + CHECK_TOL || v > r + CHECK_TOL {
            push(Rule::Persistence, t, format!("{v} traveling labels with residual {r}"));
        }
    }

    for t in 1..len {
        let w = as_f(a.lock[t]);
        if w < moving(t - 1) + moving(t) - 2.0 + LOCK_EPSILON - CHECK_TOL {
            push(Rule::DirectionLock, t, "lock must be set while traveling on".into());
        }
        for i in 0..tt.len() {
            let diff = as_f(a.traveling[t][i]) - as_f(a.traveling[t - 1][i]);
            if diff.abs() > 1.0 - w + CHECK_TOL {
                push(Rule::DirectionLock, t, format!("destination #{i} changes while locked"));
            }
        }
    }

    match a.states().map(|s| Itinerary::from_states(unit.id, &s)) {
        None => {}
        Some(Err(e)) => push(Rule::Labels, 0, e.to_string()),
        Some(Ok(it)) => {
            for leg in &it.legs {
                let full = tt.get(leg.origin, leg.destination);
                let cut_by_horizon = leg.arrive_span == num_spans && leg.spans() < full;
                if leg.spans() != full && !cut_by_horizon {
                    push(
                        Rule::LegDuration,
                        leg.depart_span as usize,
                        format!(
                            "leg #{} -> #{} lasts {} spans, travel time is {full}",
                            leg.origin,
                            leg.destination,
                            leg.spans()
                        ),
                    );
                }
            }
        }
    }

    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}
