//! Service-restoration program: maximize weighted energy restored in faulted
//! islands minus MER travel cost, on top of the mobility block.
//!
//! For each island `l` and time point `t`, a binary indicator `y[l][t]` is
//! linked to the parking labels of every MER at the island's nodes by
//! `sum x / M <= y <= sum x` (with `M` the fleet size), so the island counts
//! as restored exactly when at least one MER is parked in it.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::itinerary::{Itinerary, ItineraryError};
use crate::milp::{MilpModel, ModelError, ObjectiveSense, Sense, Solution, VarId};
use crate::mobility::{
    build_mobility_block, validate_assignment, MobileUnit, MobilityAssignment, MobilityBlock,
    MobilityError, TransitionCoefficients,
};
use crate::scenario::Scenario;

/// Feasibility tolerance used when checking solver output.
pub const FEASIBILITY_TOL: f64 = 1e-6;

pub fn indicator_name(island: u32, t: u32) -> String {
    format!("y_l{island}_t{t}")
}

#[derive(Debug, Error)]
pub enum RestorationError {
    #[error(transparent)]
    Mobility(#[from] MobilityError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Error)]
pub enum DecodeError {
    #[error("solution has no incumbent (status {0})")]
    NoIncumbent(crate::milp::SolveStatus),
    #[error("solution has {got} values, model has {expected} variables")]
    Length { got: usize, expected: usize },
    #[error("{0}")]
    NonIntegral(String),
    #[error("MER {mer}: span {span} does not carry exactly one state label")]
    Labels { mer: u32, span: u32 },
    #[error("MER {mer}: {source}")]
    Itinerary {
        mer: u32,
        #[source]
        source: ItineraryError,
    },
}

/// The assembled restoration program and handles into it.
#[derive(Debug, Clone)]
pub struct RestorationModel {
    pub model: MilpModel,
    pub mobility: MobilityBlock,
    /// `indicators[l][t]` for island index `l`.
    pub indicators: Vec<Vec<VarId>>,
    pub scenario: Arc<Scenario>,
}

/// Restored energy and travel cost of a solution, both in kWh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveBreakdown {
    pub restored_kwh: f64,
    pub travel_cost_kwh: f64,
}

impl ObjectiveBreakdown {
    pub fn net(&self) -> f64 {
        self.restored_kwh - self.travel_cost_kwh
    }
}

/// Mobile units of a scenario, with per-MER travel-time matrices.
pub fn mobile_units(scenario: &Scenario) -> Vec<MobileUnit> {
    scenario
        .fleet
        .iter()
        .enumerate()
        .map(|(j, m)| MobileUnit {
            id: m.id,
            initial_node: m.initial_node,
            travel_times: scenario.travel_times(j),
        })
        .collect()
}

/// Builds the restoration program. A scenario without islands yields a model
/// whose only objective terms are travel costs.
pub fn build_restoration(
    scenario: &Scenario,
    coefficients: TransitionCoefficients,
) -> Result<RestorationModel, RestorationError> {
    let name = scenario.name.clone().unwrap_or_else(|| "restoration".into());
    let mut model = MilpModel::new(sanitize(&name));
    let units = mobile_units(scenario);
    let mobility = build_mobility_block(
        &mut model,
        &units,
        &scenario.node_ids(),
        scenario.grid,
        coefficients,
    )?;

    let fleet = scenario.num_mers() as f64;
    let d = scenario.grid.num_spans;
    let mut objective = Vec::new();
    let mut indicators = Vec::with_capacity(scenario.islands.len());
    for (l, island) in scenario.islands.iter().enumerate() {
        let mut row = Vec::with_capacity(d as usize + 1);
        for t in 0..=d {
            let y = model.add_binary(indicator_name(island.id, t))?;
            let parked: Vec<(f64, VarId)> = mobility
                .mers
                .iter()
                .flat_map(|m| island.nodes.iter().map(move |&i| (1.0, m.parking[t as usize][i])))
                .collect();
            let mut lo = parked.clone();
            lo.push((-fleet, y));
            model.add_constraint(format!("island_lo_l{}_t{t}", island.id), lo, Sense::Le, 0.0)?;
            let mut hi: Vec<_> = parked.iter().map(|&(c, v)| (-c, v)).collect();
            hi.push((1.0, y));
            model.add_constraint(format!("island_hi_l{}_t{t}", island.id), hi, Sense::Le, 0.0)?;
            objective.push((scenario.island_energy(l, t), y));
            row.push(y);
        }
        indicators.push(row);
    }
    for (m, spec) in mobility.mers.iter().zip(&scenario.fleet) {
        for row in &m.traveling {
            objective.extend(row.iter().map(|&v| (-spec.travel_cost_kwh_per_span, v)));
        }
    }
    model.set_objective(ObjectiveSense::Maximize, objective)?;
    let scenario = Arc::new(scenario.clone());
    model.set_origin(Arc::clone(&scenario));
    Ok(RestorationModel {
        model,
        mobility,
        indicators,
        scenario,
    })
}

fn sanitize(name: &str) -> String {
    let mut out: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' || c == '.' { c } else { '_' })
        .collect();
    if !out.starts_with(|c: char| c.is_ascii_alphabetic() || c == '_') {
        out.insert(0, 'm');
    }
    out.truncate(255);
    out
}

/// Outcome of a post-solve check.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<String>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_valid() {
            writeln!(f, "valid")?;
        } else {
            writeln!(f, "INVALID ({} violations)", self.violations.len())?;
        }
        for v in &self.violations {
            writeln!(f, "  violation: {v}")?;
        }
        for w in &self.warnings {
            writeln!(f, "  warning: {w}")?;
        }
        Ok(())
    }
}

impl RestorationModel {
    pub fn num_islands(&self) -> usize {
        self.indicators.len()
    }

    fn check_incumbent(&self, solution: &Solution) -> Result<(), DecodeError> {
        if !solution.status.has_incumbent() {
            return Err(DecodeError::NoIncumbent(solution.status));
        }
        if solution.values.len() != self.model.num_vars() {
            return Err(DecodeError::Length {
                got: solution.values.len(),
                expected: self.model.num_vars(),
            });
        }
        Ok(())
    }

    /// Per-MER mobility values with binaries snapped to {0, 1}.
    pub fn mobility_assignments(
        &self,
        solution: &Solution,
    ) -> Result<Vec<MobilityAssignment>, DecodeError> {
        self.check_incumbent(solution)?;
        (0..self.mobility.mers.len())
            .map(|j| self.mobility.assignment(j, solution).map_err(DecodeError::NonIntegral))
            .collect()
    }

    /// One itinerary per MER; every span is covered exactly once.
    pub fn decode_itineraries(&self, solution: &Solution) -> Result<Vec<Itinerary>, DecodeError> {
        let assignments = self.mobility_assignments(solution)?;
        assignments
            .iter()
            .zip(&self.mobility.mers)
            .map(|(a, m)| {
                let mer = m.unit.id;
                let states = a.states().ok_or_else(|| {
                    let span = a
                        .parking
                        .iter()
                        .zip(&a.traveling)
                        .position(|(x, v)| x.iter().chain(v).filter(|&&b| b).count() != 1)
                        .unwrap_or(0);
                    DecodeError::Labels { mer, span: span as u32 }
                })?;
                Itinerary::from_states(mer, &states)
                    .map_err(|source| DecodeError::Itinerary { mer, source })
            })
            .collect()
    }

    /// Recomputes both objective terms from the solution's values.
    pub fn objective_breakdown(&self, solution: &Solution) -> Result<ObjectiveBreakdown, DecodeError> {
        self.check_incumbent(solution)?;
        let mut restored = 0.0;
        for (l, row) in self.indicators.iter().enumerate() {
            for (t, &y) in row.iter().enumerate() {
                let on = solution.binary(y).ok_or_else(|| {
                    DecodeError::NonIntegral(format!("indicator {} is non-integral", self.model.var(y).name))
                })?;
                if on {
                    restored += self.scenario.island_energy(l, t as u32);
                }
            }
        }
        let mut travel = 0.0;
        for (m, spec) in self.mobility.mers.iter().zip(&self.scenario.fleet) {
            let spans: f64 = m.traveling.iter().flatten().map(|&v| solution.value(v)).sum();
            travel += spec.travel_cost_kwh_per_span * spans;
        }
        Ok(ObjectiveBreakdown {
            restored_kwh: restored,
            travel_cost_kwh: travel,
        })
    }

    /// Full post-solve check: model feasibility, the exact mobility rules for
    /// every MER, indicator correctness and the objective decomposition.
    /// Legs cut by the horizon are reported as warnings.
    pub fn validate(&self, solution: &Solution) -> ValidationReport {
        let mut report = ValidationReport::default();
        if let Err(e) = self.check_incumbent(solution) {
            report.violations.push(e.to_string());
            return report;
        }
        for idx in self.model.violated_constraints(&solution.values, FEASIBILITY_TOL) {
            let what = if idx == usize::MAX {
                "variable bound or integrality".to_string()
            } else {
                format!("constraint `{}`", self.model.constraints()[idx].name)
            };
            report.violations.push(format!("model: {what} violated"));
        }
        report.violations.dedup();

        let assignments = match self.mobility_assignments(solution) {
            Ok(a) => a,
            Err(e) => {
                report.violations.push(e.to_string());
                return report;
            }
        };
        let d = self.scenario.grid.num_spans;
        for (a, m) in assignments.iter().zip(&self.mobility.mers) {
            if let Err(vs) = validate_assignment(a, &m.unit, d, &self.mobility.coefficients) {
                report
                    .violations
                    .extend(vs.iter().map(|v| format!("MER {}: {v}", m.unit.id)));
            }
            if let Some(Ok(it)) = a.states().map(|s| Itinerary::from_states(m.unit.id, &s)) {
                for leg in &it.legs {
                    if !leg.is_complete(&m.unit.travel_times) && leg.arrive_span == d {
                        report.warnings.push(format!(
                            "MER {}: leg #{} -> #{} departing at span {} is cut by the horizon",
                            m.unit.id, leg.origin, leg.destination, leg.depart_span
                        ));
                    }
                }
            }
        }

        for (l, row) in self.indicators.iter().enumerate() {
            let island = &self.scenario.islands[l];
            for (t, &y) in row.iter().enumerate() {
                let parked = assignments
                    .iter()
                    .any(|a| island.nodes.iter().any(|&i| a.parking[t][i]));
                if solution.binary(y) != Some(parked) {
                    report.violations.push(format!(
                        "island {} at span {t}: indicator does not match parking",
                        island.id
                    ));
                }
            }
        }

        if let Ok(b) = self.objective_breakdown(solution) {
            let scale = 1.0f64.max(solution.objective_value.abs());
            if (b.net() - solution.objective_value).abs() > FEASIBILITY_TOL * scale {
                report.violations.push(format!(
                    "objective {} differs from restored {} minus travel {}",
                    solution.objective_value, b.restored_kwh, b.travel_cost_kwh
                ));
            }
        }
        report
    }
}
