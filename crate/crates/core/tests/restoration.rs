mod common;

use std::collections::HashMap;

use mer_routing::itinerary::{Itinerary, Leg};
use mer_routing::milp::{ObjectiveSense, Solution, SolveStatus};
use mer_routing::mobility::TransitionCoefficients;
use mer_routing::oracle::encode_itinerary;
use mer_routing::restoration::{build_restoration, indicator_name, DecodeError, RestorationModel};
use mer_routing::scenario::Scenario;
use mer_routing::solver::{solve, Backend, SolveConfig};

use common::ScenarioSpec;

fn exact() -> SolveConfig {
    SolveConfig {
        backend: Backend::ExactEnumeration,
        ..SolveConfig::default()
    }
}

fn encoded(r: &RestorationModel, s: &Scenario, joint: &[Itinerary]) -> Solution {
    let named: HashMap<String, f64> = encode_itinerary(joint, s).unwrap().named_values(s).into_iter().collect();
    Solution::from_named(&r.model, SolveStatus::Optimal, &named, 0.0).unwrap()
}

fn parked_in_island() -> Scenario {
    ScenarioSpec {
        travel: vec![vec![0, 1], vec![1, 0]],
        num_spans: 6,
        loads: vec![100.0, 0.0],
        islands: vec![(vec![0], None)],
        fleet: vec![(0, 0.5)],
    }
    .build()
}

#[test]
fn model_maximizes_and_counts_indicators() {
    let s = parked_in_island();
    let r = build_restoration(&s, TransitionCoefficients::canonical()).unwrap();
    assert_eq!(r.model.objective().sense, ObjectiveSense::Maximize);
    assert_eq!(r.num_islands(), 1);
    assert_eq!(r.indicators[0].len(), 7);
    // mobility block plus one indicator and two link rows per island span
    assert_eq!(r.model.num_binary(), r.mobility.num_binary() + 7);
    assert_eq!(r.model.num_constraints(), r.mobility.num_constraints() + 14);
    assert!(r.model.var_id(&indicator_name(1, 6)).is_some());
}

#[test]
fn stationary_unit_inside_an_island() {
    let s = parked_in_island();
    let r = build_restoration(&s, TransitionCoefficients::canonical()).unwrap();
    let sol = solve(&r.model, &exact()).unwrap();
    // 100 kW over 7 time points of 10 minutes
    assert!((sol.objective_value - 700.0 / 6.0).abs() < 1e-9);
    let b = r.objective_breakdown(&sol).unwrap();
    assert!((b.restored_kwh - 116.666_666_666_666_67).abs() < 1e-9);
    assert_eq!(b.travel_cost_kwh, 0.0);
    assert!((b.net() - sol.objective_value).abs() < 1e-9);
    assert_eq!(r.decode_itineraries(&sol).unwrap(), vec![Itinerary::stationary(1, 0)]);
    assert!(r.validate(&sol).is_valid());
}

#[test]
fn no_faults_means_no_travel() {
    let s = ScenarioSpec {
        travel: vec![vec![0, 1, 2], vec![1, 0, 1], vec![2, 1, 0]],
        num_spans: 5,
        loads: vec![50.0, 50.0, 50.0],
        islands: vec![],
        fleet: vec![(1, 0.3), (2, 0.3)],
    }
    .build();
    let r = build_restoration(&s, TransitionCoefficients::canonical()).unwrap();
    assert_eq!(r.num_islands(), 0);
    let sol = solve(&r.model, &exact()).unwrap();
    assert_eq!(sol.objective_value, 0.0);
    assert!(r.decode_itineraries(&sol).unwrap().iter().all(|it| it.legs.is_empty()));
}

#[test]
fn zero_loads_make_every_trip_a_loss() {
    let s = ScenarioSpec {
        travel: vec![vec![0, 1], vec![1, 0]],
        num_spans: 4,
        loads: vec![0.0, 0.0],
        islands: vec![(vec![1], None)],
        fleet: vec![(0, 1.0)],
    }
    .build();
    let r = build_restoration(&s, TransitionCoefficients::canonical()).unwrap();
    let moving = vec![Itinerary {
        mer_id: 1,
        initial_node: 0,
        legs: vec![Leg {
            origin: 0,
            destination: 1,
            depart_span: 1,
            arrive_span: 1,
        }],
    }];
    let sol = encoded(&r, &s, &moving);
    assert_eq!(sol.objective_value, -1.0);
    let best = solve(&r.model, &exact()).unwrap();
    assert_eq!(best.objective_value, 0.0);
}

#[test]
fn indicator_without_a_host_is_a_violation() {
    let s = parked_in_island();
    let r = build_restoration(&s, TransitionCoefficients::canonical()).unwrap();
    let moving = vec![Itinerary {
        mer_id: 1,
        initial_node: 0,
        legs: vec![Leg {
            origin: 0,
            destination: 1,
            depart_span: 2,
            arrive_span: 2,
        }],
    }];
    let mut sol = encoded(&r, &s, &moving);
    assert!(r.validate(&sol).is_valid());
    // claim the island is still supplied after the MER left
    sol.values[r.indicators[0][4].index()] = 1.0;
    let report = r.validate(&sol);
    assert!(!report.is_valid());
    assert!(report.to_string().starts_with("INVALID"));
}

#[test]
fn truncated_leg_is_a_warning_not_a_violation() {
    let s = ScenarioSpec {
        travel: vec![vec![0, 3], vec![3, 0]],
        num_spans: 3,
        loads: vec![0.0, 10.0],
        islands: vec![(vec![1], None)],
        fleet: vec![(0, 0.1)],
    }
    .build();
    let r = build_restoration(&s, TransitionCoefficients::canonical()).unwrap();
    let joint = vec![Itinerary {
        mer_id: 1,
        initial_node: 0,
        legs: vec![Leg {
            origin: 0,
            destination: 1,
            depart_span: 2,
            arrive_span: 3,
        }],
    }];
    let report = r.validate(&encoded(&r, &s, &joint));
    assert!(report.is_valid(), "{report}");
    assert!(!report.warnings.is_empty());
}

#[test]
fn decoding_needs_an_integral_incumbent() {
    let s = parked_in_island();
    let r = build_restoration(&s, TransitionCoefficients::canonical()).unwrap();
    assert!(matches!(
        r.decode_itineraries(&Solution::infeasible()),
        Err(DecodeError::NoIncumbent(_))
    ));
    let mut sol = encoded(&r, &s, &[Itinerary::stationary(1, 0)]);
    sol.values.pop();
    assert!(matches!(r.decode_itineraries(&sol), Err(DecodeError::Length { .. })));
    let mut sol = encoded(&r, &s, &[Itinerary::stationary(1, 0)]);
    sol.values[r.mobility.mers[0].parking[3][0].index()] = 0.5;
    assert!(r.decode_itineraries(&sol).is_err());
}
