mod common;

use std::collections::HashMap;

use mer_routing::itinerary::SpanState::{self, Parked as P, Traveling as V};
use mer_routing::milp::{MilpModel, Solution, SolveStatus};
use mer_routing::mobility::{
    build_mobility_block, validate_assignment, MobileUnit, MobilityAssignment, MobilityError, Rule,
    TransitionCoefficients,
};
use mer_routing::oracle::enumerate_mer_itineraries;
use mer_routing::scenario::{TimeGrid, TravelTimeMatrix};
use mer_routing::sizing::{size_proposed, uniform_travel_times};

use common::{feasible_label_sequences, single_block, tt};

fn feasible(model: &MilpModel, a: &MobilityAssignment, nodes: usize) -> bool {
    let ids: Vec<u32> = (1..=nodes as u32).collect();
    let named: HashMap<String, f64> = a.named_values(1, &ids).into_iter().collect();
    let sol = Solution::from_named(model, SolveStatus::Optimal, &named, 0.0).unwrap();
    model.is_feasible(&sol.values, 1e-9)
}

fn unit(travel: &TravelTimeMatrix, initial: usize) -> MobileUnit {
    MobileUnit {
        id: 1,
        initial_node: initial,
        travel_times: travel.clone(),
    }
}

#[test]
fn block_sizes_match_closed_form() {
    for n in 1..=4 {
        for m in 1..=2u32 {
            for d in 1..=6 {
                let mut model = MilpModel::new("sizes");
                let units: Vec<_> = (1..=m)
                    .map(|id| MobileUnit {
                        id,
                        initial_node: n - 1,
                        travel_times: uniform_travel_times(n, 3),
                    })
                    .collect();
                let ids: Vec<u32> = (1..=n as u32).collect();
                let block = build_mobility_block(
                    &mut model,
                    &units,
                    &ids,
                    TimeGrid::new(10, d).unwrap(),
                    TransitionCoefficients::canonical(),
                )
                .unwrap();
                let f = size_proposed(n as u64, u64::from(m), u64::from(d)).unwrap();
                assert_eq!(model.num_binary() as u64, f.binary, "({n},{m},{d})");
                assert_eq!(model.num_continuous() as u64, f.continuous.unwrap(), "({n},{m},{d})");
                assert_eq!(model.num_constraints() as u64, f.constraints, "({n},{m},{d})");
                assert_eq!(block.constraints, 0..model.num_constraints());
            }
        }
    }
}

#[test]
fn single_node_has_one_feasible_point() {
    for d in 1..=6 {
        let (model, block) = single_block(&tt(&[&[0]]), 0, d);
        let found = feasible_label_sequences(&model, &block);
        assert_eq!(found.len(), 1);
        assert!(found.iter().next().unwrap().iter().all(|&s| s == P(0)));
    }
}

#[test]
fn three_span_leg_replays_exactly() {
    let travel = tt(&[&[0, 3], &[3, 0]]);
    let (model, _) = single_block(&travel, 0, 6);
    let states = [P(0), P(0), V(1), V(1), V(1), P(1), P(1)];
    let a = MobilityAssignment::from_states(&states, &travel);
    assert_eq!(a.fuel, vec![0.0, 0.0, 3.0, 0.0, 0.0, 0.0, 0.0]);
    assert_eq!(a.residual, vec![0.0, 0.0, 3.0, 2.0, 1.0, 0.0, 0.0]);
    assert_eq!(a.lock, vec![false, false, false, true, true, false, false]);
    assert!(feasible(&model, &a, 2));
    assert_eq!(validate_assignment(&a, &unit(&travel, 0), 6, &TransitionCoefficients::canonical()), Ok(()));
}

#[test]
fn early_and_late_arrival_are_infeasible() {
    let travel = tt(&[&[0, 3], &[3, 0]]);
    let (model, _) = single_block(&travel, 0, 6);
    for states in [
        [P(0), P(0), V(1), V(1), P(1), P(1), P(1)],
        [P(0), P(0), V(1), V(1), V(1), V(1), P(1)],
        [P(0), P(0), V(1), P(1), P(1), P(1), P(1)],
    ] {
        let a = MobilityAssignment::from_states(&states, &travel);
        assert!(!feasible(&model, &a, 2), "{states:?}");
        assert!(validate_assignment(&a, &unit(&travel, 0), 6, &TransitionCoefficients::canonical()).is_err());
    }
}

#[test]
fn early_arrival_is_infeasible_for_any_fuel() {
    // Arriving after two spans leaves residual travel that the persistence
    // rows cannot absorb, whatever fuel is injected.
    let travel = tt(&[&[0, 3], &[3, 0]]);
    let (model, _) = single_block(&travel, 0, 6);
    let states = [P(0), P(0), V(1), V(1), P(1), P(1), P(1)];
    for fuel in 0..=8 {
        let mut a = MobilityAssignment::from_states(&states, &travel);
        a.fuel[2] = f64::from(fuel);
        a.residual[2] = f64::from(fuel);
        for t in 3..a.residual.len() {
            let moved = if states[t - 1].is_traveling() { 1.0 } else { 0.0 };
            a.residual[t] = a.residual[t - 1] + a.fuel[t] - moved;
        }
        assert!(!feasible(&model, &a, 2), "fuel {fuel}");
    }
}

#[test]
fn inflated_fuel_is_caught_by_validation() {
    // The fuel rows only bound injection from below; a late arrival paid for
    // with extra fuel passes the rows but not the exact-fuel check.
    let travel = tt(&[&[0, 3], &[3, 0]]);
    let (model, _) = single_block(&travel, 0, 6);
    let states = [P(0), P(0), V(1), V(1), V(1), V(1), P(1)];
    let mut a = MobilityAssignment::from_states(&states, &travel);
    a.fuel[2] = 4.0;
    a.residual = vec![0.0, 0.0, 4.0, 3.0, 2.0, 1.0, 0.0];
    assert!(feasible(&model, &a, 2));
    let err = validate_assignment(&a, &unit(&travel, 0), 6, &TransitionCoefficients::canonical()).unwrap_err();
    assert!(err.iter().any(|v| v.rule == Rule::Fuel), "{err:?}");
}

#[test]
fn traveling_toward_own_node_is_infeasible() {
    let travel = tt(&[&[0, 2], &[2, 0]]);
    let (model, _) = single_block(&travel, 0, 4);
    let states = [P(0), V(0), V(0), P(0), P(0)];
    let a = MobilityAssignment::from_states(&states, &travel);
    assert!(!feasible(&model, &a, 2));
}

#[test]
fn teleport_and_direction_change_are_rejected() {
    let travel = tt(&[&[0, 2, 2], &[2, 0, 2], &[2, 2, 0]]);
    let (model, _) = single_block(&travel, 0, 5);
    let coeffs = TransitionCoefficients::canonical();
    let cases: [(&[SpanState], Rule); 3] = [
        (&[P(0), P(1), P(1), P(1), P(1), P(1)], Rule::ParkingTransition),
        (&[P(0), V(1), V(2), P(2), P(2), P(2)], Rule::DirectionLock),
        (&[P(0), V(1), V(1), P(2), P(2), P(2)], Rule::ParkingTransition),
    ];
    for (states, rule) in cases {
        let a = MobilityAssignment::from_states(states, &travel);
        assert!(!feasible(&model, &a, 3), "{states:?}");
        let err = validate_assignment(&a, &unit(&travel, 0), 5, &coeffs).unwrap_err();
        assert!(err.iter().any(|v| v.rule == rule), "{states:?}: {err:?}");
    }
}

#[test]
fn completion_is_idempotent_for_every_itinerary() {
    let travel = tt(&[&[0, 1, 3], &[2, 0, 1], &[3, 2, 0]]);
    let coeffs = TransitionCoefficients::canonical();
    for it in enumerate_mer_itineraries(&travel, 1, 2, 6) {
        let states = it.states(6);
        let a = MobilityAssignment::from_states(&states, &travel);
        assert_eq!(a.states().as_deref(), Some(&states[..]));
        let again = MobilityAssignment::from_states(&a.states().unwrap(), &travel);
        assert_eq!(again, a);
        assert_eq!(validate_assignment(&a, &unit(&travel, 2), 6, &coeffs), Ok(()), "{it}");
    }
}

#[test]
fn both_coefficient_tuples_give_the_same_feasible_set() {
    let travel = tt(&[&[0, 2, 1], &[2, 0, 3], &[1, 3, 0]]);
    let ids = [1, 2, 3];
    let derived = mer_routing::mobility::derive_transition_coefficients(None);
    let mut sets = Vec::new();
    for coeffs in [TransitionCoefficients::canonical(), derived] {
        let mut model = MilpModel::new("m");
        let block = build_mobility_block(
            &mut model,
            &[unit(&travel, 0)],
            &ids,
            TimeGrid::new(10, 5).unwrap(),
            coeffs,
        )
        .unwrap();
        sets.push(feasible_label_sequences(&model, &block));
    }
    assert_eq!(sets[0], sets[1]);
}

#[test]
fn invalid_inputs_are_rejected() {
    let grid = TimeGrid::new(10, 3).unwrap();
    let coeffs = TransitionCoefficients::canonical();
    let mut model = MilpModel::new("m");
    let err = build_mobility_block(&mut model, &[unit(&tt(&[&[0, 1], &[1, 0]]), 0)], &[1, 2, 3], grid, coeffs);
    assert!(matches!(err, Err(MobilityError::Dimension { .. })));
    let err = build_mobility_block(&mut model, &[unit(&tt(&[&[0, 1], &[1, 0]]), 5)], &[1, 2], grid, coeffs);
    assert!(matches!(err, Err(MobilityError::InitialNode { .. })));
    let bad = TransitionCoefficients {
        a1: 0.0,
        b1: 0.0,
        c1: 0.0,
        ..coeffs
    };
    let err = build_mobility_block(&mut model, &[unit(&tt(&[&[0, 1], &[1, 0]]), 0)], &[1, 2], grid, bad);
    assert!(matches!(err, Err(MobilityError::Coefficients(_))));
}

#[test]
fn building_twice_gives_identical_models() {
    let travel = tt(&[&[0, 2, 1], &[2, 0, 3], &[1, 3, 0]]);
    let (a, _) = single_block(&travel, 1, 5);
    let (b, _) = single_block(&travel, 1, 5);
    assert_eq!(a, b);
    let names: Vec<_> = a.constraints().iter().map(|c| c.name.as_str()).collect();
    assert_eq!(names, b.constraints().iter().map(|c| c.name.as_str()).collect::<Vec<_>>());
}
