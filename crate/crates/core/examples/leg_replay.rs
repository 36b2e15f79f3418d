//! Replays a single three-span trip span by span: the labels, the fuel
//! injected at departure, the residual travel countdown and the direction
//! lock. Arriving one span early or late is rejected by the model.
//!
//! ```bash
//! cargo run --example leg_replay
//! ```

use std::collections::HashMap;

use mer_routing::itinerary::SpanState::{self, Parked as P, Traveling as V};
use mer_routing::milp::{MilpModel, Solution, SolveStatus};
use mer_routing::mobility::{build_mobility_block, MobileUnit, MobilityAssignment, TransitionCoefficients};
use mer_routing::scenario::{TimeGrid, TravelTimeMatrix};

fn check(model: &MilpModel, states: &[SpanState], travel: &TravelTimeMatrix) -> (MobilityAssignment, Vec<String>) {
    let a = MobilityAssignment::from_states(states, travel);
    let named: HashMap<String, f64> = a.named_values(1, &[1, 2]).into_iter().collect();
    let sol = Solution::from_named(model, SolveStatus::Optimal, &named, 0.0).expect("names match");
    let violated = model
        .violated_constraints(&sol.values, 1e-9)
        .into_iter()
        .map(|i| match model.constraints().get(i) {
            Some(c) => c.name.clone(),
            None => "variable bounds".to_string(),
        })
        .collect();
    (a, violated)
}

pub fn main() {
    let travel = TravelTimeMatrix::from_rows(&[vec![0, 3], vec![3, 0]]).unwrap();
    let mut model = MilpModel::new("leg");
    let unit = MobileUnit {
        id: 1,
        initial_node: 0,
        travel_times: travel.clone(),
    };
    build_mobility_block(
        &mut model,
        &[unit],
        &[1, 2],
        TimeGrid::new(10, 6).unwrap(),
        TransitionCoefficients::canonical(),
    )
    .unwrap();

    let on_time = [P(0), P(0), V(1), V(1), V(1), P(1), P(1)];
    let (a, violated) = check(&model, &on_time, &travel);
    println!("span  label         fuel  residual  lock");
    for (t, s) in on_time.iter().enumerate() {
        let label = match s {
            P(i) => format!("parked @{}", i + 1),
            V(i) => format!("moving ->{}", i + 1),
        };
        println!("{t:>4}  {label:<12} {:>5} {:>9} {:>5}", a.fuel[t], a.residual[t], u8::from(a.lock[t]));
    }
    println!("on time: {} violated rows", violated.len());
    assert!(violated.is_empty());

    for (name, states) in [
        ("one span early", [P(0), P(0), V(1), V(1), P(1), P(1), P(1)]),
        ("one span late", [P(0), P(0), V(1), V(1), V(1), V(1), P(1)]),
    ] {
        let (_, violated) = check(&model, &states, &travel);
        println!("{name}: violates {}", violated.join(", "));
        assert!(!violated.is_empty());
    }
}
