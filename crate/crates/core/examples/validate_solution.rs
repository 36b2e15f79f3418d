//! Encodes an itinerary as a full variable assignment, checks it against the
//! restoration program, then breaks it in two ways and shows what the
//! validator reports.
//!
//! ```bash
//! cargo run --example validate_solution
//! ```

use std::collections::HashMap;
use std::error::Error;

use mer_routing::milp::{Solution, SolveStatus};
use mer_routing::oracle::{best_itinerary, encode_itinerary};
use mer_routing::{build_restoration, load_scenario, TransitionCoefficients};

pub fn main() -> Result<(), Box<dyn Error>> {
    let scenario = load_scenario(concat!(env!("CARGO_MANIFEST_DIR"), "/data/tiny.json"))?;
    let r = build_restoration(&scenario, TransitionCoefficients::canonical())?;
    let (joint, _) = best_itinerary(&scenario)?;
    let named: HashMap<String, f64> = encode_itinerary(&joint, &scenario)?
        .named_values(&scenario)
        .into_iter()
        .collect();
    let good = Solution::from_named(&r.model, SolveStatus::Optimal, &named, 0.0)?;
    let report = r.validate(&good);
    print!("encoded optimum: {report}");
    assert!(report.is_valid());

    // claim an island is supplied while nobody is parked there
    let mut phantom = good.clone();
    let idle = r.indicators[0]
        .iter()
        .position(|&y| good.value(y) == 0.0)
        .expect("some span leaves island 1 unsupplied");
    phantom.values[r.indicators[0][idle].index()] = 1.0;
    print!("phantom supply: {}", r.validate(&phantom));

    // inflate the fuel injected at the first departure
    let mut padded = good.clone();
    let mer = &r.mobility.mers[0];
    let depart = mer.fuel.iter().position(|&s| good.value(s) > 0.0).expect("the optimum travels");
    padded.values[mer.fuel[depart].index()] += 1.0;
    let report = r.validate(&padded);
    print!("padded fuel: {report}");
    assert!(!report.is_valid());
    Ok(())
}
