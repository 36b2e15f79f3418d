//! Exhaustive itinerary search on a small scenario: counts the itineraries
//! of each MER, finds the best joint itinerary, and cross-checks the
//! dynamic program against a literal argmax.
//!
//! ```bash
//! cargo run --example oracle_search
//! cargo run --example oracle_search -- path/to/scenario.json
//! ```

use std::error::Error;

use mer_routing::oracle::{best_itinerary, best_itinerary_exhaustive, count_mer_itineraries, simulate_objective};
use mer_routing::load_scenario;

fn main() -> Result<(), Box<dyn Error>> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/data/tiny.json").to_string());
    run(&path)
}

pub fn run(path: &str) -> Result<(), Box<dyn Error>> {
    let scenario = load_scenario(path)?;
    let d = scenario.grid.num_spans;
    for (j, mer) in scenario.fleet.iter().enumerate() {
        let count = count_mer_itineraries(&scenario.travel_times(j), mer.initial_node, d);
        println!("MER {}: {count} itineraries over {d} spans", mer.id);
    }

    let (joint, objective) = best_itinerary(&scenario)?;
    println!("best objective: {objective:.3} kWh");
    for it in &joint {
        println!("  {it}");
    }
    assert!((simulate_objective(&joint, &scenario)? - objective).abs() < 1e-9);

    let (literal, value) = best_itinerary_exhaustive(&scenario)?;
    assert_eq!(literal, joint);
    println!("literal argmax agrees ({value:.3} kWh)");
    Ok(())
}
