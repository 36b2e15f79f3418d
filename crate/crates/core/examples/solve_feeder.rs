//! Solves the bundled 37-node feeder scenario at 10, 20 and 30-minute spans
//! with an external MILP solver and prints the restored energy, the travel
//! cost and each MER's route.
//!
//! The solver command comes from `MER_SOLVER_CMD`, falling back to the
//! bundled HiGHS script (needs `python3` with `highspy` or `scipy`).
//!
//! ```bash
//! cargo run --release --example solve_feeder
//! cargo run --release --example solve_feeder -- 15
//! ```

use std::error::Error;
use std::path::Path;

use mer_routing::cli::{load_with_span, solve_scenario, SolveOptions};

fn main() -> Result<(), Box<dyn Error>> {
    let spans: Vec<u32> = match std::env::args().nth(1) {
        Some(s) => vec![s.parse()?],
        None => vec![10, 20, 30],
    };
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/feeder37.json");
    for span in spans {
        let scenario = load_with_span(&path, Some(span))?;
        let report = solve_scenario(&scenario, &SolveOptions::default())?;
        println!(
            "{span:>2}-min spans: objective {:.1} kWh (restored {:.1}, travel {:.1}), {}, solved in {:.1?}",
            report.objective,
            report.breakdown.restored_kwh,
            report.breakdown.travel_cost_kwh,
            report.status,
            report.wall_time
        );
        for it in &report.itineraries {
            let ids = |i: usize| scenario.nodes[i].id;
            let route: Vec<String> = it
                .legs
                .iter()
                .map(|l| format!("{}->{} @{}..{}", ids(l.origin), ids(l.destination), l.depart_span, l.arrive_span))
                .collect();
            println!("  MER {}: {}", it.mer_id, if route.is_empty() { "stays".into() } else { route.join(", ") });
        }
        if !report.validation.is_valid() {
            return Err(format!("validation failed:\n{}", report.validation).into());
        }
    }
    Ok(())
}
