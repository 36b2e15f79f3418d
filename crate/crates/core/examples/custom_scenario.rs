//! Builds a scenario in code instead of loading a file, then compares the
//! exact-enumeration backend with an external solver when one is available.
//!
//! ```bash
//! cargo run --example custom_scenario
//! ```

use std::error::Error;

use mer_routing::scenario::{
    DistanceUnit, DistancesRecord, EdgeRecord, IslandRecord, MerRecord, NodeRecord, RepairSpanField, ScenarioFile,
    TimeGrid,
};
use mer_routing::solver::resolve_external_command;
use mer_routing::{build_restoration, solve, Backend, Scenario, SolveConfig, TransitionCoefficients};

pub fn main() -> Result<(), Box<dyn Error>> {
    // a four-node road network given as edges; shortest paths fill the matrix
    let file = ScenarioFile {
        name: Some("corridor".into()),
        units: DistanceUnit::default(),
        time_grid: TimeGrid::new(15, 10)?,
        nodes: [(1, 0.0), (2, 80.0), (3, 0.0), (4, 150.0)]
            .into_iter()
            .map(|(id, load_kw)| NodeRecord {
                id,
                island: None,
                load_kw,
                weight: 1.0,
            })
            .collect(),
        distances: DistancesRecord {
            matrix: None,
            edges: Some(
                [(1, 2, 900.0), (2, 3, 1200.0), (3, 4, 700.0)]
                    .into_iter()
                    .map(|(from, to, length)| EdgeRecord { from, to, length })
                    .collect(),
            ),
        },
        islands: vec![
            IslandRecord {
                id: 1,
                nodes: vec![2],
                repair_span: RepairSpanField::Span(4),
            },
            IslandRecord {
                id: 2,
                nodes: vec![4],
                repair_span: RepairSpanField::Span(9),
            },
        ],
        fleet: vec![MerRecord {
            id: 1,
            initial_node: 1,
            travel_cost_kwh_per_span: 0.5,
            speed: 60.0,
        }],
    };
    let scenario = Scenario::from_file(file)?;
    println!("travel times (spans): {:?}", scenario.travel_times(0).rows());

    let r = build_restoration(&scenario, TransitionCoefficients::canonical())?;
    let exact = solve(
        &r.model,
        &SolveConfig {
            backend: Backend::ExactEnumeration,
            ..SolveConfig::default()
        },
    )?;
    println!("exact enumeration: {:.3} kWh", exact.objective_value);
    for it in r.decode_itineraries(&exact)? {
        println!("  {it}");
    }

    if let Ok(cmd) = resolve_external_command(None) {
        let config = SolveConfig {
            mip_gap: 0.0,
            backend: Backend::External { command: Some(cmd) },
            ..SolveConfig::default()
        };
        let external = solve(&r.model, &config)?;
        println!("external solver:   {:.3} kWh", external.objective_value);
        assert!((external.objective_value - exact.objective_value).abs() < 1e-6);
    }
    Ok(())
}
