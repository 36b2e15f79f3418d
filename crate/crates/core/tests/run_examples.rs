//! Runs the quick examples so that they keep working. The feeder example
//! needs an external solver and minutes of debug-build time; it is only
//! compiled.

#[path = "../examples/coefficients.rs"]
mod coefficients;
#[path = "../examples/custom_scenario.rs"]
mod custom_scenario;
#[allow(dead_code)]
#[path = "../examples/emit_model.rs"]
mod emit_model;
#[path = "../examples/leg_replay.rs"]
mod leg_replay;
#[path = "../examples/model_sizes.rs"]
mod model_sizes;
#[allow(dead_code)]
#[path = "../examples/oracle_search.rs"]
mod oracle_search;
#[path = "../examples/validate_solution.rs"]
mod validate_solution;

const TINY: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/data/tiny.json");

#[test]
fn coefficients_example() {
    coefficients::main();
}

#[test]
fn leg_replay_example() {
    leg_replay::main();
}

#[test]
fn oracle_search_example() {
    oracle_search::run(TINY).unwrap();
}

#[test]
fn model_sizes_example() {
    model_sizes::main().unwrap();
}

#[test]
fn emit_model_example() {
    let dir = tempfile::tempdir().unwrap();
    emit_model::run(TINY, dir.path()).unwrap();
    assert!(dir.path().join("model.mps").is_file());
    assert!(dir.path().join("model.lp").is_file());
}

#[test]
fn validate_solution_example() {
    validate_solution::main().unwrap();
}

#[test]
fn custom_scenario_example() {
    custom_scenario::main().unwrap();
}
