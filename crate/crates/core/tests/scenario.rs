mod common;

use proptest::prelude::*;

use mer_routing::scenario::{load_scenario, RepairTime, Scenario};

use common::{data_path, ScenarioSpec};

#[test]
fn tiny_dataset_travel_times_round_up() {
    let s = load_scenario(data_path("tiny.json")).unwrap();
    assert_eq!(s.num_nodes(), 3);
    assert_eq!(s.num_mers(), 1);
    assert_eq!(s.grid.num_spans, 8);
    // 100 length units per minute over 10-minute spans: 1000 per span
    assert_eq!(s.travel_times(0).rows(), vec![vec![0, 1, 2], vec![1, 0, 3], vec![2, 3, 0]]);
}

#[test]
fn tiny_dataset_island_loads_follow_repair() {
    let s = load_scenario(data_path("tiny.json")).unwrap();
    assert_eq!(s.islands[0].repair, RepairTime::Never);
    assert_eq!(s.islands[1].repair, RepairTime::AtSpan(5));
    assert_eq!(s.island_load(0, 8), 60.0);
    assert_eq!(s.island_load(1, 4), 120.0);
    assert_eq!(s.island_load(1, 5), 0.0);
    assert!((s.island_energy(1, 0) - 20.0).abs() < 1e-12);
    assert_eq!(s.island_of(0), None);
    assert_eq!(s.island_of(2), Some(1));
    assert_eq!(s.interrupted_load(2, 4), 120.0);
    assert_eq!(s.interrupted_load(2, 5), 0.0);
}

#[test]
fn feeder_dataset_shape() {
    let s = load_scenario(data_path("feeder37.json")).unwrap();
    assert_eq!(s.num_nodes(), 37);
    assert_eq!(s.num_mers(), 2);
    assert_eq!(s.grid.span_minutes, 10);
    assert_eq!(s.grid.num_spans, 36);
    assert_eq!(s.islands.len(), 4);
    let t = s.travel_times(0);
    assert!(t.max_entry() >= 1);
    assert!(s.any_outage(0));
}

#[test]
fn duplicate_node_id_is_reported_with_its_path() {
    let err = load_scenario(data_path("broken.json")).unwrap_err().to_string();
    assert!(err.contains("nodes[1].id"), "{err}");
    assert!(err.contains("duplicate node id"), "{err}");
}

#[test]
fn island_field_must_match_island_list() {
    let spec = ScenarioSpec {
        travel: vec![vec![0, 1], vec![1, 0]],
        num_spans: 3,
        loads: vec![0.0, 10.0],
        islands: vec![(vec![1], Some(2))],
        fleet: vec![(0, 0.1)],
    };
    let mut file = spec.file();
    file.nodes[1].island = Some(7);
    let err = Scenario::from_file(file).unwrap_err().to_string();
    assert!(err.contains("nodes[1].island"), "{err}");
}

#[test]
fn repair_after_horizon_is_rejected() {
    let spec = ScenarioSpec {
        travel: vec![vec![0, 1], vec![1, 0]],
        num_spans: 3,
        loads: vec![0.0, 10.0],
        islands: vec![(vec![1], Some(4))],
        fleet: vec![(0, 0.1)],
    };
    assert!(Scenario::from_file(spec.file()).is_err());
}

#[test]
fn json_round_trip() {
    let s = load_scenario(data_path("tiny.json")).unwrap();
    let again = Scenario::from_json_str(&s.to_json_string()).unwrap();
    assert_eq!(s, again);
}

#[test]
fn coarser_span_halves_horizon_and_doubles_cost() {
    let s = load_scenario(data_path("feeder37.json")).unwrap();
    let c = s.with_span(20).unwrap();
    assert_eq!(c.grid.num_spans, 18);
    assert!((c.fleet[0].travel_cost_kwh_per_span - 2.0 * s.fleet[0].travel_cost_kwh_per_span).abs() < 1e-12);
    for (a, b) in s.islands.iter().zip(&c.islands) {
        if let (RepairTime::AtSpan(x), RepairTime::AtSpan(y)) = (a.repair, b.repair) {
            assert_eq!(y, x.div_ceil(2));
        }
    }
}

proptest! {
    #[test]
    fn travel_times_never_increase_with_span_length(seed in 0u64..500, span in 1u32..40) {
        let s = common::random_scenario(seed).build();
        let fine = s.with_span(span).unwrap();
        let coarse = s.with_span(span * 2).unwrap();
        let (a, b) = (fine.travel_times(0), coarse.travel_times(0));
        for i in 0..s.num_nodes() {
            for k in 0..s.num_nodes() {
                prop_assert!(b.get(i, k) <= a.get(i, k));
                prop_assert!(a.get(i, k) <= 2 * b.get(i, k));
            }
        }
    }

    #[test]
    fn generated_scenarios_round_trip(seed in 0u64..500) {
        let s = common::random_scenario(seed).build();
        prop_assert_eq!(Scenario::from_json_str(&s.to_json_string()).unwrap(), s);
    }
}
