mod common;

use std::collections::HashMap;

use proptest::prelude::*;

use mer_routing::milp::{
    read_lp, read_mps, read_solution_file, read_values_csv, write_lp, write_mps, write_values_csv,
    MilpModel, ModelError, ModelFormat, ObjectiveSense, Sense, Solution, SolveStatus, VarKind,
};
use mer_routing::mobility::TransitionCoefficients;
use mer_routing::restoration::build_restoration;

/// `(terms, sense index, rhs)` with terms as `(coefficient, variable index)`.
type RowSpec = (Vec<(f64, usize)>, u8, f64);

#[derive(Debug, Clone)]
struct ModelSpec {
    vars: Vec<(bool, f64, f64)>,
    rows: Vec<RowSpec>,
    objective: Vec<(f64, usize)>,
    maximize: bool,
}

fn coefficient() -> impl Strategy<Value = f64> {
    prop_oneof![
        (-1000i32..1000).prop_map(f64::from),
        -1.0e6f64..1.0e6,
        Just(0.1),
        Just(-1.2),
        Just(1e-7),
    ]
}

fn bound_pair() -> impl Strategy<Value = (f64, f64)> {
    prop_oneof![
        Just((0.0, f64::INFINITY)),
        Just((f64::NEG_INFINITY, f64::INFINITY)),
        Just((f64::NEG_INFINITY, 3.5)),
        (-50i32..50, 0i32..50).prop_map(|(lo, w)| (f64::from(lo), f64::from(lo + w))),
    ]
}

fn model_spec() -> impl Strategy<Value = ModelSpec> {
    (1usize..8).prop_flat_map(|n| {
        let var = (any::<bool>(), bound_pair()).prop_map(|(b, (lo, hi))| (b, lo, hi));
        let term = move || (coefficient(), 0..n);
        let row = (prop::collection::vec(term(), 1..5), 0u8..3, coefficient());
        (
            prop::collection::vec(var, n),
            prop::collection::vec(row, 0..6),
            prop::collection::vec(term(), 0..5),
            any::<bool>(),
        )
            .prop_map(|(vars, rows, objective, maximize)| ModelSpec {
                vars,
                rows,
                objective,
                maximize,
            })
    })
}

fn build(spec: &ModelSpec) -> MilpModel {
    let mut m = MilpModel::new("generated");
    let ids: Vec<_> = spec
        .vars
        .iter()
        .enumerate()
        .map(|(i, &(binary, lo, hi))| {
            if binary {
                m.add_binary(format!("b{i}")).unwrap()
            } else {
                m.add_continuous(format!("c{i}"), lo, hi).unwrap()
            }
        })
        .collect();
    for (r, (terms, sense, rhs)) in spec.rows.iter().enumerate() {
        let sense = [Sense::Le, Sense::Ge, Sense::Eq][*sense as usize];
        let terms: Vec<_> = terms.iter().map(|&(c, i)| (c, ids[i])).collect();
        // rows whose terms cancel to nothing are rejected; skip them
        let _ = m.add_constraint(format!("r{r}"), terms, sense, *rhs);
    }
    let sense = if spec.maximize {
        ObjectiveSense::Maximize
    } else {
        ObjectiveSense::Minimize
    };
    m.set_objective(sense, spec.objective.iter().map(|&(c, i)| (c, ids[i])))
        .unwrap();
    m
}

proptest! {
    #[test]
    fn mps_round_trip_is_exact(spec in model_spec()) {
        let m = build(&spec);
        let mut buf = Vec::new();
        write_mps(&m, &mut buf).unwrap();
        prop_assert_eq!(read_mps(buf.as_slice()).unwrap(), m);
    }

    #[test]
    fn lp_round_trip_is_exact(spec in model_spec()) {
        let m = build(&spec);
        let mut buf = Vec::new();
        write_lp(&m, &mut buf).unwrap();
        prop_assert_eq!(read_lp(buf.as_slice()).unwrap(), m);
    }
}

#[test]
fn empty_model_cannot_be_written() {
    let m = MilpModel::new("empty");
    let dir = tempfile::tempdir().unwrap();
    for format in [ModelFormat::Mps, ModelFormat::Lp] {
        let path = dir.path().join("empty.model");
        assert!(matches!(m.emit(&path, format), Err(ModelError::EmptyModel)));
        assert!(!path.exists());
    }
}

#[test]
fn builder_rejects_bad_input() {
    let mut m = MilpModel::new("m");
    let x = m.add_binary("x").unwrap();
    assert!(matches!(m.add_binary("x"), Err(ModelError::DuplicateVariable(_))));
    assert!(matches!(m.add_binary("1x"), Err(ModelError::InvalidName(_))));
    assert!(matches!(m.add_var("b", VarKind::Binary, 0.0, 2.0), Err(ModelError::BinaryBounds(_))));
    assert!(matches!(
        m.add_constraint("c", [(1.0, x), (-1.0, x)], Sense::Le, 0.0),
        Err(ModelError::EmptyConstraint(_))
    ));
    assert!(matches!(
        m.add_constraint("c", [(f64::NAN, x)], Sense::Le, 0.0),
        Err(ModelError::NonFinite(_))
    ));
    m.add_constraint("c", [(1.0, x)], Sense::Le, 0.0).unwrap();
    assert!(matches!(
        m.add_constraint("c", [(1.0, x)], Sense::Le, 0.0),
        Err(ModelError::DuplicateConstraint(_))
    ));
}

#[test]
fn terms_are_merged_and_sorted() {
    let mut m = MilpModel::new("m");
    let x = m.add_continuous("x", 0.0, 1.0).unwrap();
    let y = m.add_continuous("y", 0.0, 1.0).unwrap();
    m.add_constraint("c", [(2.0, y), (1.0, x), (3.0, y)], Sense::Ge, 1.0).unwrap();
    assert_eq!(m.constraints()[0].terms, vec![(1.0, x), (5.0, y)]);
    assert_eq!(m.constraints()[0].violation(&[0.0, 0.1]), 0.5);
}

#[test]
fn restoration_model_round_trips_through_both_formats() {
    let s = common::random_scenario(3).build();
    let r = build_restoration(&s, TransitionCoefficients::canonical()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    for (file, format) in [("m.mps", ModelFormat::Mps), ("m.lp", ModelFormat::Lp)] {
        let path = dir.path().join(file);
        r.model.emit(&path, format).unwrap();
        let text = std::fs::read(&path).unwrap();
        let back = match format {
            ModelFormat::Mps => read_mps(text.as_slice()).unwrap(),
            ModelFormat::Lp => read_lp(text.as_slice()).unwrap(),
        };
        assert_eq!(back, r.model);
    }
}

#[test]
fn solution_file_headers_and_values() {
    let text = "# Status = optimal\n# Objective value = 12.5\n# MIP gap = 0\nx 1\ny 0.25\n";
    let f = read_solution_file(text.as_bytes()).unwrap();
    assert_eq!(f.status, Some(SolveStatus::Optimal));
    assert_eq!(f.objective, Some(12.5));
    assert_eq!(f.gap, Some(0.0));
    assert_eq!(f.values["y"], 0.25);
    assert!(read_solution_file("x 1 2\n".as_bytes()).is_err());
}

#[test]
fn values_csv_round_trip_and_snapping() {
    let mut m = MilpModel::new("m");
    let x = m.add_binary("x").unwrap();
    let y = m.add_continuous("y", 0.0, 10.0).unwrap();
    m.set_objective(ObjectiveSense::Maximize, [(2.0, x), (0.5, y)]).unwrap();
    let named: HashMap<String, f64> = [("x".to_string(), 0.9999999), ("y".to_string(), 3.0)].into();
    let sol = Solution::from_named(&m, SolveStatus::Optimal, &named, 0.0).unwrap();
    let snapped = sol.snapped(&m).unwrap();
    assert_eq!(snapped.value(x), 1.0);
    assert!((snapped.objective_value - sol.objective_value).abs() < 1e-6);
    let mut buf = Vec::new();
    write_values_csv(&m, &snapped, &mut buf).unwrap();
    let back = read_values_csv(buf.as_slice()).unwrap();
    assert_eq!(back["x"], 1.0);
    assert_eq!(back["y"], 3.0);

    let half: HashMap<String, f64> = [("x".to_string(), 0.5)].into();
    let sol = Solution::from_named(&m, SolveStatus::Optimal, &half, 0.0).unwrap();
    assert_eq!(sol.binary(x), None);
    assert!(sol.snapped(&m).is_err());
    let unknown: HashMap<String, f64> = [("z".to_string(), 1.0)].into();
    assert!(Solution::from_named(&m, SolveStatus::Optimal, &unknown, 0.0).is_err());
}
