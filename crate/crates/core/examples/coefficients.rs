//! Checks the transition coefficients of the mobility model: the shipped
//! tuple, the tuple recovered by linear programming, and a replay of every
//! transition class against the allowed ranges.
//!
//! ```bash
//! cargo run --example coefficients
//! ```

use mer_routing::mobility::{
    check_coefficients, coefficient_margins, derive_transition_coefficients, replay_transition_classes,
    CoefficientObjective, TransitionCoefficients,
};

fn report(label: &str, c: &TransitionCoefficients) -> bool {
    println!("{label}: {c}");
    for m in coefficient_margins(c) {
        let margin = if m.margin.abs() < 1e-12 { 0.0 } else { m.margin };
        println!("  {:<18} {margin:+.3}", m.name);
    }
    let classes = replay_transition_classes(c);
    for k in &classes {
        println!(
            "  d1={:+} d2={:+}: down {:+.2}, up {:+.2} {}",
            k.d1,
            k.d2,
            k.down,
            k.up,
            if k.ok { "ok" } else { "out of range" }
        );
    }
    check_coefficients(c).is_empty() && classes.iter().all(|k| k.ok)
}

pub fn main() {
    let shipped = TransitionCoefficients::canonical();
    let derived = derive_transition_coefficients(None);
    let weighted = derive_transition_coefficients(Some(CoefficientObjective {
        down: [1.0, 2.0, 1.0],
        up: [1.0, 1.0, 1.0],
    }));
    let mut ok = true;
    ok &= report("shipped", &shipped);
    ok &= report("LP-derived", &derived);
    ok &= report("LP-derived (weighted)", &weighted);

    let zero = TransitionCoefficients {
        a1: 0.0,
        b1: 0.0,
        c1: 0.0,
        ..shipped
    };
    let broken = check_coefficients(&zero);
    println!("all-zero parking row violates {} inequalities", broken.len());
    assert!(ok && !broken.is_empty());
}
