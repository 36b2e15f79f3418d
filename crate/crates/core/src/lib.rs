//! Routing of mobile energy resources (MERs) with a linear mobility model.
//!
//! The crate builds mixed-integer linear programs in which each MER is, at
//! every time span, either parked at a node or traveling toward one, with
//! integer travel times enforced by a residual-travel countdown instead of a
//! time-expanded network. On top of that block it assembles a service
//! restoration program, solves it through an external MILP solver or, for
//! small instances, by exhaustive itinerary search, and validates the result.
//!
//! Modules, bottom-up:
//!
//! * [`scenario`] — scenario files, travel-time derivation
//! * [`milp`] — model representation, MPS/LP I/O, solutions
//! * [`itinerary`] — per-MER legs and span labels
//! * [`mobility`] — the mobility constraints and their coefficients
//! * [`restoration`] — the restoration program, decoding, validation
//! * [`oracle`] — exhaustive enumeration and exact optimum for small cases
//! * [`solver`] — external and exact-enumeration backends
//! * [`sizing`] — closed-form model sizes of this and baseline models
//! * [`cli`] — the commands behind the `merroute` binary

pub mod cli;
pub mod itinerary;
pub mod milp;
pub mod mobility;
pub mod oracle;
pub mod restoration;
pub mod scenario;
pub mod sizing;
pub mod solver;

pub use itinerary::{Itinerary, Leg, Segment, SpanState};
pub use milp::{MilpModel, Solution, SolveStatus};
pub use mobility::TransitionCoefficients;
pub use restoration::{build_restoration, RestorationModel};
pub use scenario::{load_scenario, Scenario};
pub use solver::{solve, Backend, SolveConfig};
