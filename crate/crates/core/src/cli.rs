//! Command implementations behind the `merroute` binary: solve, oracle,
//! sizes, coeffs and validate. Each returns a value whose rendering is
//! deterministic; wall-clock time is kept separate so that `report.txt` is
//! reproducible.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::itinerary::{Itinerary, Segment};
use crate::milp::{read_values_csv, write_values_csv, MilpModel, ModelFormat, Solution, SolveStatus};
use crate::mobility::{
    check_coefficients, coefficient_margins, derive_transition_coefficients,
    replay_transition_classes, TransitionCoefficients,
};
use crate::oracle::{best_itinerary, OracleError};
use crate::restoration::{
    build_restoration, ObjectiveBreakdown, RestorationModel, ValidationReport,
};
use crate::scenario::{load_scenario, Scenario, TravelTimeMatrix};
use crate::sizing::{size_all, size_proposed, uniform_travel_times, write_sizes_csv, SizeReport};
use crate::solver::{solve, SolveConfig, SolveError};

/// Exit code for malformed or invalid input.
pub const EXIT_INPUT: i32 = 1;
/// Exit code for solver failures, including infeasible programs.
pub const EXIT_SOLVER: i32 = 2;
/// Exit code for solutions that fail post-solve validation.
pub const EXIT_VALIDATION: i32 = 3;
/// Exit code for instances beyond the exhaustive-search limits.
pub const EXIT_SIZE_GUARD: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Solver(String),
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    SizeGuard(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Solver(_) => EXIT_SOLVER,
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::SizeGuard(_) => EXIT_SIZE_GUARD,
        }
    }
}

fn input_err(e: impl std::fmt::Display) -> CliError {
    CliError::Input(e.to_string())
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::SizeGuard { .. } => CliError::SizeGuard(e.to_string()),
            OracleError::Invalid(_) => CliError::Input(e.to_string()),
        }
    }
}

impl From<SolveError> for CliError {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::SizeGuard(o) => o.into(),
            other => CliError::Solver(other.to_string()),
        }
    }
}

/// Loads a scenario, optionally re-discretized to another span length.
pub fn load_with_span(path: &Path, span: Option<u32>) -> Result<Scenario, CliError> {
    let scenario = load_scenario(path).map_err(input_err)?;
    match span {
        Some(s) if s != scenario.grid.span_minutes => scenario.with_span(s).map_err(input_err),
        _ => Ok(scenario),
    }
}

fn scenario_summary(s: &Scenario) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "scenario: {}", s.name.as_deref().unwrap_or("(unnamed)"));
    let _ = writeln!(
        out,
        "nodes N = {}, MERs M = {}, spans D = {} of {} min (horizon {} min)",
        s.num_nodes(),
        s.num_mers(),
        s.grid.num_spans,
        s.grid.span_minutes,
        s.grid.horizon_minutes()
    );
    for (l, island) in s.islands.iter().enumerate() {
        let ids: Vec<String> = island.nodes.iter().map(|&i| s.nodes[i].id.to_string()).collect();
        let load: f64 = island
            .nodes
            .iter()
            .map(|&i| s.nodes[i].weight * s.nodes[i].interrupted_load_kw)
            .sum();
        let repair = match island.repair {
            crate::scenario::RepairTime::AtSpan(t) => format!("repaired at span {t}"),
            crate::scenario::RepairTime::Never => "never repaired".into(),
        };
        let _ = writeln!(
            out,
            "island {} (#{l}): {} nodes, weighted load {load} kW, {repair}; nodes {}",
            island.id,
            island.nodes.len(),
            ids.join(" ")
        );
    }
    out
}

fn describe_itinerary(it: &Itinerary, s: &Scenario, travel: &TravelTimeMatrix) -> String {
    let id = |i: usize| s.nodes[i].id;
    let mut out = format!("MER {} ({} travel spans)\n", it.mer_id, it.travel_spans());
    for seg in it.segments(s.grid.num_spans) {
        match seg {
            Segment::Park {
                node,
                first_span,
                last_span,
            } => {
                let _ = writeln!(out, "  park   node {:>5}  spans {first_span}..={last_span}", id(node));
            }
            Segment::Travel(leg) => {
                let note = if leg.is_complete(travel) { "" } else { "  (cut by horizon)" };
                let _ = writeln!(
                    out,
                    "  travel {:>5} -> {:<5} spans {}..={}{note}",
                    id(leg.origin),
                    id(leg.destination),
                    leg.depart_span,
                    leg.arrive_span
                );
            }
        }
    }
    out
}

/// Writes `mer,kind,node_or_origin,dest,start,end` rows using node ids.
pub fn write_itineraries_csv(
    itineraries: &[Itinerary],
    scenario: &Scenario,
    out: impl std::io::Write,
) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["mer", "kind", "node_or_origin", "dest", "start", "end"])?;
    let id = |i: usize| scenario.nodes[i].id.to_string();
    for it in itineraries {
        for seg in it.segments(scenario.grid.num_spans) {
            let mer = it.mer_id.to_string();
            match seg {
                Segment::Park {
                    node,
                    first_span,
                    last_span,
                } => w.write_record([
                    mer,
                    "park".into(),
                    id(node),
                    String::new(),
                    first_span.to_string(),
                    last_span.to_string(),
                ])?,
                Segment::Travel(leg) => w.write_record([
                    mer,
                    "travel".into(),
                    id(leg.origin),
                    id(leg.destination),
                    leg.depart_span.to_string(),
                    leg.arrive_span.to_string(),
                ])?,
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// MER travel at spans where no island with positive load is still faulted.
pub fn idle_travel(itineraries: &[Itinerary], scenario: &Scenario) -> Vec<String> {
    let d = scenario.grid.num_spans;
    let restorable = |t: u32| (0..scenario.islands.len()).any(|l| scenario.island_load(l, t) > 0.0);
    let mut out = Vec::new();
    for it in itineraries {
        for leg in &it.legs {
            for t in leg.depart_span..=leg.arrive_span.min(d) {
                if !restorable(t) {
                    out.push(format!("MER {} travels at span {t} with nothing left to restore", it.mer_id));
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, Default)]
pub struct SolveOptions {
    pub span: Option<u32>,
    pub config: SolveConfig,
    pub out_dir: Option<PathBuf>,
    /// Also write the model file (format from the extension: `.lp` or MPS).
    pub model_path: Option<PathBuf>,
}


/// Everything a solve run produces.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub scenario: Scenario,
    pub backend: String,
    pub status: SolveStatus,
    pub objective: f64,
    pub gap: f64,
    pub breakdown: ObjectiveBreakdown,
    pub itineraries: Vec<Itinerary>,
    pub measured: SizeReport,
    pub formula: SizeReport,
    pub validation: ValidationReport,
    pub wall_time: Duration,
}

impl RunReport {
    /// Human-readable report, free of timing information.
    pub fn render(&self) -> String {
        let s = &self.scenario;
        let mut out = scenario_summary(s);
        let _ = writeln!(out, "backend: {}", self.backend);
        let _ = writeln!(out, "status: {}", self.status);
        let _ = writeln!(out, "objective: {:.6} kWh", self.objective);
        let _ = writeln!(out, "  restored energy: {:.6} kWh", self.breakdown.restored_kwh);
        let _ = writeln!(out, "  travel cost:     {:.6} kWh", self.breakdown.travel_cost_kwh);
        let _ = writeln!(out, "  reported gap:    {:e}", self.gap);
        let _ = writeln!(
            out,
            "model size (measured): {} binary, {} continuous, {} constraints",
            self.measured.binary,
            self.measured.continuous.unwrap_or(0),
            self.measured.constraints
        );
        let _ = writeln!(
            out,
            "model size (formula):  {} binary, {} continuous, {} constraints",
            self.formula.binary,
            self.formula.continuous.unwrap_or(0),
            self.formula.constraints
        );
        out.push_str("itineraries:\n");
        for (j, it) in self.itineraries.iter().enumerate() {
            out.push_str(&describe_itinerary(it, s, &s.travel_times(j)));
        }
        let _ = write!(out, "validation: {}", self.validation);
        out
    }

    pub fn exit_code(&self) -> i32 {
        if self.validation.is_valid() {
            0
        } else {
            EXIT_VALIDATION
        }
    }
}

/// Measured size of a built restoration model, restricted to the mobility
/// block so that it is comparable to the closed form.
pub fn measured_mobility_size(r: &RestorationModel) -> SizeReport {
    let s = &r.scenario;
    SizeReport {
        model: "proposed-measured",
        nodes: s.num_nodes() as u64,
        mers: s.num_mers() as u64,
        spans: u64::from(s.grid.num_spans),
        binary: r.mobility.num_binary() as u64,
        continuous: Some(r.mobility.num_continuous() as u64),
        constraints: r.mobility.num_constraints() as u64,
    }
}

fn emit_model(model: &MilpModel, path: &Path) -> Result<(), CliError> {
    let format = match path.extension().and_then(|e| e.to_str()) {
        Some("lp") | Some("LP") => ModelFormat::Lp,
        _ => ModelFormat::Mps,
    };
    model.emit(path, format).map_err(input_err)
}

/// Builds, solves, decodes and validates the restoration program; writes
/// `report.txt`, `solution.csv`, `itineraries.csv` and `sizes.csv` when an
/// output directory is given.
pub fn run_solve(scenario_path: &Path, options: &SolveOptions) -> Result<RunReport, CliError> {
    let scenario = load_with_span(scenario_path, options.span)?;
    solve_scenario(&scenario, options)
}

pub fn solve_scenario(scenario: &Scenario, options: &SolveOptions) -> Result<RunReport, CliError> {
    let restoration =
        build_restoration(scenario, TransitionCoefficients::canonical()).map_err(input_err)?;
    if let Some(path) = &options.model_path {
        emit_model(&restoration.model, path)?;
    }
    let started = Instant::now();
    let solution = solve(&restoration.model, &options.config)?;
    let wall_time = started.elapsed();
    if !solution.status.has_incumbent() {
        return Err(CliError::Solver(format!("solver finished without a solution: {}", solution.status)));
    }
    let itineraries = restoration
        .decode_itineraries(&solution)
        .map_err(|e| CliError::Validation(e.to_string()))?;
    let breakdown = restoration
        .objective_breakdown(&solution)
        .map_err(|e| CliError::Validation(e.to_string()))?;
    let validation = restoration.validate(&solution);
    let s = &restoration.scenario;
    let report = RunReport {
        scenario: scenario.clone(),
        backend: options.config.backend.to_string(),
        status: solution.status,
        objective: solution.objective_value,
        gap: solution.gap,
        breakdown,
        itineraries,
        measured: measured_mobility_size(&restoration),
        formula: size_proposed(s.num_nodes() as u64, s.num_mers() as u64, u64::from(s.grid.num_spans))
            .map_err(input_err)?,
        validation,
        wall_time,
    };
    if let Some(dir) = &options.out_dir {
        write_outputs(dir, &report, &restoration, &solution)?;
    }
    Ok(report)
}

fn out_file(dir: &Path, name: &str) -> Result<BufWriter<File>, CliError> {
    File::create(dir.join(name))
        .map(BufWriter::new)
        .map_err(|e| input_err(format!("cannot write {}: {e}", dir.join(name).display())))
}

fn write_outputs(
    dir: &Path,
    report: &RunReport,
    restoration: &RestorationModel,
    solution: &Solution,
) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| input_err(format!("cannot create {}: {e}", dir.display())))?;
    fs::write(dir.join("report.txt"), report.render()).map_err(input_err)?;
    write_values_csv(&restoration.model, solution, out_file(dir, "solution.csv")?).map_err(input_err)?;
    write_itineraries_csv(&report.itineraries, &report.scenario, out_file(dir, "itineraries.csv")?)
        .map_err(input_err)?;
    let s = &report.scenario;
    let mut sizes = size_all(
        s.num_nodes() as u64,
        s.num_mers() as u64,
        u64::from(s.grid.num_spans),
        &s.travel_times(0),
    )
    .unwrap_or_else(|_| vec![report.formula.clone()]);
    sizes.push(report.measured.clone());
    write_sizes_csv(&sizes, out_file(dir, "sizes.csv")?).map_err(input_err)?;
    Ok(())
}

/// Best itinerary of a small scenario, found by exhaustive search.
#[derive(Debug, Clone)]
pub struct OracleReport {
    pub scenario: Scenario,
    pub itineraries: Vec<Itinerary>,
    pub objective: f64,
}

impl OracleReport {
    pub fn render(&self) -> String {
        let s = &self.scenario;
        let mut out = scenario_summary(s);
        let _ = writeln!(out, "oracle objective: {:.6} kWh", self.objective);
        for (j, it) in self.itineraries.iter().enumerate() {
            out.push_str(&describe_itinerary(it, s, &s.travel_times(j)));
        }
        out
    }
}

pub fn run_oracle(scenario_path: &Path, span: Option<u32>) -> Result<OracleReport, CliError> {
    let scenario = load_with_span(scenario_path, span)?;
    let (itineraries, objective) = best_itinerary(&scenario)?;
    Ok(OracleReport {
        scenario,
        itineraries,
        objective,
    })
}

/// Parameters for the size table; missing values come from the scenario.
#[derive(Debug, Clone, Default)]
pub struct SizesRequest {
    pub nodes: Option<u64>,
    pub mers: Option<u64>,
    pub spans: Option<u64>,
    pub scenario: Option<PathBuf>,
    pub span: Option<u32>,
}

/// Formula sizes of all four models, plus the measured size of the proposed
/// model when a scenario is given. Without a scenario the baselines use unit
/// travel times.
pub fn run_sizes(request: &SizesRequest) -> Result<Vec<SizeReport>, CliError> {
    let scenario = match &request.scenario {
        Some(p) => Some(load_with_span(p, request.span)?),
        None => None,
    };
    let pick = |given: Option<u64>, from: Option<u64>, name: &str| {
        given
            .or(from)
            .ok_or_else(|| CliError::Input(format!("{name} is required without a scenario")))
    };
    let n = pick(request.nodes, scenario.as_ref().map(|s| s.num_nodes() as u64), "--nodes")?;
    let m = pick(request.mers, scenario.as_ref().map(|s| s.num_mers() as u64), "--mers")?;
    let d = pick(request.spans, scenario.as_ref().map(|s| u64::from(s.grid.num_spans)), "--spans")?;
    let travel = match &scenario {
        Some(s) if s.num_nodes() as u64 == n => s.travel_times(0),
        Some(_) => return Err(CliError::Input("--nodes must match the scenario's node count".into())),
        None => uniform_travel_times(n as usize, 1),
    };
    let mut reports = size_all(n, m, d, &travel).map_err(input_err)?;
    if let Some(s) = &scenario {
        if s.num_mers() as u64 == m && u64::from(s.grid.num_spans) == d {
            let built = build_restoration(s, TransitionCoefficients::canonical()).map_err(input_err)?;
            reports.push(measured_mobility_size(&built));
        }
    }
    Ok(reports)
}

pub fn sizes_csv(reports: &[SizeReport]) -> String {
    let mut buf = Vec::new();
    write_sizes_csv(reports, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("csv is UTF-8")
}

/// Shipped tuple, LP-derived tuple, inequality margins and class replay.
pub fn run_coeffs() -> (String, bool) {
    let mut out = String::new();
    let mut ok = true;
    let shipped = TransitionCoefficients::canonical();
    let derived = derive_transition_coefficients(None);
    for (label, c) in [("shipped", shipped), ("LP-derived", derived)] {
        let bad = check_coefficients(&c);
        ok &= bad.is_empty();
        let _ = writeln!(out, "{label}: {c}");
        for m in coefficient_margins(&c) {
            // Rounding noise must not print as a negative zero margin.
            let margin = if m.margin.abs() < 1e-12 { 0.0 } else { m.margin };
            let _ = writeln!(out, "  {:<18} margin {:+.3}", m.name, margin);
        }
        let _ = writeln!(out, "  check: {}", if bad.is_empty() { "pass" } else { "FAIL" });
        for k in replay_transition_classes(&c) {
            ok &= k.ok;
            let _ = writeln!(
                out,
                "  class (d1={:+}, d2={:+}): D={:+.2} U={:+.2} {}",
                k.d1,
                k.d2,
                k.down,
                k.up,
                if k.ok { "ok" } else { "OUT OF RANGE" }
            );
        }
    }
    (out, ok)
}

/// Checks a `var,value` solution file against a scenario's restoration model.
pub fn run_validate(
    scenario_path: &Path,
    solution_path: &Path,
    span: Option<u32>,
) -> Result<ValidationReport, CliError> {
    let scenario = load_with_span(scenario_path, span)?;
    let restoration =
        build_restoration(&scenario, TransitionCoefficients::canonical()).map_err(input_err)?;
    let file = File::open(solution_path)
        .map_err(|e| input_err(format!("cannot read {}: {e}", solution_path.display())))?;
    let values = read_values_csv(file).map_err(input_err)?;
    let solution = Solution::from_named(&restoration.model, SolveStatus::Optimal, &values, 0.0)
        .map_err(input_err)?;
    let mut report = restoration.validate(&solution);
    if let Ok(its) = restoration.decode_itineraries(&solution) {
        report.warnings.extend(idle_travel(&its, &scenario));
    }
    Ok(report)
}
