//! Solver backends behind one contract: consume a [`MilpModel`], produce a
//! [`Solution`].
//!
//! * [`Backend::External`] writes the model as MPS into a temporary directory
//!   and runs a configured command. The command may use the placeholders
//!   `{model}`, `{solution}`, `{gap}` and `{time_limit}`; when it uses none of
//!   them, the four values are appended in that order. The command must write
//!   a `<name> <value>` solution file, optionally with `# Status = ...`,
//!   `# Objective value = ...` and `# MIP gap = ...` header lines.
//! * [`Backend::ExactEnumeration`] answers restoration models on small
//!   scenarios with the oracle's optimal itinerary.

use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;
use std::process::Command;
use std::str::FromStr;

use thiserror::Error;

use crate::milp::{
    read_solution_file, MilpModel, ModelError, ModelFormat, Solution, SolveStatus,
};
use crate::oracle::{best_itinerary, encode_itinerary, OracleError};
use crate::restoration::FEASIBILITY_TOL;

/// Environment variable holding the external solver command.
pub const SOLVER_CMD_ENV: &str = "MER_SOLVER_CMD";

/// Default relative MIP gap.
pub const DEFAULT_MIP_GAP: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Backend {
    /// External executable; `None` falls back to `MER_SOLVER_CMD`, then to
    /// the bundled script when it and `python3` are present.
    External { command: Option<String> },
    ExactEnumeration,
}

impl FromStr for Backend {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "external" => Ok(Backend::External { command: None }),
            "exact-enumeration" => Ok(Backend::ExactEnumeration),
            other => Err(format!(
                "unknown backend `{other}` (expected `external` or `exact-enumeration`)"
            )),
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::External { .. } => "external",
            Backend::ExactEnumeration => "exact-enumeration",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveConfig {
    pub mip_gap: f64,
    pub time_limit_s: Option<f64>,
    pub backend: Backend,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            mip_gap: DEFAULT_MIP_GAP,
            time_limit_s: None,
            backend: Backend::External { command: None },
        }
    }
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("solver backend unavailable: {0}")]
    Unavailable(String),
    #[error("exact enumeration rejected the model: {0}")]
    SizeGuard(OracleError),
    #[error("exact enumeration needs a model built from a restoration scenario")]
    NotRestoration,
    #[error("exact enumeration produced an assignment the model rejects ({0} violated rows)")]
    Inconsistent(usize),
    #[error("solver command failed ({status}): {stderr}")]
    Failed { status: String, stderr: String },
    #[error("cannot read solver output: {0}")]
    Output(#[from] ModelError),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

/// Path of the bundled HiGHS driver script.
pub fn bundled_script() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scripts").join("highs_solve.py")
}

/// Resolves the external command: explicit, then environment, then the
/// bundled script.
pub fn resolve_external_command(explicit: Option<&str>) -> Result<String, SolveError> {
    if let Some(cmd) = explicit.filter(|c| !c.trim().is_empty()) {
        return Ok(cmd.to_string());
    }
    if let Ok(cmd) = std::env::var(SOLVER_CMD_ENV) {
        if !cmd.trim().is_empty() {
            return Ok(cmd);
        }
    }
    let script = bundled_script();
    let python = Command::new("python3").arg("--version").output();
    if script.is_file() && python.is_ok_and(|o| o.status.success()) {
        return Ok(format!("python3 {}", shell_quote(&script.display().to_string())));
    }
    Err(SolveError::Unavailable(format!(
        "no solver command given; set {SOLVER_CMD_ENV} or pass one explicitly"
    )))
}

fn shell_quote(s: &str) -> String {
    format!("'{}'", s.replace('\'', r"'\''"))
}

/// True when some variable has an empty bound interval.
fn has_contradictory_bounds(model: &MilpModel) -> bool {
    model.variables().iter().any(|v| v.lower > v.upper)
}

pub fn solve(model: &MilpModel, config: &SolveConfig) -> Result<Solution, SolveError> {
    if has_contradictory_bounds(model) {
        return Ok(Solution::infeasible());
    }
    match &config.backend {
        Backend::ExactEnumeration => solve_exact(model),
        Backend::External { command } => {
            let command = resolve_external_command(command.as_deref())?;
            solve_external(model, config, &command)
        }
    }
}

fn solve_exact(model: &MilpModel) -> Result<Solution, SolveError> {
    let scenario = model.origin().ok_or(SolveError::NotRestoration)?;
    let (joint, _) = best_itinerary(scenario).map_err(SolveError::SizeGuard)?;
    let encoded = encode_itinerary(&joint, scenario).map_err(SolveError::SizeGuard)?;
    let named: HashMap<String, f64> = encoded.named_values(scenario).into_iter().collect();
    if named.len() != model.num_vars() || named.keys().any(|k| model.var_id(k).is_none()) {
        return Err(SolveError::NotRestoration);
    }
    let solution = Solution::from_named(model, SolveStatus::Optimal, &named, 0.0)?;
    let violated = model.violated_constraints(&solution.values, FEASIBILITY_TOL);
    if !violated.is_empty() {
        return Err(SolveError::Inconsistent(violated.len()));
    }
    Ok(solution)
}

fn solve_external(model: &MilpModel, config: &SolveConfig, command: &str) -> Result<Solution, SolveError> {
    let dir = tempfile::tempdir()?;
    let model_path = dir.path().join("model.mps");
    let solution_path = dir.path().join("solution.sol");
    model.emit(&model_path, ModelFormat::Mps)?;

    let time_limit = config
        .time_limit_s
        .map_or_else(|| "inf".to_string(), |t| t.to_string());
    let fields = [
        ("{model}", shell_quote(&model_path.display().to_string())),
        ("{solution}", shell_quote(&solution_path.display().to_string())),
        ("{gap}", config.mip_gap.to_string()),
        ("{time_limit}", time_limit),
    ];
    let mut line = command.to_string();
    if fields.iter().any(|(p, _)| line.contains(p)) {
        for (p, v) in &fields {
            line = line.replace(p, v);
        }
    } else {
        for (_, v) in &fields {
            line.push(' ');
            line.push_str(v);
        }
    }

    let output = Command::new("sh")
        .arg("-c")
        .arg(&line)
        .output()
        .map_err(|e| SolveError::Unavailable(format!("cannot run `{line}`: {e}")))?;
    if !output.status.success() {
        return Err(SolveError::Failed {
            status: output.status.to_string(),
            stderr: String::from_utf8_lossy(&output.stderr).trim().to_string(),
        });
    }
    let file = File::open(&solution_path).map_err(|e| SolveError::Failed {
        status: "no solution file".into(),
        stderr: e.to_string(),
    })?;
    let parsed = read_solution_file(BufReader::new(file))?;

    let status = parsed.status.unwrap_or(SolveStatus::Optimal);
    if status == SolveStatus::Infeasible || (status == SolveStatus::TimeLimit && parsed.values.is_empty()) {
        let mut s = Solution::infeasible();
        s.status = status;
        return Ok(s);
    }
    if parsed.values.is_empty() {
        return Err(SolveError::Failed {
            status: status.to_string(),
            stderr: "solution file lists no values".into(),
        });
    }
    let gap = parsed.gap.unwrap_or(0.0);
    let status = if status == SolveStatus::Optimal && gap > config.mip_gap + 1e-12 {
        SolveStatus::GapLimit
    } else {
        status
    };
    let mut solution = Solution::from_named(model, status, &parsed.values, gap)?;
    // clean solver round-off on binaries so that decoding sees exact labels
    if let Ok(snapped) = solution.snapped(model) {
        solution = snapped;
        solution.objective_value = model.objective_value(&solution.values);
    }
    Ok(solution)
}
