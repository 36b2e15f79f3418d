//! Solver-neutral mixed-integer linear model.
//!
//! Constraint and objective terms are normalized on insertion: duplicate
//! variables are merged, exact zeros dropped, and terms sorted by variable.
//! This keeps model files round-trippable term for term.

mod lp;
mod mps;
mod solution;

use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use thiserror::Error;

use crate::scenario::Scenario;

pub use lp::{read_lp, write_lp};
pub use mps::{read_mps, write_mps};
pub use solution::{read_solution_file, read_values_csv, write_values_csv, Solution, SolveStatus};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("variable `{0}` is already registered")]
    DuplicateVariable(String),
    #[error("constraint `{0}` is already registered")]
    DuplicateConstraint(String),
    #[error("invalid name `{0}`: use ASCII letters, digits, `_` or `.`, not starting with a digit")]
    InvalidName(String),
    #[error("binary variable `{0}` must have bounds [0, 1]")]
    BinaryBounds(String),
    #[error("variable `{0}` has NaN bounds")]
    NanBounds(String),
    #[error("constraint `{0}` has no nonzero terms")]
    EmptyConstraint(String),
    #[error("constraint `{0}` has a non-finite coefficient or right-hand side")]
    NonFinite(String),
    #[error("unknown variable handle {0}")]
    UnknownVariable(usize),
    #[error("model has no variables")]
    EmptyModel,
    #[error("model file I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("model file line {line}: {message}")]
    Syntax { line: usize, message: String },
}

/// Opaque handle to a registered variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(usize);

impl VarId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Binary,
    Continuous,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinConstraint {
    pub name: String,
    pub terms: Vec<(f64, VarId)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl LinConstraint {
    pub fn activity(&self, values: &[f64]) -> f64 {
        self.terms.iter().map(|&(c, v)| c * values[v.0]).sum()
    }

    /// Amount by which `values` violate the constraint (0 when satisfied).
    pub fn violation(&self, values: &[f64]) -> f64 {
        let lhs = self.activity(values);
        match self.sense {
            Sense::Le => (lhs - self.rhs).max(0.0),
            Sense::Ge => (self.rhs - lhs).max(0.0),
            Sense::Eq => (lhs - self.rhs).abs(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjectiveSense {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Objective {
    pub sense: ObjectiveSense,
    pub terms: Vec<(f64, VarId)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelFormat {
    Mps,
    Lp,
}

#[derive(Debug, Clone)]
pub struct MilpModel {
    name: String,
    vars: Vec<Variable>,
    by_name: HashMap<String, VarId>,
    constraints: Vec<LinConstraint>,
    constraint_names: HashMap<String, usize>,
    objective: Objective,
    origin: Option<Arc<Scenario>>,
}

impl PartialEq for MilpModel {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.vars == other.vars
            && self.constraints == other.constraints
            && self.objective == other.objective
    }
}

fn valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    name.len() <= 255 && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.')
}

fn normalize(terms: impl IntoIterator<Item = (f64, VarId)>) -> Vec<(f64, VarId)> {
    let mut merged: Vec<(f64, VarId)> = Vec::new();
    let mut sorted: Vec<(f64, VarId)> = terms.into_iter().collect();
    sorted.sort_by_key(|&(_, v)| v);
    for (c, v) in sorted {
        match merged.last_mut() {
            Some(last) if last.1 == v => last.0 += c,
            _ => merged.push((c, v)),
        }
    }
    merged.retain(|&(c, _)| c != 0.0);
    merged
}

impl MilpModel {
    pub fn new(name: impl Into<String>) -> Self {
        MilpModel {
            name: name.into(),
            vars: Vec::new(),
            by_name: HashMap::new(),
            constraints: Vec::new(),
            constraint_names: HashMap::new(),
            objective: Objective {
                sense: ObjectiveSense::Minimize,
                terms: Vec::new(),
            },
            origin: None,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn add_var(
        &mut self,
        name: impl Into<String>,
        kind: VarKind,
        lower: f64,
        upper: f64,
    ) -> Result<VarId, ModelError> {
        let name = name.into();
        if !valid_name(&name) {
            return Err(ModelError::InvalidName(name));
        }
        if self.by_name.contains_key(&name) {
            return Err(ModelError::DuplicateVariable(name));
        }
        if lower.is_nan() || upper.is_nan() {
            return Err(ModelError::NanBounds(name));
        }
        if kind == VarKind::Binary && (lower != 0.0 || upper != 1.0) {
            return Err(ModelError::BinaryBounds(name));
        }
        let id = VarId(self.vars.len());
        self.by_name.insert(name.clone(), id);
        self.vars.push(Variable {
            name,
            kind,
            lower,
            upper,
        });
        Ok(id)
    }

    pub fn add_binary(&mut self, name: impl Into<String>) -> Result<VarId, ModelError> {
        self.add_var(name, VarKind::Binary, 0.0, 1.0)
    }

    pub fn add_continuous(
        &mut self,
        name: impl Into<String>,
        lower: f64,
        upper: f64,
    ) -> Result<VarId, ModelError> {
        self.add_var(name, VarKind::Continuous, lower, upper)
    }

    fn check_terms(&self, terms: &[(f64, VarId)]) -> Result<(), ModelError> {
        for &(_, v) in terms {
            if v.0 >= self.vars.len() {
                return Err(ModelError::UnknownVariable(v.0));
            }
        }
        Ok(())
    }

    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        terms: impl IntoIterator<Item = (f64, VarId)>,
        sense: Sense,
        rhs: f64,
    ) -> Result<usize, ModelError> {
        let name = name.into();
        if !valid_name(&name) {
            return Err(ModelError::InvalidName(name));
        }
        if self.constraint_names.contains_key(&name) {
            return Err(ModelError::DuplicateConstraint(name));
        }
        let terms = normalize(terms);
        self.check_terms(&terms)?;
        if terms.is_empty() {
            return Err(ModelError::EmptyConstraint(name));
        }
        if !rhs.is_finite() || terms.iter().any(|(c, _)| !c.is_finite()) {
            return Err(ModelError::NonFinite(name));
        }
        let idx = self.constraints.len();
        self.constraint_names.insert(name.clone(), idx);
        self.constraints.push(LinConstraint {
            name,
            terms,
            sense,
            rhs,
        });
        Ok(idx)
    }

    pub fn set_objective(
        &mut self,
        sense: ObjectiveSense,
        terms: impl IntoIterator<Item = (f64, VarId)>,
    ) -> Result<(), ModelError> {
        let terms = normalize(terms);
        self.check_terms(&terms)?;
        if terms.iter().any(|(c, _)| !c.is_finite()) {
            return Err(ModelError::NonFinite("objective".into()));
        }
        self.objective = Objective { sense, terms };
        Ok(())
    }

    pub fn variables(&self) -> &[Variable] {
        &self.vars
    }

    pub fn var(&self, id: VarId) -> &Variable {
        &self.vars[id.0]
    }

    pub fn var_id(&self, name: &str) -> Option<VarId> {
        self.by_name.get(name).copied()
    }

    pub fn constraints(&self) -> &[LinConstraint] {
        &self.constraints
    }

    pub fn objective(&self) -> &Objective {
        &self.objective
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_binary(&self) -> usize {
        self.vars.iter().filter(|v| v.kind == VarKind::Binary).count()
    }

    pub fn num_continuous(&self) -> usize {
        self.vars.iter().filter(|v| v.kind == VarKind::Continuous).count()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    /// Scenario this model was generated from, if any.
    pub fn origin(&self) -> Option<&Arc<Scenario>> {
        self.origin.as_ref()
    }

    pub fn set_origin(&mut self, scenario: Arc<Scenario>) {
        self.origin = Some(scenario);
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective.terms.iter().map(|&(c, v)| c * values[v.0]).sum()
    }

    /// Indices of constraints violated by more than `tol`, including variable
    /// bounds and integrality, which are reported as `usize::MAX`.
    pub fn violated_constraints(&self, values: &[f64], tol: f64) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .constraints
            .iter()
            .enumerate()
            .filter(|(_, c)| c.violation(values) > tol)
            .map(|(i, _)| i)
            .collect();
        let bad_var = self.vars.iter().zip(values).any(|(v, &x)| {
            x < v.lower - tol
                || x > v.upper + tol
                || (v.kind == VarKind::Binary && (x - x.round()).abs() > tol)
        });
        if bad_var {
            out.push(usize::MAX);
        }
        out
    }

    pub fn is_feasible(&self, values: &[f64], tol: f64) -> bool {
        values.len() == self.vars.len() && self.violated_constraints(values, tol).is_empty()
    }

    /// Writes the model in the chosen text format.
    pub fn emit(&self, path: impl AsRef<Path>, format: ModelFormat) -> Result<(), ModelError> {
        if self.vars.is_empty() {
            return Err(ModelError::EmptyModel);
        }
        let mut out = BufWriter::new(File::create(path)?);
        match format {
            ModelFormat::Mps => write_mps(self, &mut out)?,
            ModelFormat::Lp => write_lp(self, &mut out)?,
        }
        out.flush()?;
        Ok(())
    }
}

/// Shortest decimal form that parses back to the same `f64`.
pub(crate) fn fmt_num(x: f64) -> String {
    if x == x.trunc() && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x:?}")
    }
}

pub(crate) fn parse_num(tok: &str, line: usize) -> Result<f64, ModelError> {
    let lower = tok.to_ascii_lowercase();
    let v = match lower.as_str() {
        "inf" | "+inf" | "infinity" | "+infinity" => f64::INFINITY,
        "-inf" | "-infinity" => f64::NEG_INFINITY,
        _ => tok.parse::<f64>().map_err(|_| ModelError::Syntax {
            line,
            message: format!("expected a number, found `{tok}`"),
        })?,
    };
    Ok(v)
}
