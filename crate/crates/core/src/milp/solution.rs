use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, Read, Write};
use std::str::FromStr;

use super::{MilpModel, ModelError, VarId, VarKind};

/// Binary values within this distance of 0 or 1 are considered integral.
pub const INTEGRALITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    /// Proven optimal within the configured MIP gap.
    Optimal,
    Infeasible,
    /// Stopped with an incumbent whose gap exceeds the configured MIP gap.
    GapLimit,
    TimeLimit,
}

impl SolveStatus {
    pub fn has_incumbent(self) -> bool {
        matches!(self, SolveStatus::Optimal | SolveStatus::GapLimit)
    }
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::GapLimit => "gap-limit",
            SolveStatus::TimeLimit => "time-limit",
        })
    }
}

impl FromStr for SolveStatus {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "optimal" => Ok(SolveStatus::Optimal),
            "infeasible" => Ok(SolveStatus::Infeasible),
            "gap-limit" | "gap_limit" => Ok(SolveStatus::GapLimit),
            "time-limit" | "time_limit" => Ok(SolveStatus::TimeLimit),
            other => Err(format!("unknown solve status `{other}`")),
        }
    }
}

/// Result of a solve. `values` is indexed by [`VarId`] and is empty when no
/// incumbent exists; `objective_value` and `gap` are NaN in that case.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub status: SolveStatus,
    pub objective_value: f64,
    pub values: Vec<f64>,
    pub gap: f64,
}

impl Solution {
    pub fn infeasible() -> Self {
        Solution {
            status: SolveStatus::Infeasible,
            objective_value: f64::NAN,
            values: Vec::new(),
            gap: f64::NAN,
        }
    }

    pub fn value(&self, v: VarId) -> f64 {
        self.values[v.index()]
    }

    /// Value of a binary variable snapped to {0, 1}, or `None` when it is not
    /// within [`INTEGRALITY_TOL`] of either.
    pub fn binary(&self, v: VarId) -> Option<bool> {
        let x = self.values[v.index()];
        if x.abs() <= INTEGRALITY_TOL {
            Some(false)
        } else if (x - 1.0).abs() <= INTEGRALITY_TOL {
            Some(true)
        } else {
            None
        }
    }

    /// Copy with every binary snapped to {0, 1}; errors on the first
    /// non-integral binary.
    pub fn snapped(&self, model: &MilpModel) -> Result<Solution, String> {
        let mut out = self.clone();
        for (j, var) in model.variables().iter().enumerate() {
            if var.kind == VarKind::Binary {
                match self.binary(VarId(j)) {
                    Some(b) => out.values[j] = if b { 1.0 } else { 0.0 },
                    None => {
                        return Err(format!(
                            "binary `{}` has non-integral value {}",
                            var.name, self.values[j]
                        ))
                    }
                }
            }
        }
        Ok(out)
    }

    /// Builds a solution from named values. Columns missing from `named` are 0.
    pub fn from_named(
        model: &MilpModel,
        status: SolveStatus,
        named: &HashMap<String, f64>,
        gap: f64,
    ) -> Result<Solution, ModelError> {
        let mut values = vec![0.0; model.num_vars()];
        for (name, &x) in named {
            let id = model.var_id(name).ok_or_else(|| ModelError::Syntax {
                line: 0,
                message: format!("solution names unknown variable `{name}`"),
            })?;
            values[id.index()] = x;
        }
        let objective_value = model.objective_value(&values);
        Ok(Solution {
            status,
            objective_value,
            values,
            gap,
        })
    }
}

/// Header fields and values of a `<name> <value>` solution file.
#[derive(Debug, Clone, Default)]
pub struct SolutionFile {
    pub status: Option<SolveStatus>,
    pub objective: Option<f64>,
    pub gap: Option<f64>,
    pub values: HashMap<String, f64>,
}

/// Parses a `<name> <value>` solution file. Lines starting with `#` are
/// comments; `# Status = ...`, `# Objective value = ...` and `# MIP gap = ...`
/// are recognized as header fields.
pub fn read_solution_file<R: BufRead>(input: R) -> Result<SolutionFile, ModelError> {
    let mut out = SolutionFile::default();
    for (lineno, line) in input.lines().enumerate() {
        let line = line?;
        let lineno = lineno + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(comment) = trimmed.strip_prefix('#') {
            if let Some((key, value)) = comment.split_once('=') {
                let key = key.trim().to_ascii_lowercase();
                let value = value.trim();
                let num = || super::parse_num(value, lineno);
                match key.as_str() {
                    "status" => {
                        out.status = Some(value.parse().map_err(|message| ModelError::Syntax {
                            line: lineno,
                            message,
                        })?)
                    }
                    "objective value" | "objective" => out.objective = Some(num()?),
                    "mip gap" | "gap" => out.gap = Some(num()?),
                    _ => {}
                }
            }
            continue;
        }
        let mut fields = trimmed.split_whitespace();
        let (Some(name), Some(value), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(ModelError::Syntax {
                line: lineno,
                message: "expected `<name> <value>`".into(),
            });
        };
        out.values
            .insert(name.to_string(), super::parse_num(value, lineno)?);
    }
    Ok(out)
}

/// Writes `var,value` rows in model order.
pub fn write_values_csv<W: Write>(
    model: &MilpModel,
    solution: &Solution,
    out: W,
) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["var", "value"])?;
    for (var, x) in model.variables().iter().zip(&solution.values) {
        w.write_record([var.name.as_str(), &super::fmt_num(*x)])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads `var,value` rows written by [`write_values_csv`].
pub fn read_values_csv<R: Read>(input: R) -> Result<HashMap<String, f64>, csv::Error> {
    let mut r = csv::Reader::from_reader(input);
    let mut out = HashMap::new();
    for row in r.deserialize() {
        let (name, value): (String, f64) = row?;
        out.insert(name, value);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_header_and_values() {
        let text = "# Status = optimal\n# Objective value = 12.5\n# MIP gap = 0\nx 1\ny 0.5\n";
        let f = read_solution_file(text.as_bytes()).unwrap();
        assert_eq!(f.status, Some(SolveStatus::Optimal));
        assert_eq!(f.objective, Some(12.5));
        assert_eq!(f.gap, Some(0.0));
        assert_eq!(f.values["y"], 0.5);
    }

    #[test]
    fn rejects_garbage_lines() {
        assert!(read_solution_file("x 1 2\n".as_bytes()).is_err());
        assert!(read_solution_file("x one\n".as_bytes()).is_err());
    }

    #[test]
    fn snapping_respects_tolerance() {
        let mut m = MilpModel::new("t");
        let x = m.add_binary("x").unwrap();
        let sol = Solution {
            status: SolveStatus::Optimal,
            objective_value: 0.0,
            values: vec![1.0 - 5e-7],
            gap: 0.0,
        };
        assert_eq!(sol.binary(x), Some(true));
        assert_eq!(sol.snapped(&m).unwrap().values, vec![1.0]);
        let off = Solution {
            values: vec![0.4],
            ..sol
        };
        assert!(off.snapped(&m).is_err());
    }

    #[test]
    fn values_csv_round_trips() {
        let mut m = MilpModel::new("t");
        m.add_binary("x").unwrap();
        m.add_continuous("s", 0.0, 9.0).unwrap();
        let sol = Solution {
            status: SolveStatus::Optimal,
            objective_value: 0.0,
            values: vec![1.0, 1.0 / 3.0],
            gap: 0.0,
        };
        let mut buf = Vec::new();
        write_values_csv(&m, &sol, &mut buf).unwrap();
        let back = read_values_csv(buf.as_slice()).unwrap();
        assert_eq!(back["s"], 1.0 / 3.0);
        assert_eq!(back["x"], 1.0);
    }
}
