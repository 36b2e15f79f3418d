//! MPS reader and writer.
//!
//! Sections follow the classic fixed layout (NAME, OBJSENSE, ROWS, COLUMNS,
//! RHS, BOUNDS, ENDATA) with one entry per line. Fields are separated by
//! whitespace because generated names are longer than eight characters.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use super::{fmt_num, parse_num, MilpModel, ModelError, ObjectiveSense, Sense, VarKind};

pub fn write_mps<W: Write>(model: &MilpModel, out: &mut W) -> Result<(), ModelError> {
    let mut obj_row = String::from("OBJ");
    while model.constraint_names.contains_key(&obj_row) {
        obj_row.push('_');
    }

    writeln!(out, "NAME          {}", model.name())?;
    if model.objective().sense == ObjectiveSense::Maximize {
        writeln!(out, "OBJSENSE")?;
        writeln!(out, "    MAX")?;
    }
    writeln!(out, "ROWS")?;
    writeln!(out, " N  {obj_row}")?;
    for c in model.constraints() {
        let tag = match c.sense {
            Sense::Le => 'L',
            Sense::Ge => 'G',
            Sense::Eq => 'E',
        };
        writeln!(out, " {tag}  {}", c.name)?;
    }

    // column-major view of the constraint matrix
    let mut columns: Vec<Vec<(usize, f64)>> = vec![Vec::new(); model.num_vars()];
    for (row, c) in model.constraints().iter().enumerate() {
        for &(coef, v) in &c.terms {
            columns[v.index()].push((row, coef));
        }
    }
    let mut obj = vec![0.0; model.num_vars()];
    for &(coef, v) in &model.objective().terms {
        obj[v.index()] = coef;
    }

    writeln!(out, "COLUMNS")?;
    let mut in_int = false;
    for (j, var) in model.variables().iter().enumerate() {
        let is_int = var.kind == VarKind::Binary;
        if is_int != in_int {
            let tag = if is_int { "'INTORG'" } else { "'INTEND'" };
            writeln!(out, "    MARKER    'MARKER'    {tag}")?;
            in_int = is_int;
        }
        // every column carries an objective entry so that it is declared
        writeln!(out, "    {:<12}  {:<12}  {}", var.name, obj_row, fmt_num(obj[j]))?;
        for &(row, coef) in &columns[j] {
            writeln!(
                out,
                "    {:<12}  {:<12}  {}",
                var.name,
                model.constraints()[row].name,
                fmt_num(coef)
            )?;
        }
    }
    if in_int {
        writeln!(out, "    MARKER    'MARKER'    'INTEND'")?;
    }

    writeln!(out, "RHS")?;
    for c in model.constraints() {
        if c.rhs != 0.0 {
            writeln!(out, "    RHS       {:<12}  {}", c.name, fmt_num(c.rhs))?;
        }
    }

    writeln!(out, "BOUNDS")?;
    for var in model.variables() {
        let name = &var.name;
        if var.kind == VarKind::Binary {
            writeln!(out, " BV BND       {name}")?;
            continue;
        }
        let (lo, hi) = (var.lower, var.upper);
        if lo == 0.0 && hi == f64::INFINITY {
            continue;
        }
        if lo == f64::NEG_INFINITY && hi == f64::INFINITY {
            writeln!(out, " FR BND       {name}")?;
        } else if lo == hi {
            writeln!(out, " FX BND       {name}  {}", fmt_num(lo))?;
        } else {
            if lo == f64::NEG_INFINITY {
                writeln!(out, " MI BND       {name}")?;
            } else {
                writeln!(out, " LO BND       {name}  {}", fmt_num(lo))?;
            }
            if hi != f64::INFINITY {
                writeln!(out, " UP BND       {name}  {}", fmt_num(hi))?;
            }
        }
    }
    writeln!(out, "ENDATA")?;
    Ok(())
}

#[derive(PartialEq)]
enum Section {
    Start,
    ObjSense,
    Rows,
    Columns,
    Rhs,
    Bounds,
    End,
}

struct ColumnData {
    name: String,
    integer: bool,
    lower: f64,
    upper: f64,
    explicit_lower: bool,
    binary: bool,
    entries: Vec<(usize, f64)>,
    objective: f64,
}

/// Reads an MPS model (the subset produced by [`write_mps`], plus free-format
/// spacing). RANGES and general integer columns are not supported.
pub fn read_mps<R: BufRead>(input: R) -> Result<MilpModel, ModelError> {
    let mut section = Section::Start;
    let mut name = String::new();
    let mut sense = ObjectiveSense::Minimize;
    let mut obj_row: Option<String> = None;
    let mut rows: Vec<(String, Sense)> = Vec::new();
    let mut row_index: HashMap<String, usize> = HashMap::new();
    let mut rhs: Vec<f64> = Vec::new();
    let mut cols: Vec<ColumnData> = Vec::new();
    let mut col_index: HashMap<String, usize> = HashMap::new();
    let mut in_int = false;

    let syntax = |line: usize, message: String| ModelError::Syntax { line, message };

    for (lineno, line) in input.lines().enumerate() {
        let line = line?;
        let lineno = lineno + 1;
        if line.trim().is_empty() || line.starts_with('*') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if !line.starts_with(char::is_whitespace) {
            let head = fields[0].to_ascii_uppercase();
            section = match head.as_str() {
                "NAME" => {
                    name = fields.get(1).unwrap_or(&"").to_string();
                    Section::Start
                }
                "OBJSENSE" => {
                    if let Some(s) = fields.get(1) {
                        sense = parse_sense(s, lineno)?;
                        Section::Start
                    } else {
                        Section::ObjSense
                    }
                }
                "ROWS" => Section::Rows,
                "COLUMNS" => Section::Columns,
                "RHS" => Section::Rhs,
                "BOUNDS" => Section::Bounds,
                "ENDATA" => Section::End,
                "RANGES" => return Err(syntax(lineno, "RANGES are not supported".into())),
                // some writers put OBJSENSE values flush left
                "MAX" | "MAXIMIZE" | "MIN" | "MINIMIZE" if section == Section::ObjSense => {
                    sense = parse_sense(&head, lineno)?;
                    Section::Start
                }
                other => return Err(syntax(lineno, format!("unknown section `{other}`"))),
            };
            if section == Section::End {
                break;
            }
            continue;
        }
        match section {
            Section::ObjSense => {
                sense = parse_sense(fields[0], lineno)?;
                section = Section::Start;
            }
            Section::Rows => {
                if fields.len() != 2 {
                    return Err(syntax(lineno, "ROWS entries need a type and a name".into()));
                }
                let row_sense = match fields[0].to_ascii_uppercase().as_str() {
                    "N" => {
                        if obj_row.is_none() {
                            obj_row = Some(fields[1].to_string());
                        }
                        continue;
                    }
                    "L" => Sense::Le,
                    "G" => Sense::Ge,
                    "E" => Sense::Eq,
                    t => return Err(syntax(lineno, format!("unknown row type `{t}`"))),
                };
                row_index.insert(fields[1].to_string(), rows.len());
                rows.push((fields[1].to_string(), row_sense));
                rhs.push(0.0);
            }
            Section::Columns => {
                if fields.len() >= 3 && fields[1] == "'MARKER'" {
                    match fields[2] {
                        "'INTORG'" => in_int = true,
                        "'INTEND'" => in_int = false,
                        m => return Err(syntax(lineno, format!("unknown marker {m}"))),
                    }
                    continue;
                }
                if fields.len() != 3 && fields.len() != 5 {
                    return Err(syntax(lineno, "COLUMNS entries need 3 or 5 fields".into()));
                }
                let j = *col_index.entry(fields[0].to_string()).or_insert_with(|| {
                    cols.push(ColumnData {
                        name: fields[0].to_string(),
                        integer: in_int,
                        lower: 0.0,
                        upper: f64::INFINITY,
                        explicit_lower: false,
                        binary: false,
                        entries: Vec::new(),
                        objective: 0.0,
                    });
                    cols.len() - 1
                });
                for pair in fields[1..].chunks(2) {
                    let value = parse_num(pair[1], lineno)?;
                    if Some(pair[0]) == obj_row.as_deref() {
                        cols[j].objective += value;
                    } else {
                        let row = *row_index
                            .get(pair[0])
                            .ok_or_else(|| syntax(lineno, format!("unknown row `{}`", pair[0])))?;
                        cols[j].entries.push((row, value));
                    }
                }
            }
            Section::Rhs => {
                let pairs = if fields.len() % 2 == 1 { &fields[1..] } else { &fields[..] };
                for pair in pairs.chunks(2) {
                    if pair.len() != 2 {
                        return Err(syntax(lineno, "RHS entries come in pairs".into()));
                    }
                    if Some(pair[0]) == obj_row.as_deref() {
                        return Err(syntax(lineno, "objective constants are not supported".into()));
                    }
                    let row = *row_index
                        .get(pair[0])
                        .ok_or_else(|| syntax(lineno, format!("unknown row `{}`", pair[0])))?;
                    rhs[row] = parse_num(pair[1], lineno)?;
                }
            }
            Section::Bounds => {
                if fields.len() < 3 {
                    return Err(syntax(lineno, "BOUNDS entries need a type, set and column".into()));
                }
                let kind = fields[0].to_ascii_uppercase();
                let j = *col_index
                    .get(fields[2])
                    .ok_or_else(|| syntax(lineno, format!("unknown column `{}`", fields[2])))?;
                let value = match fields.get(3) {
                    Some(v) => Some(parse_num(v, lineno)?),
                    None => None,
                };
                let need = |v: Option<f64>| {
                    v.ok_or_else(|| syntax(lineno, format!("{kind} bound needs a value")))
                };
                let col = &mut cols[j];
                match kind.as_str() {
                    "LO" => {
                        col.lower = need(value)?;
                        col.explicit_lower = true;
                    }
                    "UP" => {
                        let v = need(value)?;
                        if v < 0.0 && !col.explicit_lower && col.lower == 0.0 {
                            col.lower = f64::NEG_INFINITY;
                        }
                        col.upper = v;
                    }
                    "FX" => {
                        let v = need(value)?;
                        col.lower = v;
                        col.upper = v;
                        col.explicit_lower = true;
                    }
                    "FR" => {
                        col.lower = f64::NEG_INFINITY;
                        col.upper = f64::INFINITY;
                        col.explicit_lower = true;
                    }
                    "MI" => {
                        col.lower = f64::NEG_INFINITY;
                        col.explicit_lower = true;
                    }
                    "PL" => col.upper = f64::INFINITY,
                    "BV" => {
                        col.binary = true;
                        col.lower = 0.0;
                        col.upper = 1.0;
                    }
                    other => return Err(syntax(lineno, format!("unsupported bound type `{other}`"))),
                }
            }
            Section::Start | Section::End => {
                return Err(syntax(lineno, "data outside of a section".into()));
            }
        }
    }

    let mut model = MilpModel::new(name);
    let mut ids = Vec::with_capacity(cols.len());
    for col in &cols {
        let binary = col.binary || (col.integer && col.lower == 0.0 && col.upper == 1.0);
        if col.integer && !binary {
            return Err(ModelError::Syntax {
                line: 0,
                message: format!("general integer column `{}` is not supported", col.name),
            });
        }
        let kind = if binary { VarKind::Binary } else { VarKind::Continuous };
        ids.push(model.add_var(col.name.clone(), kind, col.lower, col.upper)?);
    }
    let mut row_terms: Vec<Vec<(f64, super::VarId)>> = vec![Vec::new(); rows.len()];
    for (col, &id) in cols.iter().zip(&ids) {
        for &(row, coef) in &col.entries {
            row_terms[row].push((coef, id));
        }
    }
    for (((row_name, row_sense), terms), b) in rows.into_iter().zip(row_terms).zip(rhs) {
        model.add_constraint(row_name, terms, row_sense, b)?;
    }
    model.set_objective(sense, cols.iter().zip(&ids).map(|(c, &id)| (c.objective, id)))?;
    Ok(model)
}

fn parse_sense(tok: &str, line: usize) -> Result<ObjectiveSense, ModelError> {
    match tok.to_ascii_uppercase().as_str() {
        "MAX" | "MAXIMIZE" => Ok(ObjectiveSense::Maximize),
        "MIN" | "MINIMIZE" => Ok(ObjectiveSense::Minimize),
        other => Err(ModelError::Syntax {
            line,
            message: format!("unknown objective sense `{other}`"),
        }),
    }
}
