//! CPLEX-style LP text format.
//!
//! The objective lists every column (zero coefficients included) so that the
//! order of first appearance, and therefore variable order, survives a
//! round trip.

use std::io::{Read, Write};

use super::{fmt_num, parse_num, MilpModel, ModelError, ObjectiveSense, Sense, VarId, VarKind};

const TERMS_PER_LINE: usize = 6;

fn write_terms<W: Write>(out: &mut W, terms: &[(f64, &str)]) -> Result<(), ModelError> {
    for (k, (coef, name)) in terms.iter().enumerate() {
        if k > 0 && k % TERMS_PER_LINE == 0 {
            write!(out, "\n   ")?;
        }
        let sign = if coef.is_sign_negative() { '-' } else { '+' };
        write!(out, " {sign} {} {name}", fmt_num(coef.abs()))?;
    }
    Ok(())
}

pub fn write_lp<W: Write>(model: &MilpModel, out: &mut W) -> Result<(), ModelError> {
    writeln!(out, "\\ model {}", model.name())?;
    writeln!(
        out,
        "{}",
        match model.objective().sense {
            ObjectiveSense::Maximize => "Maximize",
            ObjectiveSense::Minimize => "Minimize",
        }
    )?;
    let mut obj = vec![0.0; model.num_vars()];
    for &(c, v) in &model.objective().terms {
        obj[v.index()] = c;
    }
    let obj_terms: Vec<(f64, &str)> = model
        .variables()
        .iter()
        .zip(&obj)
        .map(|(v, &c)| (c, v.name.as_str()))
        .collect();
    write!(out, " obj:")?;
    write_terms(out, &obj_terms)?;
    writeln!(out)?;

    writeln!(out, "Subject To")?;
    for c in model.constraints() {
        write!(out, " {}:", c.name)?;
        let terms: Vec<(f64, &str)> = c
            .terms
            .iter()
            .map(|&(coef, v)| (coef, model.var(v).name.as_str()))
            .collect();
        write_terms(out, &terms)?;
        writeln!(out, " {} {}", c.sense, fmt_num(c.rhs))?;
    }

    writeln!(out, "Bounds")?;
    let bound = |x: f64| {
        if x == f64::INFINITY {
            "+inf".to_string()
        } else if x == f64::NEG_INFINITY {
            "-inf".to_string()
        } else {
            fmt_num(x)
        }
    };
    for v in model.variables() {
        if v.kind == VarKind::Binary || (v.lower == 0.0 && v.upper == f64::INFINITY) {
            continue;
        }
        if v.lower == f64::NEG_INFINITY && v.upper == f64::INFINITY {
            writeln!(out, " {} free", v.name)?;
        } else if v.lower == v.upper {
            writeln!(out, " {} = {}", v.name, fmt_num(v.lower))?;
        } else {
            writeln!(out, " {} <= {} <= {}", bound(v.lower), v.name, bound(v.upper))?;
        }
    }

    let binaries: Vec<&str> = model
        .variables()
        .iter()
        .filter(|v| v.kind == VarKind::Binary)
        .map(|v| v.name.as_str())
        .collect();
    if !binaries.is_empty() {
        writeln!(out, "Binaries")?;
        for chunk in binaries.chunks(8) {
            writeln!(out, " {}", chunk.join(" "))?;
        }
    }
    writeln!(out, "End")?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Name(String),
    Num(f64),
    Plus,
    Minus,
    Colon,
    Cmp(Sense),
}

fn tokenize(text: &str, line: usize) -> Result<Vec<Tok>, ModelError> {
    let chars: Vec<char> = text.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c == '+' {
            toks.push(Tok::Plus);
            i += 1;
        } else if c == '-' {
            toks.push(Tok::Minus);
            i += 1;
        } else if c == ':' {
            toks.push(Tok::Colon);
            i += 1;
        } else if c == '<' || c == '>' || c == '=' {
            let mut j = i + 1;
            while j < chars.len() && matches!(chars[j], '<' | '>' | '=') {
                j += 1;
            }
            let op: String = chars[i..j].iter().collect();
            let sense = match op.as_str() {
                "<" | "<=" | "=<" => Sense::Le,
                ">" | ">=" | "=>" => Sense::Ge,
                "=" => Sense::Eq,
                _ => {
                    return Err(ModelError::Syntax {
                        line,
                        message: format!("bad operator `{op}`"),
                    })
                }
            };
            toks.push(Tok::Cmp(sense));
            i = j;
        } else if c.is_ascii_digit() || c == '.' {
            let mut j = i;
            while j < chars.len() {
                let d = chars[j];
                let exp_sign =
                    (d == '+' || d == '-') && j > i && matches!(chars[j - 1], 'e' | 'E');
                if d.is_ascii_digit() || d == '.' || d == 'e' || d == 'E' || exp_sign {
                    j += 1;
                } else {
                    break;
                }
            }
            let s: String = chars[i..j].iter().collect();
            toks.push(Tok::Num(parse_num(&s, line)?));
            i = j;
        } else {
            let mut j = i;
            while j < chars.len()
                && !chars[j].is_whitespace()
                && !matches!(chars[j], '+' | '-' | ':' | '<' | '>' | '=')
            {
                j += 1;
            }
            toks.push(Tok::Name(chars[i..j].iter().collect()));
            i = j;
        }
    }
    Ok(toks)
}

#[derive(Clone, Copy, PartialEq)]
enum Part {
    Head,
    Objective,
    Constraints,
    Bounds,
    Binaries,
}

fn section_keyword(line: &str) -> Option<Part> {
    let l = line.trim().to_ascii_lowercase();
    match l.as_str() {
        "maximize" | "maximise" | "maximum" | "max" | "minimize" | "minimise" | "minimum"
        | "min" => Some(Part::Objective),
        "subject to" | "such that" | "st" | "s.t." => Some(Part::Constraints),
        "bounds" | "bound" => Some(Part::Bounds),
        "binaries" | "binary" | "bin" => Some(Part::Binaries),
        _ => None,
    }
}

struct Cursor {
    toks: Vec<Tok>,
    pos: usize,
}

impl Cursor {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }
    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }
}

/// Optional row label and the linear terms of one expression.
type LabeledExpr = (Option<String>, Vec<(f64, VarId)>);

/// Parses `[label:] [+|-] [coef] name ...` up to (not including) a comparison.
fn parse_expr(
    cur: &mut Cursor,
    model: &mut MilpModel,
    line: usize,
) -> Result<LabeledExpr, ModelError> {
    let mut label = None;
    if let (Some(Tok::Name(n)), Some(Tok::Colon)) = (cur.toks.get(cur.pos), cur.toks.get(cur.pos + 1)) {
        label = Some(n.clone());
        cur.pos += 2;
    }
    let mut terms = Vec::new();
    loop {
        let mut sign = 1.0;
        let mut saw_sign = false;
        while let Some(t) = cur.peek() {
            match t {
                Tok::Plus => {}
                Tok::Minus => sign = -sign,
                _ => break,
            }
            saw_sign = true;
            cur.pos += 1;
        }
        let coef = match cur.peek() {
            Some(Tok::Num(v)) => {
                let v = *v;
                cur.pos += 1;
                v
            }
            _ => 1.0,
        };
        match cur.peek() {
            Some(Tok::Name(n)) => {
                let n = n.clone();
                cur.pos += 1;
                let id = match model.var_id(&n) {
                    Some(id) => id,
                    None => model.add_continuous(n, 0.0, f64::INFINITY)?,
                };
                terms.push((sign * coef, id));
            }
            None | Some(Tok::Cmp(_)) if !saw_sign => return Ok((label, terms)),
            other => {
                return Err(ModelError::Syntax {
                    line,
                    message: format!("expected a variable, found {other:?}"),
                })
            }
        }
    }
}

/// Reads an LP file in the subset written by [`write_lp`]: Maximize/Minimize,
/// Subject To, Bounds, Binaries, End. General integers are not supported.
pub fn read_lp<R: Read>(mut input: R) -> Result<MilpModel, ModelError> {
    let mut text = String::new();
    input.read_to_string(&mut text)?;

    let mut name = String::new();
    let mut sense = ObjectiveSense::Minimize;
    // collect section bodies; the objective and constraints may span lines
    let mut part = Part::Head;
    let mut objective_text = String::new();
    let mut constraint_text = String::new();
    let mut bound_lines: Vec<(usize, String)> = Vec::new();
    let mut binary_names: Vec<String> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        if let Some(rest) = raw.trim_start().strip_prefix("\\ model ") {
            name = rest.trim().to_string();
            continue;
        }
        let line = raw.split('\\').next().unwrap_or("");
        if line.trim().is_empty() {
            continue;
        }
        if line.trim().eq_ignore_ascii_case("end") {
            break;
        }
        if let Some(p) = section_keyword(line) {
            if p == Part::Objective {
                sense = if line.trim().to_ascii_lowercase().starts_with("max") {
                    ObjectiveSense::Maximize
                } else {
                    ObjectiveSense::Minimize
                };
            }
            part = p;
            continue;
        }
        let l = line.trim().to_ascii_lowercase();
        if l == "generals" || l == "general" || l == "gen" || l == "semi-continuous" {
            return Err(ModelError::Syntax {
                line: lineno,
                message: format!("section `{}` is not supported", line.trim()),
            });
        }
        match part {
            Part::Head => {
                return Err(ModelError::Syntax {
                    line: lineno,
                    message: "content before the objective section".into(),
                })
            }
            Part::Objective => {
                objective_text.push(' ');
                objective_text.push_str(line);
            }
            Part::Constraints => {
                constraint_text.push(' ');
                constraint_text.push_str(line);
            }
            Part::Bounds => bound_lines.push((lineno, line.to_string())),
            Part::Binaries => binary_names.extend(line.split_whitespace().map(str::to_string)),
        }
    }

    let mut model = MilpModel::new(name);

    let mut cur = Cursor {
        toks: tokenize(&objective_text, 0)?,
        pos: 0,
    };
    let (_, obj_terms) = parse_expr(&mut cur, &mut model, 0)?;
    if cur.peek().is_some() {
        return Err(ModelError::Syntax {
            line: 0,
            message: "trailing tokens in objective".into(),
        });
    }

    let mut cur = Cursor {
        toks: tokenize(&constraint_text, 0)?,
        pos: 0,
    };
    let mut pending = Vec::new();
    let mut anon = 0usize;
    while cur.peek().is_some() {
        let (label, terms) = parse_expr(&mut cur, &mut model, 0)?;
        let Some(Tok::Cmp(row_sense)) = cur.next() else {
            return Err(ModelError::Syntax {
                line: 0,
                message: "constraint without a comparison".into(),
            });
        };
        let mut sign = 1.0;
        if let Some(Tok::Minus) = cur.peek() {
            sign = -1.0;
            cur.pos += 1;
        } else if let Some(Tok::Plus) = cur.peek() {
            cur.pos += 1;
        }
        let rhs = match cur.next() {
            Some(Tok::Num(v)) => sign * v,
            other => {
                return Err(ModelError::Syntax {
                    line: 0,
                    message: format!("expected a right-hand side, found {other:?}"),
                })
            }
        };
        let label = label.unwrap_or_else(|| {
            anon += 1;
            format!("R{anon}")
        });
        pending.push((label, terms, row_sense, rhs));
    }

    // binaries and bounds mutate variables before constraints are registered
    let mut vars = model.vars.clone();
    for n in &binary_names {
        let id = model.var_id(n).ok_or_else(|| ModelError::Syntax {
            line: 0,
            message: format!("binary `{n}` does not appear in the model"),
        })?;
        let v = &mut vars[id.index()];
        v.kind = VarKind::Binary;
        v.lower = 0.0;
        v.upper = 1.0;
    }
    for (lineno, line) in &bound_lines {
        apply_bound(&mut model, &mut vars, line, *lineno)?;
    }
    model.vars = vars;

    for (label, terms, row_sense, rhs) in pending {
        model.add_constraint(label, terms, row_sense, rhs)?;
    }
    model.set_objective(sense, obj_terms)?;
    Ok(model)
}

fn bound_value(toks: &[Tok], line: usize) -> Result<f64, ModelError> {
    let bad = || ModelError::Syntax {
        line,
        message: "malformed bound".into(),
    };
    let (sign, rest) = match toks.first() {
        Some(Tok::Minus) => (-1.0, &toks[1..]),
        Some(Tok::Plus) => (1.0, &toks[1..]),
        _ => (1.0, toks),
    };
    match rest {
        [Tok::Num(v)] => Ok(sign * v),
        [Tok::Name(n)] if matches!(n.to_ascii_lowercase().as_str(), "inf" | "infinity") => {
            Ok(sign * f64::INFINITY)
        }
        _ => Err(bad()),
    }
}

fn apply_bound(
    model: &mut MilpModel,
    vars: &mut [super::Variable],
    line: &str,
    lineno: usize,
) -> Result<(), ModelError> {
    let toks = tokenize(line, lineno)?;
    let bad = || ModelError::Syntax {
        line: lineno,
        message: format!("malformed bound `{}`", line.trim()),
    };
    let lookup = |n: &str| model.var_id(n).ok_or_else(bad);
    let cmps: Vec<usize> = toks
        .iter()
        .enumerate()
        .filter(|(_, t)| matches!(t, Tok::Cmp(_)))
        .map(|(i, _)| i)
        .collect();
    match (toks.as_slice(), cmps.as_slice()) {
        ([Tok::Name(n), Tok::Name(kw)], []) if kw.eq_ignore_ascii_case("free") => {
            let v = &mut vars[lookup(n)?.index()];
            v.lower = f64::NEG_INFINITY;
            v.upper = f64::INFINITY;
        }
        (_, [a, b]) => {
            let Tok::Name(n) = &toks[a + 1] else {
                return Err(bad());
            };
            if *b != a + 2 {
                return Err(bad());
            }
            let lo = bound_value(&toks[..*a], lineno)?;
            let hi = bound_value(&toks[b + 1..], lineno)?;
            let v = &mut vars[lookup(n)?.index()];
            v.lower = lo;
            v.upper = hi;
        }
        (_, [a]) => {
            let Tok::Cmp(s) = toks[*a] else { unreachable!() };
            if let (1, Tok::Name(n)) = (*a, &toks[0]) {
                let value = bound_value(&toks[a + 1..], lineno)?;
                let v = &mut vars[lookup(n)?.index()];
                match s {
                    Sense::Le => v.upper = value,
                    Sense::Ge => v.lower = value,
                    Sense::Eq => {
                        v.lower = value;
                        v.upper = value;
                    }
                }
            } else if let Some(Tok::Name(n)) = toks.last() {
                let value = bound_value(&toks[..*a], lineno)?;
                let v = &mut vars[lookup(n)?.index()];
                match s {
                    Sense::Le => v.lower = value,
                    Sense::Ge => v.upper = value,
                    Sense::Eq => {
                        v.lower = value;
                        v.upper = value;
                    }
                }
            } else {
                return Err(bad());
            }
        }
        _ => return Err(bad()),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn writes_readable_lp() {
        let mut m = MilpModel::new("demo");
        let x = m.add_binary("x").unwrap();
        let s = m.add_continuous("s", f64::NEG_INFINITY, 4.5).unwrap();
        let f = m.add_continuous("f", f64::NEG_INFINITY, f64::INFINITY).unwrap();
        m.add_constraint("c1", [(1.0, x), (-0.4, s)], Sense::Ge, -0.8).unwrap();
        m.add_constraint("c2", [(1.0, f), (1.0, s)], Sense::Eq, 0.0).unwrap();
        m.set_objective(ObjectiveSense::Maximize, [(3.0, x)]).unwrap();
        let mut buf = Vec::new();
        write_lp(&m, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains(" c1: + 1 x - 0.4 s >= -0.8"));
        assert!(text.contains(" -inf <= s <= 4.5"));
        assert!(text.contains(" f free"));
        let back = read_lp(text.as_bytes()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn reads_foreign_layout() {
        let text = "Minimize\n cost: 2 a + b\nSubject To\n a + b >= 1\n lim: a - b\n  <= 3\nBounds\n b <= 10\n 1 <= a\nEnd\n";
        let m = read_lp(text.as_bytes()).unwrap();
        assert_eq!(m.num_constraints(), 2);
        assert_eq!(m.constraints()[0].name, "R1");
        let a = m.var(m.var_id("a").unwrap());
        assert_eq!((a.lower, a.upper), (1.0, f64::INFINITY));
        let b = m.var(m.var_id("b").unwrap());
        assert_eq!((b.lower, b.upper), (0.0, 10.0));
    }

    #[test]
    fn generals_are_rejected() {
        let text = "Minimize\n obj: a\nSubject To\n c: a >= 1\nGenerals\n a\nEnd\n";
        assert!(read_lp(text.as_bytes()).is_err());
    }
}
