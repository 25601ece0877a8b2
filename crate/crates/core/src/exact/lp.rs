//! CPLEX-LP text export and a reader for the same subset.
//!
//! Layout, in order:
//!
//! ```text
//! \ <formulation> n=<n> p=<p> [R=<rounds>] [B=<horizon>]   (builder models only)
//! Minimize | Maximize
//!  obj: <terms>
//! Subject To
//!  <name>: <terms> <= | >= | = <rhs>
//! Bounds                                                  (only if any bound is non-default)
//! Binaries                                                (only if any)
//! Generals                                                (only if any)
//! End
//! ```
//!
//! Long expressions wrap onto continuation lines starting with two spaces.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::model::{ExactModel, LinExpr, Relation, Sense, VarId, VarKind, Variable};
use super::ExactError;

const TERMS_PER_LINE: usize = 8;
const NAMES_PER_LINE: usize = 10;

/// Renders `model` as CPLEX-LP text.
pub fn to_lp_string(model: &ExactModel) -> String {
    let mut out = String::new();
    if let Some(meta) = &model.meta {
        let _ = write!(
            out,
            "\\ {} n={} p={}",
            meta.formulation,
            meta.instance.len(),
            meta.instance.cores
        );
        if let Some(r) = meta.rounds {
            let _ = write!(out, " R={r}");
        }
        if let Some(b) = meta.horizon {
            let _ = write!(out, " B={b}");
        }
        out.push('\n');
    }
    out.push_str(match model.sense {
        Sense::Minimize => "Minimize\n",
        Sense::Maximize => "Maximize\n",
    });
    out.push_str(" obj:");
    write_expr(&mut out, model, &model.objective);
    out.push('\n');

    out.push_str("Subject To\n");
    for c in &model.constraints {
        let _ = write!(out, " {}:", c.name);
        write_expr(&mut out, model, &c.expr);
        let _ = writeln!(out, " {} {}", c.relation.symbol(), c.rhs);
    }

    let mut referenced = vec![false; model.variables.len()];
    for (v, _) in model
        .objective
        .terms
        .iter()
        .chain(model.constraints.iter().flat_map(|c| &c.expr.terms))
    {
        referenced[v.0] = true;
    }
    let bounds: Vec<String> = model
        .variables
        .iter()
        .zip(&referenced)
        .filter(|(v, &r)| !v.has_default_bounds() || (v.kind == VarKind::Continuous && !r))
        .map(|(v, _)| bound_line(v))
        .collect();
    if !bounds.is_empty() {
        out.push_str("Bounds\n");
        for line in bounds {
            let _ = writeln!(out, " {line}");
        }
    }
    for (title, kind) in [("Binaries", VarKind::Binary), ("Generals", VarKind::Integer)] {
        let names: Vec<&str> = model
            .variables
            .iter()
            .filter(|v| v.kind == kind)
            .map(|v| v.name.as_str())
            .collect();
        if names.is_empty() {
            continue;
        }
        let _ = writeln!(out, "{title}");
        for chunk in names.chunks(NAMES_PER_LINE) {
            let _ = writeln!(out, " {}", chunk.join(" "));
        }
    }
    out.push_str("End\n");
    out
}

fn write_expr(out: &mut String, model: &ExactModel, expr: &LinExpr) {
    if expr.terms.is_empty() {
        if let Some(first) = model.variables.first() {
            let _ = write!(out, " 0 {}", first.name);
        }
        return;
    }
    for (k, &(v, c)) in expr.terms.iter().enumerate() {
        if k > 0 && k % TERMS_PER_LINE == 0 {
            out.push_str("\n ");
        }
        let name = &model.var(v).name;
        let sign = if c < 0 { "-" } else { "+" };
        let mag = c.unsigned_abs();
        match (k == 0, c < 0, mag == 1) {
            (true, false, true) => {
                let _ = write!(out, " {name}");
            }
            (true, false, false) => {
                let _ = write!(out, " {mag} {name}");
            }
            (_, _, true) => {
                let _ = write!(out, " {sign} {name}");
            }
            (_, _, false) => {
                let _ = write!(out, " {sign} {mag} {name}");
            }
        }
    }
}

fn bound_line(v: &Variable) -> String {
    match v.upper {
        Some(u) if u == v.lower => format!("{} = {u}", v.name),
        Some(u) => format!("{} <= {} <= {u}", v.lower, v.name),
        None => format!("{} >= {}", v.name, v.lower),
    }
}

/// Writes the model to `path`.
pub fn export_lp(model: &ExactModel, path: impl AsRef<Path>) -> Result<(), ExactError> {
    fs::write(path, to_lp_string(model)).map_err(ExactError::Io)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    Start,
    Objective,
    Constraints,
    Bounds,
    Binaries,
    Generals,
    End,
}

fn section_keyword(line: &str) -> Option<Section> {
    match line.to_ascii_lowercase().as_str() {
        "minimize" | "minimise" | "min" => Some(Section::Objective),
        "maximize" | "maximise" | "max" => Some(Section::Objective),
        "subject to" | "such that" | "st" | "s.t." => Some(Section::Constraints),
        "bounds" | "bound" => Some(Section::Bounds),
        "binaries" | "binary" | "bin" => Some(Section::Binaries),
        "generals" | "general" | "gen" => Some(Section::Generals),
        "end" => Some(Section::End),
        _ => None,
    }
}

struct Reader {
    model: ExactModel,
    index: HashMap<String, VarId>,
}

impl Reader {
    fn var(&mut self, name: &str) -> VarId {
        if let Some(&id) = self.index.get(name) {
            return id;
        }
        let id = self.model.add_var(name, VarKind::Continuous);
        self.index.insert(name.to_string(), id);
        id
    }
}

fn parse_error(line: usize, message: impl Into<String>) -> ExactError {
    ExactError::Parse {
        line,
        message: message.into(),
    }
}

fn relation(token: &str) -> Option<Relation> {
    match token {
        "<=" | "=<" | "<" => Some(Relation::Le),
        ">=" | "=>" | ">" => Some(Relation::Ge),
        "=" => Some(Relation::Eq),
        _ => None,
    }
}

/// Parses `[+|-] [coef] name ...` until a relation or the end of the tokens.
/// Returns the expression and the index of the first unconsumed token.
fn parse_terms(
    reader: &mut Reader,
    tokens: &[(usize, &str)],
) -> Result<(LinExpr, usize), ExactError> {
    let mut expr = LinExpr::new();
    let mut k = 0;
    while k < tokens.len() && relation(tokens[k].1).is_none() {
        let mut sign = 1i128;
        while let Some(&(_, s @ ("+" | "-"))) = tokens.get(k) {
            if s == "-" {
                sign = -sign;
            }
            k += 1;
        }
        let Some(&(line, tok)) = tokens.get(k) else {
            return Err(parse_error(tokens.last().map_or(0, |t| t.0), "dangling sign"));
        };
        let (coef, name_tok) = match tok.parse::<i128>() {
            Ok(c) => {
                k += 1;
                let Some(&(_, name)) = tokens.get(k) else {
                    return Err(parse_error(line, "coefficient without variable"));
                };
                (c, name)
            }
            Err(_) => (1, tok),
        };
        if relation(name_tok).is_some() || name_tok.parse::<i128>().is_ok() {
            return Err(parse_error(line, format!("expected a variable, found `{name_tok}`")));
        }
        let id = reader.var(name_tok);
        if coef != 0 {
            expr.terms.push((id, sign * coef));
        }
        k += 1;
    }
    Ok((expr, k))
}

/// Parses LP text produced by [`to_lp_string`] (and the common subset of the
/// format it uses). The result carries no instance metadata.
pub fn parse_lp(text: &str) -> Result<ExactModel, ExactError> {
    let mut reader = Reader {
        model: ExactModel::new(Sense::Minimize),
        index: HashMap::new(),
    };
    let mut section = Section::Start;
    let mut body: Vec<(usize, String)> = Vec::new();
    let mut sections: Vec<(Section, Vec<(usize, String)>)> = Vec::new();

    for (no, raw) in text.lines().enumerate() {
        let line_no = no + 1;
        let line = raw.split('\\').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(next) = section_keyword(line) {
            if section != Section::Start {
                sections.push((section, std::mem::take(&mut body)));
            }
            if next == Section::Objective {
                reader.model.sense = if line.to_ascii_lowercase().starts_with("max") {
                    Sense::Maximize
                } else {
                    Sense::Minimize
                };
            }
            section = next;
            if section == Section::End {
                break;
            }
            continue;
        }
        if section == Section::Start {
            return Err(parse_error(line_no, "content before the objective section"));
        }
        body.push((line_no, line.to_string()));
    }
    if section != Section::End {
        return Err(parse_error(text.lines().count(), "missing End"));
    }

    for (sec, lines) in sections {
        let tokens: Vec<(usize, &str)> = lines
            .iter()
            .flat_map(|(no, l)| l.split_whitespace().map(move |t| (*no, t)))
            .collect();
        match sec {
            Section::Objective => {
                let rest = strip_label(&tokens).1;
                let (expr, used) = parse_terms(&mut reader, rest)?;
                if used != rest.len() {
                    return Err(parse_error(rest[used].0, "unexpected relation in objective"));
                }
                reader.model.objective = expr;
            }
            Section::Constraints => parse_constraints(&mut reader, &tokens)?,
            Section::Bounds => {
                for (no, line) in &lines {
                    parse_bound(&mut reader, *no, line)?;
                }
            }
            Section::Binaries | Section::Generals => {
                for &(_, name) in &tokens {
                    let id = reader.var(name);
                    let v = &mut reader.model.variables[id.0];
                    if sec == Section::Binaries {
                        v.kind = VarKind::Binary;
                        v.lower = 0;
                        v.upper = Some(1);
                    } else {
                        v.kind = VarKind::Integer;
                    }
                }
            }
            Section::Start | Section::End => {}
        }
    }
    Ok(reader.model)
}

fn strip_label<'a, 'b>(tokens: &'b [(usize, &'a str)]) -> (Option<&'a str>, &'b [(usize, &'a str)]) {
    match tokens.first() {
        Some(&(_, t)) if t.ends_with(':') => (Some(t.trim_end_matches(':')), &tokens[1..]),
        _ => (None, tokens),
    }
}

fn parse_constraints(reader: &mut Reader, mut tokens: &[(usize, &str)]) -> Result<(), ExactError> {
    while !tokens.is_empty() {
        let line = tokens[0].0;
        let (label, rest) = strip_label(tokens);
        let (expr, used) = parse_terms(reader, rest)?;
        let Some(rel) = rest.get(used).and_then(|t| relation(t.1)) else {
            return Err(parse_error(line, "constraint without relation"));
        };
        let Some(rhs) = rest.get(used + 1).and_then(|t| t.1.parse::<i128>().ok()) else {
            return Err(parse_error(line, "constraint without numeric right-hand side"));
        };
        let name = label.map_or_else(|| format!("c{}", reader.model.constraints.len()), str::to_string);
        reader.model.add_constraint(name, expr, rel, rhs);
        tokens = &rest[used + 2..];
    }
    Ok(())
}

fn parse_bound(reader: &mut Reader, line: usize, text: &str) -> Result<(), ExactError> {
    let t: Vec<&str> = text.split_whitespace().collect();
    let num = |s: &str| {
        s.parse::<i128>()
            .map_err(|_| parse_error(line, format!("expected a number, found `{s}`")))
    };
    match t.as_slice() {
        [lo, "<=", name, "<=", up] => {
            let (lo, up) = (num(lo)?, num(up)?);
            let id = reader.var(name);
            let v = &mut reader.model.variables[id.0];
            v.lower = lo;
            v.upper = Some(up);
        }
        [name, ">=", lo] => {
            let lo = num(lo)?;
            let id = reader.var(name);
            reader.model.variables[id.0].lower = lo;
        }
        [name, "<=", up] => {
            let up = num(up)?;
            let id = reader.var(name);
            reader.model.variables[id.0].upper = Some(up);
        }
        [name, "=", val] => {
            let val = num(val)?;
            let id = reader.var(name);
            let v = &mut reader.model.variables[id.0];
            v.lower = val;
            v.upper = Some(val);
        }
        _ => return Err(parse_error(line, format!("unsupported bound `{text}`"))),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::build::build_obs_hom;
    use crate::model::DependencyDag;

    #[test]
    fn single_binary_is_six_lines() {
        let mut m = ExactModel::new(Sense::Maximize);
        let x = m.add_var("x", VarKind::Binary);
        m.objective.push(x, 1);
        let text = to_lp_string(&m);
        assert_eq!(text, "Maximize\n obj: x\nSubject To\nBinaries\n x\nEnd\n");
        assert_eq!(text.lines().count(), 6);
        let back = parse_lp(&text).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn term_formatting() {
        let mut m = ExactModel::new(Sense::Minimize);
        let a = m.add_var("a", VarKind::Integer);
        let b = m.add_var("b", VarKind::Integer);
        m.objective = LinExpr::new().term(a, -1).term(b, 3);
        m.add_constraint("c", LinExpr::new().term(a, 2).term(b, -1), Relation::Ge, -4);
        let text = to_lp_string(&m);
        assert!(text.contains(" obj: - a + 3 b\n"), "{text}");
        assert!(text.contains(" c: 2 a - b >= -4\n"), "{text}");
        assert_eq!(parse_lp(&text).unwrap(), m);
    }

    #[test]
    fn obs_hom_export() {
        let dag = DependencyDag::from_edges(2, []);
        let m = build_obs_hom(&dag, 2, 2);
        let text = to_lp_string(&m);
        assert!(text.starts_with("\\ obs-hom n=2 p=2 R=2\nMinimize\n"));
        let back = parse_lp(&text).unwrap();
        assert_eq!(back.shape(), m.shape());
        assert_eq!(back.shape().binaries, 6);
        for family in ["once_", "cap_", "nogap_"] {
            assert!(back.constraints.iter().any(|c| c.name.starts_with(family)));
        }
    }

    #[test]
    fn long_rows_wrap_and_parse() {
        let dag = DependencyDag::from_edges(3, [(0, 2)]);
        let m = build_obs_hom(&dag, 2, 20);
        let text = to_lp_string(&m);
        assert!(text.lines().all(|l| l.len() < 255));
        let back = parse_lp(&text).unwrap();
        assert_eq!(back.shape(), m.shape());
        assert_eq!(named_rows(&back), named_rows(&m));
    }

    type NamedRow = (String, Vec<(String, i128)>, Relation, i128);

    fn named_rows(m: &ExactModel) -> Vec<NamedRow> {
        m.constraints
            .iter()
            .map(|c| {
                let terms = c
                    .expr
                    .terms
                    .iter()
                    .map(|&(v, k)| (m.var(v).name.clone(), k))
                    .collect();
                (c.name.clone(), terms, c.relation, c.rhs)
            })
            .collect()
    }

    #[test]
    fn bounds_round_trip() {
        let mut m = ExactModel::new(Sense::Minimize);
        let a = m.add_var("a", VarKind::Integer);
        m.variables[a.0].lower = -3;
        m.variables[a.0].upper = Some(9);
        let b = m.add_var("b", VarKind::Continuous);
        m.objective.push(a, 1);
        let text = to_lp_string(&m);
        assert!(text.contains("Bounds\n -3 <= a <= 9\n b >= 0\n"), "{text}");
        let back = parse_lp(&text).unwrap();
        assert_eq!(back.variables, m.variables);
        assert_eq!(back.var(b).kind, VarKind::Continuous);
    }

    #[test]
    fn malformed_input_reports_line() {
        let err = parse_lp("Minimize\n obj: x\nSubject To\n c: x 3\nEnd\n").unwrap_err();
        assert!(matches!(err, ExactError::Parse { line: 4, .. }), "{err}");
        assert!(parse_lp("Minimize\n obj: x\n").is_err());
    }
}
