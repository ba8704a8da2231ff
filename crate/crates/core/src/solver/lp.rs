//! CPLEX-style LP text for [`LinearModel`], plus a parser for the same
//! dialect so exports can be verified by re-reading them.
//!
//! The writer emits `Minimize`, `Subject To`, `Bounds`, `Binary` and `End`
//! sections. Coefficients print through Rust's shortest-round-trip float
//! formatting, so parsing recovers bit-identical values.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use crate::model::milp::{LinearModel, Sense, VarKind};

/// Errors from LP writing and parsing.
#[derive(Debug)]
pub enum LpError {
    Io(std::io::Error),
    Syntax { line: usize, message: String },
}

impl std::fmt::Display for LpError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LpError::Io(e) => write!(f, "{e}"),
            LpError::Syntax { line, message } => write!(f, "line {line}: {message}"),
        }
    }
}

impl std::error::Error for LpError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            LpError::Io(e) => Some(e),
            LpError::Syntax { .. } => None,
        }
    }
}

impl From<std::io::Error> for LpError {
    fn from(e: std::io::Error) -> Self {
        LpError::Io(e)
    }
}

/// Terms per line before wrapping long expressions.
const WRAP: usize = 8;

/// Renders the model as LP text.
pub fn write_lp_string(model: &LinearModel) -> String {
    let mut out = String::new();
    out.push_str("\\ ");
    out.push_str(&model.name);
    out.push('\n');
    out.push_str("Minimize\n obj:");
    let mut terms: Vec<(String, f64)> = model
        .objective
        .iter()
        .map(|&(idx, coeff)| (model.variables[idx].name.clone(), coeff))
        .collect();
    if model.objective_constant != 0.0 {
        terms.push((String::new(), model.objective_constant));
    }
    write_expression(&mut out, &terms);
    out.push_str("\nSubject To\n");
    for row in &model.constraints {
        out.push(' ');
        out.push_str(&row.name);
        out.push(':');
        let terms: Vec<(String, f64)> = row
            .terms
            .iter()
            .map(|&(idx, coeff)| (model.variables[idx].name.clone(), coeff))
            .collect();
        write_expression(&mut out, &terms);
        let sense = match row.sense {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        };
        out.push_str(&format!(" {} {}\n", sense, row.rhs));
    }
    let continuous: Vec<_> = model
        .variables
        .iter()
        .filter(|v| v.kind == VarKind::Continuous)
        .collect();
    if !continuous.is_empty() {
        out.push_str("Bounds\n");
        for v in continuous {
            out.push_str(&format!(" {} <= {} <= {}\n", v.lower, v.name, v.upper));
        }
    }
    let binary: Vec<_> = model
        .variables
        .iter()
        .filter(|v| v.kind == VarKind::Binary)
        .collect();
    if !binary.is_empty() {
        out.push_str("Binary\n");
        for v in binary {
            out.push(' ');
            out.push_str(&v.name);
            out.push('\n');
        }
    }
    out.push_str("End\n");
    out
}

/// Writes the model to a file in LP format.
pub fn write_lp_file(model: &LinearModel, path: &Path) -> Result<(), LpError> {
    std::fs::write(path, write_lp_string(model))?;
    Ok(())
}

/// An empty name marks a bare constant term.
fn write_expression(out: &mut String, terms: &[(String, f64)]) {
    if terms.is_empty() {
        out.push_str(" 0");
        return;
    }
    for (pos, (name, coeff)) in terms.iter().enumerate() {
        if pos > 0 && pos % WRAP == 0 {
            out.push_str("\n  ");
        }
        if coeff.is_sign_negative() {
            out.push_str(" - ");
        } else if pos > 0 {
            out.push_str(" + ");
        } else {
            out.push(' ');
        }
        out.push_str(&format!("{}", coeff.abs()));
        if !name.is_empty() {
            out.push(' ');
            out.push_str(name);
        }
    }
}

/// One parsed constraint row.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedRow {
    pub name: String,
    pub terms: BTreeMap<String, f64>,
    pub sense: Sense,
    pub rhs: f64,
}

/// A linear program reconstructed from LP text. Variables exist only by
/// mention, so the name set is the union over all sections.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedLp {
    pub minimize: bool,
    pub objective: BTreeMap<String, f64>,
    pub objective_constant: f64,
    pub constraints: Vec<ParsedRow>,
    pub bounds: BTreeMap<String, (f64, f64)>,
    pub binaries: BTreeSet<String>,
}

impl ParsedLp {
    /// Every variable name mentioned anywhere in the program.
    pub fn variable_names(&self) -> BTreeSet<String> {
        let mut names: BTreeSet<String> = self.objective.keys().cloned().collect();
        for row in &self.constraints {
            names.extend(row.terms.keys().cloned());
        }
        names.extend(self.bounds.keys().cloned());
        names.extend(self.binaries.iter().cloned());
        names
    }

    /// Objective at a named assignment; missing names count as zero.
    pub fn objective_value(&self, assignment: &BTreeMap<String, f64>) -> f64 {
        let mut total = self.objective_constant;
        for (name, coeff) in &self.objective {
            total += coeff * assignment.get(name).copied().unwrap_or(0.0);
        }
        total
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Ident(String),
    Num(f64),
    Plus,
    Minus,
    Le,
    Ge,
    Eq,
    Colon,
}

struct Tokens {
    items: Vec<(Token, usize)>,
    at: usize,
}

impl Tokens {
    fn peek(&self) -> Option<&Token> {
        self.items.get(self.at).map(|(t, _)| t)
    }

    fn line(&self) -> usize {
        self.items
            .get(self.at.min(self.items.len().saturating_sub(1)))
            .map(|&(_, line)| line)
            .unwrap_or(0)
    }

    fn next(&mut self) -> Option<Token> {
        let item = self.items.get(self.at).map(|(t, _)| t.clone());
        self.at += 1;
        item
    }

    fn error(&self, message: impl Into<String>) -> LpError {
        LpError::Syntax { line: self.line(), message: message.into() }
    }
}

fn tokenize(text: &str) -> Result<Tokens, LpError> {
    let mut items = Vec::new();
    for (line_at, raw) in text.lines().enumerate() {
        let line = line_at + 1;
        let body = match raw.find('\\') {
            Some(at) => &raw[..at],
            None => raw,
        };
        let bytes = body.as_bytes();
        let mut i = 0;
        while i < bytes.len() {
            let c = bytes[i] as char;
            if c.is_whitespace() {
                i += 1;
            } else if c.is_ascii_digit() || c == '.' {
                let start = i;
                while i < bytes.len() && ((bytes[i] as char).is_ascii_digit() || bytes[i] == b'.')
                {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && (bytes[j] as char).is_ascii_digit() {
                        i = j;
                        while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let lexeme = &body[start..i];
                let value: f64 = lexeme.parse().map_err(|_| LpError::Syntax {
                    line,
                    message: format!("bad number `{lexeme}`"),
                })?;
                items.push((Token::Num(value), line));
            } else if c.is_ascii_alphabetic() || c == '_' {
                let start = i;
                while i < bytes.len() {
                    let c = bytes[i] as char;
                    if c.is_ascii_alphanumeric() || c == '_' || c == '.' {
                        i += 1;
                    } else {
                        break;
                    }
                }
                items.push((Token::Ident(body[start..i].to_string()), line));
            } else {
                match c {
                    '+' => items.push((Token::Plus, line)),
                    '-' => items.push((Token::Minus, line)),
                    ':' => items.push((Token::Colon, line)),
                    '<' | '>' | '=' => {
                        let mut j = i + 1;
                        if j < bytes.len()
                            && matches!(bytes[j], b'<' | b'>' | b'=')
                            && bytes[j] != bytes[i]
                        {
                            j += 1;
                        }
                        let pair = &body[i..j];
                        let token = match pair {
                            "<=" | "=<" | "<" => Token::Le,
                            ">=" | "=>" | ">" => Token::Ge,
                            "=" => Token::Eq,
                            other => {
                                return Err(LpError::Syntax {
                                    line,
                                    message: format!("bad comparison `{other}`"),
                                })
                            }
                        };
                        items.push((token, line));
                        i = j;
                        continue;
                    }
                    other => {
                        return Err(LpError::Syntax {
                            line,
                            message: format!("unexpected character `{other}`"),
                        })
                    }
                }
                i += 1;
            }
        }
    }
    Ok(Tokens { items, at: 0 })
}

#[derive(Debug, PartialEq, Eq, Clone, Copy)]
enum Section {
    SubjectTo,
    Bounds,
    Binary,
    End,
}

/// Section keyword at the cursor, without consuming it.
fn section_at(tokens: &Tokens) -> Option<Section> {
    let word = match tokens.peek() {
        Some(Token::Ident(word)) => word.to_ascii_lowercase(),
        _ => return None,
    };
    let following = match tokens.items.get(tokens.at + 1) {
        Some((Token::Ident(word), _)) => Some(word.to_ascii_lowercase()),
        _ => None,
    };
    match word.as_str() {
        "subject" if following.as_deref() == Some("to") => Some(Section::SubjectTo),
        "st" | "s.t." => Some(Section::SubjectTo),
        "bounds" | "bound" => Some(Section::Bounds),
        "binary" | "binaries" | "bin" => Some(Section::Binary),
        "end" => Some(Section::End),
        _ => None,
    }
}

fn consume_section(tokens: &mut Tokens, section: Section) {
    tokens.next();
    if section == Section::SubjectTo {
        if let Some(Token::Ident(word)) = tokens.peek() {
            if word.eq_ignore_ascii_case("to") {
                tokens.next();
            }
        }
    }
}

/// Parses a linear expression, folding repeated mentions of a variable.
/// Stops at a sense token, a section keyword, or a `name:` row label.
fn parse_expression(
    tokens: &mut Tokens,
    terms: &mut BTreeMap<String, f64>,
) -> Result<f64, LpError> {
    let mut constant = 0.0;
    let mut sign = 1.0;
    let mut pending: Option<f64> = None;
    loop {
        if section_at(tokens).is_some() {
            break;
        }
        // A `name:` pair means the next row has begun.
        if matches!(tokens.peek(), Some(Token::Ident(_)))
            && matches!(tokens.items.get(tokens.at + 1), Some((Token::Colon, _)))
        {
            break;
        }
        match tokens.peek() {
            Some(Token::Plus) => {
                if let Some(value) = pending.take() {
                    constant += value;
                }
                tokens.next();
            }
            Some(Token::Minus) => {
                if let Some(value) = pending.take() {
                    constant += value;
                }
                sign = -sign;
                tokens.next();
            }
            Some(Token::Num(_)) => {
                if let Some(value) = pending.take() {
                    constant += value;
                }
                let Some(Token::Num(value)) = tokens.next() else { unreachable!() };
                pending = Some(sign * value);
                sign = 1.0;
            }
            Some(Token::Ident(_)) => {
                let Some(Token::Ident(name)) = tokens.next() else { unreachable!() };
                let coeff = pending.take().unwrap_or(sign);
                *terms.entry(name).or_insert(0.0) += coeff;
                sign = 1.0;
            }
            _ => break,
        }
    }
    if let Some(value) = pending {
        constant += value;
    }
    Ok(constant)
}

fn parse_signed_number(tokens: &mut Tokens) -> Result<f64, LpError> {
    let mut sign = 1.0;
    loop {
        match tokens.next() {
            Some(Token::Plus) => {}
            Some(Token::Minus) => sign = -sign,
            Some(Token::Num(value)) => return Ok(sign * value),
            other => {
                return Err(LpError::Syntax {
                    line: 0,
                    message: format!("expected a number, found {other:?}"),
                })
            }
        }
    }
}

/// Parses LP text produced by [`write_lp_string`] (and the common hand-written
/// variations of the dialect).
pub fn parse_lp_string(text: &str) -> Result<ParsedLp, LpError> {
    let mut tokens = tokenize(text)?;
    let minimize = match tokens.next() {
        Some(Token::Ident(word)) => match word.to_ascii_lowercase().as_str() {
            "minimize" | "minimum" | "min" => true,
            "maximize" | "maximum" | "max" => false,
            other => return Err(tokens.error(format!("expected an objective sense, found `{other}`"))),
        },
        _ => return Err(tokens.error("expected an objective sense")),
    };

    // Optional `obj:` label.
    if matches!(tokens.peek(), Some(Token::Ident(_)))
        && matches!(tokens.items.get(tokens.at + 1), Some((Token::Colon, _)))
        && section_at(&tokens).is_none()
    {
        tokens.next();
        tokens.next();
    }
    let mut objective = BTreeMap::new();
    let objective_constant = parse_expression(&mut tokens, &mut objective)?;

    match section_at(&tokens) {
        Some(Section::SubjectTo) => consume_section(&mut tokens, Section::SubjectTo),
        _ => return Err(tokens.error("expected `Subject To` after the objective")),
    }

    let mut constraints = Vec::new();
    loop {
        if let Some(section) = section_at(&tokens) {
            if section != Section::SubjectTo {
                break;
            }
        }
        let name = match tokens.next() {
            Some(Token::Ident(name)) => name,
            other => return Err(tokens.error(format!("expected a row name, found {other:?}"))),
        };
        match tokens.next() {
            Some(Token::Colon) => {}
            other => return Err(tokens.error(format!("expected `:` after row name, found {other:?}"))),
        }
        let mut terms = BTreeMap::new();
        let shift = parse_expression(&mut tokens, &mut terms)?;
        let sense = match tokens.next() {
            Some(Token::Le) => Sense::Le,
            Some(Token::Ge) => Sense::Ge,
            Some(Token::Eq) => Sense::Eq,
            other => return Err(tokens.error(format!("expected a sense, found {other:?}"))),
        };
        let rhs = parse_signed_number(&mut tokens)?;
        // Constants on the left fold into the right-hand side.
        constraints.push(ParsedRow { name, terms, sense, rhs: rhs - shift });
    }

    let mut bounds = BTreeMap::new();
    if section_at(&tokens) == Some(Section::Bounds) {
        consume_section(&mut tokens, Section::Bounds);
        while section_at(&tokens).is_none() {
            match tokens.next() {
                Some(Token::Num(lo)) => {
                    if !matches!(tokens.next(), Some(Token::Le)) {
                        return Err(tokens.error("expected `<=` in bound"));
                    }
                    let name = match tokens.next() {
                        Some(Token::Ident(name)) => name,
                        other => {
                            return Err(tokens.error(format!("expected a name in bound, found {other:?}")))
                        }
                    };
                    let hi = if matches!(tokens.peek(), Some(Token::Le)) {
                        tokens.next();
                        parse_signed_number(&mut tokens)?
                    } else {
                        f64::INFINITY
                    };
                    bounds.insert(name, (lo, hi));
                }
                Some(Token::Minus) => {
                    // Negative lower bound: `-1 <= name <= hi`.
                    let lo = -parse_signed_number(&mut tokens)?;
                    if !matches!(tokens.next(), Some(Token::Le)) {
                        return Err(tokens.error("expected `<=` in bound"));
                    }
                    let name = match tokens.next() {
                        Some(Token::Ident(name)) => name,
                        other => {
                            return Err(tokens.error(format!("expected a name in bound, found {other:?}")))
                        }
                    };
                    let hi = if matches!(tokens.peek(), Some(Token::Le)) {
                        tokens.next();
                        parse_signed_number(&mut tokens)?
                    } else {
                        f64::INFINITY
                    };
                    bounds.insert(name, (lo, hi));
                }
                Some(Token::Ident(name)) => match tokens.next() {
                    Some(Token::Ident(word)) if word.eq_ignore_ascii_case("free") => {
                        bounds.insert(name, (f64::NEG_INFINITY, f64::INFINITY));
                    }
                    Some(Token::Le) => {
                        let hi = parse_signed_number(&mut tokens)?;
                        bounds.insert(name, (0.0, hi));
                    }
                    Some(Token::Ge) => {
                        let lo = parse_signed_number(&mut tokens)?;
                        bounds.insert(name, (lo, f64::INFINITY));
                    }
                    Some(Token::Eq) => {
                        let value = parse_signed_number(&mut tokens)?;
                        bounds.insert(name, (value, value));
                    }
                    other => {
                        return Err(tokens.error(format!("bad bound for `{name}`: {other:?}")))
                    }
                },
                other => return Err(tokens.error(format!("bad bounds entry: {other:?}"))),
            }
        }
    }

    let mut binaries = BTreeSet::new();
    if section_at(&tokens) == Some(Section::Binary) {
        consume_section(&mut tokens, Section::Binary);
        while section_at(&tokens).is_none() {
            match tokens.next() {
                Some(Token::Ident(name)) => {
                    binaries.insert(name);
                }
                other => return Err(tokens.error(format!("expected a name, found {other:?}"))),
            }
        }
    }

    match section_at(&tokens) {
        Some(Section::End) => {}
        _ => return Err(tokens.error("expected `End`")),
    }

    Ok(ParsedLp {
        minimize,
        objective,
        objective_constant,
        constraints,
        bounds,
        binaries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::milp::{build_milp, induced_assignment};
    use crate::model::tests::toy_scenario;
    use crate::model::ObjectiveConfig;
    use crate::scenario::Message;
    use crate::solver::sample_feasible_schedule;

    fn msg(sender: usize, receiver: usize, ordinal: usize, window: (usize, usize)) -> Message {
        Message {
            sender,
            receiver,
            ordinal,
            data_type: 0,
            window_start: window.0,
            window_end: window.1,
        }
    }

    fn example_model() -> (crate::scenario::Scenario, LinearModel) {
        let scenario = toy_scenario(
            vec![msg(0, 2, 0, (0, 2)), msg(1, 2, 0, (1, 3)), msg(0, 1, 0, (4, 5))],
            6,
            4,
        );
        let cfg = ObjectiveConfig::for_scenario(&scenario, [0.3, 0.2, 0.5]).unwrap();
        let model = build_milp(&scenario, &cfg).unwrap();
        (scenario, model)
    }

    #[test]
    fn round_trip_preserves_structure() {
        let (_, model) = example_model();
        let text = write_lp_string(&model);
        let parsed = parse_lp_string(&text).unwrap();
        assert!(parsed.minimize);
        assert_eq!(parsed.variable_names().len(), model.variables.len());
        assert_eq!(parsed.constraints.len(), model.constraints.len());
        assert_eq!(parsed.binaries.len(), model.n_binary());
        assert_eq!(parsed.objective_constant, model.objective_constant);
        for (row, parsed_row) in model.constraints.iter().zip(&parsed.constraints) {
            assert_eq!(row.name, parsed_row.name);
            assert_eq!(row.sense, parsed_row.sense);
            assert_eq!(row.rhs, parsed_row.rhs);
            let want: BTreeMap<String, f64> = row
                .terms
                .iter()
                .map(|&(idx, coeff)| (model.variables[idx].name.clone(), coeff))
                .collect();
            assert_eq!(want, parsed_row.terms);
        }
        let want_obj: BTreeMap<String, f64> = model
            .objective
            .iter()
            .map(|&(idx, coeff)| (model.variables[idx].name.clone(), coeff))
            .collect();
        assert_eq!(want_obj, parsed.objective);
    }

    #[test]
    fn round_trip_objective_values_agree() {
        let (scenario, model) = example_model();
        let text = write_lp_string(&model);
        let parsed = parse_lp_string(&text).unwrap();
        for seed in [11, 29, 47] {
            let schedule = sample_feasible_schedule(&scenario, seed);
            let assignment = induced_assignment(&model, &scenario, &schedule).unwrap();
            let named: BTreeMap<String, f64> = model
                .variables
                .iter()
                .zip(&assignment)
                .map(|(v, &value)| (v.name.clone(), value))
                .collect();
            let direct = model.objective_value(&assignment);
            let via_text = parsed.objective_value(&named);
            assert!((direct - via_text).abs() <= 1e-12, "seed {seed}");
        }
    }

    #[test]
    fn negative_values_survive_round_trip() {
        let model = LinearModel {
            name: "tiny".into(),
            variables: vec![
                crate::model::milp::ModelVariable {
                    name: "a".into(),
                    kind: VarKind::Binary,
                    lower: 0.0,
                    upper: 1.0,
                    role: crate::model::milp::VarRole::Switch { device: 0, step: 0 },
                },
                crate::model::milp::ModelVariable {
                    name: "b".into(),
                    kind: VarKind::Continuous,
                    lower: -1.5,
                    upper: 2.5,
                    role: crate::model::milp::VarRole::Carry { device: 0, step: 1 },
                },
            ],
            constraints: vec![crate::model::milp::LinearConstraint {
                name: "r0".into(),
                terms: vec![(0, -0.25), (1, 1e-9)],
                sense: Sense::Ge,
                rhs: -3.75,
            }],
            objective: vec![(0, -0.125), (1, 0.5)],
            objective_constant: -0.8,
        };
        let text = write_lp_string(&model);
        let parsed = parse_lp_string(&text).unwrap();
        assert_eq!(parsed.objective_constant, -0.8);
        assert_eq!(parsed.objective["a"], -0.125);
        assert_eq!(parsed.constraints[0].terms["a"], -0.25);
        assert_eq!(parsed.constraints[0].terms["b"], 1e-9);
        assert_eq!(parsed.constraints[0].rhs, -3.75);
        assert_eq!(parsed.bounds["b"], (-1.5, 2.5));
        assert!(parsed.binaries.contains("a"));
    }

    #[test]
    fn long_rows_wrap_and_still_parse() {
        let variables: Vec<_> = (0..40)
            .map(|i| crate::model::milp::ModelVariable {
                name: format!("x_{i}"),
                kind: VarKind::Binary,
                lower: 0.0,
                upper: 1.0,
                role: crate::model::milp::VarRole::Switch { device: i, step: 0 },
            })
            .collect();
        let model = LinearModel {
            name: "wide".into(),
            variables: variables.clone(),
            constraints: vec![crate::model::milp::LinearConstraint {
                name: "all".into(),
                terms: (0..40).map(|i| (i, 1.0 + i as f64 * 0.001)).collect(),
                sense: Sense::Le,
                rhs: 7.0,
            }],
            objective: (0..40).map(|i| (i, 0.01 * i as f64 + 0.001)).collect(),
            objective_constant: 0.0,
        };
        let text = write_lp_string(&model);
        assert!(text.lines().all(|l| l.len() < 200));
        let parsed = parse_lp_string(&text).unwrap();
        assert_eq!(parsed.constraints[0].terms.len(), 40);
        assert_eq!(parsed.objective.len(), 40);
        assert_eq!(parsed.constraints[0].terms["x_39"], 1.039);
    }

    #[test]
    fn malformed_text_is_rejected_with_line_numbers() {
        assert!(matches!(
            parse_lp_string("Minimize\n obj: x\nSubject To\n r: x <= 1\n"),
            Err(LpError::Syntax { .. })
        ));
        match parse_lp_string("Minimize\n obj: 2 ? x\nSubject To\nEnd\n") {
            Err(LpError::Syntax { line: 2, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }
}
