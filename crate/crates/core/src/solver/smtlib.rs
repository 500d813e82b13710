//! SMT-LIB2 (QF_LRA) text for formulas, and parsing of solver responses.

use std::fmt::Write as _;

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::model::{Assignment, Clause, Formula, LinIneq, Relation, VarId, VarKind};
use crate::rational::{parse_rational, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot parse solver output near `{fragment}`: {message}")]
pub struct ParseError {
    pub fragment: String,
    pub message: String,
}

fn perr(fragment: impl Into<String>, message: impl Into<String>) -> ParseError {
    let mut fragment = fragment.into();
    if fragment.len() > 80 {
        let cut = (0..=80)
            .rev()
            .find(|i| fragment.is_char_boundary(*i))
            .unwrap_or(0);
        fragment.truncate(cut);
    }
    ParseError {
        fragment,
        message: message.into(),
    }
}

/// Constant term: `5`, `(- 5)`, `(/ 3 2)` or `(- (/ 3 2))`.
pub fn rational_term(v: &Rational) -> String {
    let mag = v.abs();
    let body = if mag.is_integer() {
        mag.numer().to_string()
    } else {
        format!("(/ {} {})", mag.numer(), mag.denom())
    };
    if v.is_negative() {
        format!("(- {body})")
    } else {
        body
    }
}

fn atom_term(ineq: &LinIneq) -> String {
    let terms: Vec<String> = ineq
        .coeffs()
        .iter()
        .map(|(v, c)| {
            if *c == Rational::from_integer(1.into()) {
                v.to_string()
            } else {
                format!("(* {} {v})", rational_term(c))
            }
        })
        .collect();
    let lhs = if terms.len() == 1 {
        terms[0].clone()
    } else {
        format!("(+ {})", terms.join(" "))
    };
    let op = match ineq.relation() {
        Relation::Lt => "<",
        Relation::Le => "<=",
    };
    format!("({op} {lhs} {})", rational_term(ineq.rhs()))
}

fn clause_term(c: &Clause) -> String {
    match c.disjuncts() {
        [] => "false".to_string(),
        [one] => atom_term(one),
        many => {
            let parts: Vec<String> = many.iter().map(atom_term).collect();
            format!("(or {})", parts.join(" "))
        }
    }
}

/// Complete one-shot script: logic, declarations, one `assert` per clause,
/// `check-sat`, `get-model`.
pub fn emit_smtlib(formula: &Formula) -> String {
    let mut out = String::new();
    out.push_str("(set-option :produce-models true)\n");
    out.push_str("(set-logic QF_LRA)\n");
    for v in formula.variables() {
        let _ = writeln!(out, "(declare-fun {v} () Real)");
    }
    for c in formula.clauses() {
        let _ = writeln!(out, "(assert {})", clause_term(c));
    }
    out.push_str("(check-sat)\n(get-model)\n");
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

impl Sexp {
    fn render(&self) -> String {
        match self {
            Sexp::Atom(a) => a.clone(),
            Sexp::List(items) => {
                let inner: Vec<String> = items.iter().map(Sexp::render).collect();
                format!("({})", inner.join(" "))
            }
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<String>, ParseError> {
    let mut tokens = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some(&(i, c)) = chars.peek() {
        match c {
            c if c.is_whitespace() => {
                chars.next();
            }
            ';' => {
                for (_, c) in chars.by_ref() {
                    if c == '\n' {
                        break;
                    }
                }
            }
            '(' | ')' => {
                tokens.push(c.to_string());
                chars.next();
            }
            '"' => {
                let mut s = String::from('"');
                chars.next();
                let mut closed = false;
                while let Some((_, c)) = chars.next() {
                    s.push(c);
                    if c == '"' {
                        if chars.peek().map(|p| p.1) == Some('"') {
                            s.push('"');
                            chars.next();
                        } else {
                            closed = true;
                            break;
                        }
                    }
                }
                if !closed {
                    return Err(perr(&text[i..], "unterminated string literal"));
                }
                tokens.push(s);
            }
            '|' => {
                let mut s = String::from('|');
                chars.next();
                let mut closed = false;
                for (_, c) in chars.by_ref() {
                    s.push(c);
                    if c == '|' {
                        closed = true;
                        break;
                    }
                }
                if !closed {
                    return Err(perr(&text[i..], "unterminated quoted symbol"));
                }
                tokens.push(s);
            }
            _ => {
                let mut s = String::new();
                while let Some(&(_, c)) = chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                        break;
                    }
                    s.push(c);
                    chars.next();
                }
                tokens.push(s);
            }
        }
    }
    Ok(tokens)
}

fn parse_sexps(text: &str) -> Result<Vec<Sexp>, ParseError> {
    let tokens = tokenize(text)?;
    let mut stack: Vec<Vec<Sexp>> = vec![Vec::new()];
    for t in tokens {
        match t.as_str() {
            "(" => stack.push(Vec::new()),
            ")" => {
                if stack.len() < 2 {
                    return Err(perr(")", "unbalanced closing parenthesis"));
                }
                let done = stack.pop().unwrap();
                stack.last_mut().unwrap().push(Sexp::List(done));
            }
            _ => stack.last_mut().unwrap().push(Sexp::Atom(t)),
        }
    }
    if stack.len() != 1 {
        return Err(perr(text.trim_end(), "unbalanced opening parenthesis"));
    }
    Ok(stack.pop().unwrap())
}

fn value_of(e: &Sexp) -> Result<Rational, ParseError> {
    match e {
        Sexp::Atom(a) => {
            if a.starts_with('-') || a.contains('/') || a.contains(['e', 'E']) {
                return Err(perr(a.clone(), "not an SMT-LIB numeral or decimal"));
            }
            parse_rational(a).map_err(|_| perr(a.clone(), "not an SMT-LIB numeral or decimal"))
        }
        Sexp::List(items) => match items.as_slice() {
            [Sexp::Atom(op), x] if op == "-" => Ok(-value_of(x)?),
            [Sexp::Atom(op), a, b] if op == "/" => {
                let d = value_of(b)?;
                if d.is_zero() {
                    return Err(perr(e.render(), "division by zero"));
                }
                Ok(value_of(a)? / d)
            }
            [Sexp::Atom(op), x] if op == "to_real" => value_of(x),
            _ => Err(perr(e.render(), "unsupported value form")),
        },
    }
}

fn var_of(name: &str) -> Option<VarId> {
    let (kind, idx) = name.split_once('_')?;
    let object: usize = idx.parse().ok()?;
    let kind = match kind {
        "X" => VarKind::X,
        "Y" => VarKind::Y,
        "T" => VarKind::T,
        _ => return None,
    };
    Some(VarId { object, kind })
}

fn collect_defs(items: &[Sexp], out: &mut Assignment) -> Result<(), ParseError> {
    for item in items {
        let Sexp::List(parts) = item else {
            return Err(perr(item.render(), "expected a definition"));
        };
        match parts.as_slice() {
            [Sexp::Atom(kw), Sexp::Atom(name), Sexp::List(args), sort, value]
                if kw == "define-fun" =>
            {
                if !args.is_empty() {
                    return Err(perr(
                        item.render(),
                        "function definitions with arguments are not values",
                    ));
                }
                if *sort != Sexp::Atom("Real".into()) && *sort != Sexp::Atom("Int".into()) {
                    return Err(perr(item.render(), "unsupported sort"));
                }
                let name = name.trim_matches('|');
                let Some(v) = var_of(name) else {
                    // auxiliary symbols from the solver are ignored
                    continue;
                };
                out.insert(v, value_of(value)?);
            }
            _ => {
                return Err(perr(
                    item.render(),
                    "expected (define-fun <name> () Real <value>)",
                ))
            }
        }
    }
    Ok(())
}

/// Parse a `get-model` response: `((define-fun X_0 () Real (/ 3 2)) ...)`,
/// optionally wrapped as `(model ...)`.
pub fn parse_model(text: &str) -> Result<Assignment, ParseError> {
    let sexps = parse_sexps(text)?;
    let [Sexp::List(items)] = sexps.as_slice() else {
        return Err(perr(text.trim(), "expected a single model list"));
    };
    let items = match items.first() {
        Some(Sexp::Atom(m)) if m == "model" => &items[1..],
        _ => &items[..],
    };
    let mut out = Assignment::new();
    collect_defs(items, &mut out)?;
    Ok(out)
}

/// Verdict line plus model of a one-shot run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Response {
    Sat(Assignment),
    Unsat,
    Unknown,
}

pub fn parse_response(text: &str) -> Result<Response, ParseError> {
    let sexps = parse_sexps(text)?;
    match sexps.first() {
        Some(Sexp::Atom(a)) if a == "unsat" => Ok(Response::Unsat),
        Some(Sexp::Atom(a)) if a == "unknown" => Ok(Response::Unknown),
        Some(Sexp::Atom(a)) if a == "sat" => {
            let Some(Sexp::List(items)) = sexps.get(1) else {
                return Err(perr(text.trim(), "sat verdict without a model"));
            };
            let items = match items.first() {
                Some(Sexp::Atom(m)) if m == "model" => &items[1..],
                _ => &items[..],
            };
            let mut m = Assignment::new();
            collect_defs(items, &mut m)?;
            Ok(Response::Sat(m))
        }
        Some(other) => Err(perr(other.render(), "expected sat, unsat or unknown")),
        None => Err(perr("", "empty solver output")),
    }
}
