//! OPB reading and writing.
//!
//! The accepted grammar is the pseudo-Boolean competition style: optional
//! comment lines starting with `*`, where the first comment line may carry
//! `#variable= N #constraint= M`, followed by one constraint per line. A
//! constraint line is a whitespace-separated sequence of
//! `<signed integer> x<idx>` pairs, one of `>=`, `=`, `<=`, a signed
//! integer, and a terminating `;`.

use std::fmt::Write as _;

use num_bigint::BigInt;
use thiserror::Error;

use crate::formula::{Comparator, PbConstraint, PbFormula, Term, Var};

/// Parse failure, reported with the 1-based input line.
#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}: {kind}")]
pub struct OpbParseError {
    pub line: usize,
    pub kind: OpbErrorKind,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OpbErrorKind {
    #[error("malformed header comment")]
    BadHeader,
    #[error("expected a coefficient, found `{0}`")]
    ExpectedCoefficient(String),
    #[error("expected a variable like `x3`, found `{0}`")]
    ExpectedVariable(String),
    #[error("variable index 0 is invalid; variables are x1..xN")]
    ZeroVariableIndex,
    #[error("x{var} exceeds the declared count of {declared} variables")]
    VariableIndexOutOfRange { var: u32, declared: u32 },
    #[error("missing right-hand side after `{0}`")]
    MissingRhs(String),
    #[error("malformed right-hand side `{0}`")]
    BadRhs(String),
    #[error("missing terminating `;`")]
    MissingTerminator,
    #[error("unexpected tokens after `;`: `{0}`")]
    TrailingTokens(String),
}

fn err(line: usize, kind: OpbErrorKind) -> OpbParseError {
    OpbParseError { line, kind }
}

fn parse_int(token: &str) -> Option<BigInt> {
    let body = token.strip_prefix('+').unwrap_or(token);
    if body.is_empty() || body == "-" {
        return None;
    }
    body.parse().ok()
}

/// Parses an OPB document into a formula.
///
/// Duplicate variables within a constraint are merged by coefficient
/// addition and zero coefficients are dropped. Without a header the
/// universe is the largest mentioned variable index.
pub fn parse_opb(input: &str) -> Result<PbFormula, OpbParseError> {
    let mut declared: Option<(u32, usize)> = None;
    let mut seen_comment = false;
    let mut max_var = 0u32;
    let mut constraints = Vec::new();

    for (lineno, raw) in input.lines().enumerate() {
        let lineno = lineno + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('*') {
            if !seen_comment {
                seen_comment = true;
                if comment.contains("#variable=") {
                    declared = Some(
                        parse_header(comment)
                            .ok_or_else(|| err(lineno, OpbErrorKind::BadHeader))?,
                    );
                }
            }
            continue;
        }
        let constraint = parse_constraint_line(line, lineno, declared.map(|d| d.0), &mut max_var)?;
        constraints.push(constraint);
    }

    let num_vars = declared.map(|d| d.0).unwrap_or(max_var);
    Ok(PbFormula::new(num_vars, constraints))
}

fn parse_header(comment: &str) -> Option<(u32, usize)> {
    let tokens: Vec<&str> = comment.split_whitespace().collect();
    let var_pos = tokens.iter().position(|&t| t == "#variable=")?;
    let con_pos = tokens.iter().position(|&t| t == "#constraint=")?;
    let num_vars = tokens.get(var_pos + 1)?.parse().ok()?;
    let num_constraints = tokens.get(con_pos + 1)?.parse().ok()?;
    Some((num_vars, num_constraints))
}

fn parse_constraint_line(
    line: &str,
    lineno: usize,
    declared: Option<u32>,
    max_var: &mut u32,
) -> Result<PbConstraint, OpbParseError> {
    let mut tokens = line.split_whitespace().peekable();
    let mut terms = Vec::new();

    let comparator = loop {
        let token = tokens
            .peek()
            .copied()
            .ok_or_else(|| err(lineno, OpbErrorKind::MissingTerminator))?;
        match token {
            ">=" => break Comparator::Ge,
            "=" => break Comparator::Eq,
            "<=" => break Comparator::Le,
            _ => {}
        }
        let coeff_token = tokens.next().unwrap();
        let coeff = parse_int(coeff_token).ok_or_else(|| {
            err(
                lineno,
                OpbErrorKind::ExpectedCoefficient(coeff_token.into()),
            )
        })?;
        let var_token = tokens
            .next()
            .ok_or_else(|| err(lineno, OpbErrorKind::ExpectedVariable(String::new())))?;
        let index: u32 = var_token
            .strip_prefix('x')
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| err(lineno, OpbErrorKind::ExpectedVariable(var_token.into())))?;
        if index == 0 {
            return Err(err(lineno, OpbErrorKind::ZeroVariableIndex));
        }
        if let Some(declared) = declared {
            if index > declared {
                return Err(err(
                    lineno,
                    OpbErrorKind::VariableIndexOutOfRange {
                        var: index,
                        declared,
                    },
                ));
            }
        }
        *max_var = (*max_var).max(index);
        terms.push(Term::new(coeff, Var::new(index).pos_lit()));
    };
    let cmp_token = tokens.next().unwrap();

    let rhs_token = tokens
        .next()
        .ok_or_else(|| err(lineno, OpbErrorKind::MissingRhs(cmp_token.into())))?;
    // accept the terminator glued to the right-hand side
    let (rhs_token, glued_terminator) = match rhs_token.strip_suffix(';') {
        Some(stripped) => (stripped, true),
        None => (rhs_token, false),
    };
    let rhs =
        parse_int(rhs_token).ok_or_else(|| err(lineno, OpbErrorKind::BadRhs(rhs_token.into())))?;

    if !glued_terminator {
        match tokens.next() {
            Some(";") => {}
            _ => return Err(err(lineno, OpbErrorKind::MissingTerminator)),
        }
    }
    if let Some(extra) = tokens.next() {
        return Err(err(lineno, OpbErrorKind::TrailingTokens(extra.into())));
    }

    Ok(PbConstraint::new(terms, comparator, rhs))
}

/// Renders a formula in OPB format, deterministically: header comment first,
/// then one line per constraint with terms in variable-index order. Negated
/// literals are folded to positive form first, since the format has no
/// negation syntax.
pub fn render_opb(formula: &PbFormula) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "* #variable= {} #constraint= {}",
        formula.num_vars(),
        formula.constraints().len()
    );
    for constraint in formula.constraints() {
        let mut terms = Vec::with_capacity(constraint.terms().len());
        let mut rhs = constraint.rhs().clone();
        for term in constraint.terms() {
            if term.literal.is_negated() {
                // a * ~x = a - a * x
                rhs -= &term.coeff;
                terms.push((term.literal.var(), -&term.coeff));
            } else {
                terms.push((term.literal.var(), term.coeff.clone()));
            }
        }
        terms.sort_by_key(|(v, _)| *v);
        for (var, coeff) in &terms {
            let _ = write!(out, "{coeff:+} {var} ");
        }
        let _ = writeln!(out, "{} {} ;", constraint.comparator(), rhs);
    }
    out
}
