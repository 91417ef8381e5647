//! Literal weight functions for weighted model counting.
//!
//! A weight function maps literals to exact nonnegative rationals and
//! defaults to 1 for unmapped literals, so the empty function is the
//! unweighted case. The text format is one entry per line:
//! `w <lit> <numerator>/<denominator>` or `w <lit> <decimal>`, where a
//! negative `<lit>` denotes the negated literal.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::formula::{Literal, Var};

/// Mapping from literals to exact nonnegative rational weights.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct WeightFunction {
    weights: BTreeMap<Literal, BigRational>,
}

impl WeightFunction {
    /// The all-ones weight function (unweighted counting).
    pub fn ones() -> Self {
        WeightFunction::default()
    }

    /// Stores a weight. Panics if `weight` is negative.
    pub fn set(&mut self, literal: Literal, weight: BigRational) {
        assert!(weight >= BigRational::zero(), "weights must be nonnegative");
        self.weights.insert(literal, weight);
    }

    /// Weight of a literal, defaulting to 1.
    pub fn weight(&self, literal: Literal) -> BigRational {
        self.weights
            .get(&literal)
            .cloned()
            .unwrap_or_else(BigRational::one)
    }

    /// True if every literal weighs 1.
    pub fn is_all_ones(&self) -> bool {
        self.weights.values().all(|w| w.is_one())
    }

    /// Product of the weights of an assignment's literals.
    pub fn assignment_weight<I: IntoIterator<Item = Literal>>(&self, literals: I) -> BigRational {
        literals
            .into_iter()
            .fold(BigRational::one(), |acc, lit| acc * self.weight(lit))
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}: {kind}")]
pub struct WeightsParseError {
    pub line: usize,
    pub kind: WeightsErrorKind,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WeightsErrorKind {
    #[error("expected `w <lit> <weight>`, found `{0}`")]
    MalformedLine(String),
    #[error("malformed literal `{0}`")]
    BadLiteral(String),
    #[error("malformed rational `{0}`")]
    BadRational(String),
    #[error("negative weight `{0}`")]
    NegativeWeight(String),
    #[error("duplicate entry for literal {0}")]
    DuplicateLiteral(i64),
}

fn werr(line: usize, kind: WeightsErrorKind) -> WeightsParseError {
    WeightsParseError { line, kind }
}

/// Parses a weights file. Unmentioned literals keep the default weight 1.
pub fn parse_weights(input: &str) -> Result<WeightFunction, WeightsParseError> {
    let mut weights = WeightFunction::ones();
    for (lineno, raw) in input.lines().enumerate() {
        let lineno = lineno + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('*') {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let [marker, lit_token, weight_token] = tokens.as_slice() else {
            return Err(werr(lineno, WeightsErrorKind::MalformedLine(line.into())));
        };
        if *marker != "w" {
            return Err(werr(lineno, WeightsErrorKind::MalformedLine(line.into())));
        }
        let lit_value: i64 = lit_token
            .parse()
            .map_err(|_| werr(lineno, WeightsErrorKind::BadLiteral((*lit_token).into())))?;
        if lit_value == 0 {
            return Err(werr(
                lineno,
                WeightsErrorKind::BadLiteral((*lit_token).into()),
            ));
        }
        let var = Var::new(lit_value.unsigned_abs().try_into().unwrap());
        let literal = if lit_value > 0 {
            var.pos_lit()
        } else {
            var.neg_lit()
        };
        if weights.weights.contains_key(&literal) {
            return Err(werr(lineno, WeightsErrorKind::DuplicateLiteral(lit_value)));
        }
        let weight = parse_rational(weight_token).ok_or_else(|| {
            werr(
                lineno,
                WeightsErrorKind::BadRational((*weight_token).into()),
            )
        })?;
        if weight < BigRational::zero() {
            return Err(werr(
                lineno,
                WeightsErrorKind::NegativeWeight((*weight_token).into()),
            ));
        }
        weights.weights.insert(literal, weight);
    }
    Ok(weights)
}

/// Reads `a/b`, a decimal like `0.25`, or a plain integer, exactly.
fn parse_rational(token: &str) -> Option<BigRational> {
    if let Some((num, den)) = token.split_once('/') {
        let num: BigInt = num.parse().ok()?;
        let den: BigInt = den.parse().ok()?;
        if den.is_zero() {
            return None;
        }
        return Some(BigRational::new(num, den));
    }
    if let Some((int_part, frac_part)) = token.split_once('.') {
        if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let negative = int_part.starts_with('-');
        let int_part: BigInt = if int_part.is_empty() || int_part == "-" || int_part == "+" {
            BigInt::zero()
        } else {
            int_part.parse().ok()?
        };
        let scale = BigInt::from(10u32).pow(frac_part.len() as u32);
        let frac: BigInt = frac_part.parse().ok()?;
        let numerator = int_part * &scale + if negative { -frac } else { frac };
        return Some(BigRational::new(numerator, scale));
    }
    let int: BigInt = token.parse().ok()?;
    Some(BigRational::from_integer(int))
}
