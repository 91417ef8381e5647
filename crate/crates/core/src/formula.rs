//! Core types for pseudo-Boolean formulas: variables, literals, terms,
//! linear constraints and assignments.
//!
//! A constraint is a linear form `sum a_i * l_i  <cmp>  rhs` over Boolean
//! literals with arbitrary-precision integer coefficients. A formula is a
//! conjunction of constraints over a declared variable universe `1..=num_vars`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Not;

use num_bigint::BigInt;
use num_traits::Zero;

/// A Boolean variable, identified by its 1-based index.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Var(u32);

impl Var {
    /// Creates a variable from a 1-based index.
    ///
    /// Panics if `index` is zero.
    pub fn new(index: u32) -> Self {
        assert!(index >= 1, "variable indices are 1-based");
        Var(index)
    }

    /// The 1-based index of the variable.
    pub fn index(self) -> u32 {
        self.0
    }

    /// Positive literal of this variable.
    pub fn pos_lit(self) -> Literal {
        Literal {
            var: self,
            negated: false,
        }
    }

    /// Negative literal of this variable.
    pub fn neg_lit(self) -> Literal {
        Literal {
            var: self,
            negated: true,
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

/// A variable or its negation.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Literal {
    var: Var,
    negated: bool,
}

impl Literal {
    pub fn new(var: Var, negated: bool) -> Self {
        Literal { var, negated }
    }

    pub fn var(self) -> Var {
        self.var
    }

    pub fn is_negated(self) -> bool {
        self.negated
    }

    /// Value of the literal under a value for its variable.
    pub fn value(self, var_value: bool) -> bool {
        var_value != self.negated
    }
}

impl Not for Literal {
    type Output = Literal;

    fn not(self) -> Literal {
        Literal {
            var: self.var,
            negated: !self.negated,
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            write!(f, "~{}", self.var)
        } else {
            write!(f, "{}", self.var)
        }
    }
}

/// One term `coeff * literal` of a constraint.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Term {
    pub coeff: BigInt,
    pub literal: Literal,
}

impl Term {
    pub fn new(coeff: impl Into<BigInt>, literal: Literal) -> Self {
        Term {
            coeff: coeff.into(),
            literal,
        }
    }
}

/// Comparison operator of a constraint. After [`PbConstraint::normalize`]
/// only `Ge` and `Eq` occur.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Comparator {
    Ge,
    Eq,
    Le,
}

impl fmt::Display for Comparator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Comparator::Ge => write!(f, ">="),
            Comparator::Eq => write!(f, "="),
            Comparator::Le => write!(f, "<="),
        }
    }
}

/// A single pseudo-Boolean constraint `sum coeff_i * l_i  <cmp>  rhs`.
///
/// Construction merges terms that share a variable and drops zero
/// coefficients, so no two stored terms ever mention the same variable. An
/// empty term list is allowed and evaluates as `0 <cmp> rhs` (a degenerate
/// constraint, used as an explicit FALSE marker when violated).
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct PbConstraint {
    terms: Vec<Term>,
    comparator: Comparator,
    rhs: BigInt,
}

impl PbConstraint {
    /// Builds a constraint, merging duplicate variables by coefficient
    /// addition and dropping zero coefficients.
    ///
    /// A term on a variable already present with the opposite polarity is
    /// folded onto the first-seen polarity via `l = 1 - ~l`, adjusting the
    /// right-hand side.
    pub fn new(terms: Vec<Term>, comparator: Comparator, rhs: impl Into<BigInt>) -> Self {
        let mut rhs = rhs.into();
        let mut merged: Vec<Term> = Vec::with_capacity(terms.len());
        let mut slot_of: BTreeMap<Var, usize> = BTreeMap::new();
        for term in terms {
            if term.coeff.is_zero() {
                continue;
            }
            match slot_of.get(&term.literal.var()) {
                None => {
                    slot_of.insert(term.literal.var(), merged.len());
                    merged.push(term);
                }
                Some(&slot) => {
                    if merged[slot].literal == term.literal {
                        merged[slot].coeff += term.coeff;
                    } else {
                        // a * ~l = a - a * l
                        merged[slot].coeff -= &term.coeff;
                        rhs -= term.coeff;
                    }
                }
            }
        }
        merged.retain(|t| !t.coeff.is_zero());
        PbConstraint {
            terms: merged,
            comparator,
            rhs,
        }
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn comparator(&self) -> Comparator {
        self.comparator
    }

    pub fn rhs(&self) -> &BigInt {
        &self.rhs
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// The term, if the constraint has exactly one.
    pub fn single_term(&self) -> Option<&Term> {
        match self.terms.as_slice() {
            [t] => Some(t),
            _ => None,
        }
    }

    /// Variables mentioned by the constraint.
    pub fn variables(&self) -> impl Iterator<Item = Var> + '_ {
        self.terms.iter().map(|t| t.literal.var())
    }

    /// Rewrites `<=` constraints to `>=` by negating every coefficient and
    /// the right-hand side. `>=` and `=` constraints are returned unchanged.
    pub fn normalize(&self) -> PbConstraint {
        match self.comparator {
            Comparator::Le => PbConstraint {
                terms: self
                    .terms
                    .iter()
                    .map(|t| Term {
                        coeff: -&t.coeff,
                        literal: t.literal,
                    })
                    .collect(),
                comparator: Comparator::Ge,
                rhs: -&self.rhs,
            },
            _ => self.clone(),
        }
    }

    /// Negates the literal and coefficient of term `index` using
    /// `l = 1 - ~l`, decreasing the right-hand side by the original
    /// coefficient. The satisfying set is unchanged.
    ///
    /// Panics if `index` is out of range.
    pub fn flip_term_sign(&self, index: usize) -> PbConstraint {
        assert!(index < self.terms.len(), "term index {index} out of range");
        let mut terms = self.terms.clone();
        let coeff = terms[index].coeff.clone();
        terms[index] = Term {
            coeff: -&coeff,
            literal: !terms[index].literal,
        };
        PbConstraint {
            terms,
            comparator: self.comparator,
            rhs: &self.rhs - coeff,
        }
    }

    /// Smallest value the left-hand side can take.
    pub fn min_sum(&self) -> BigInt {
        self.terms
            .iter()
            .filter(|t| t.coeff < BigInt::zero())
            .map(|t| &t.coeff)
            .sum()
    }

    /// Largest value the left-hand side can take.
    pub fn max_sum(&self) -> BigInt {
        self.terms
            .iter()
            .filter(|t| t.coeff > BigInt::zero())
            .map(|t| &t.coeff)
            .sum()
    }

    /// True if every assignment satisfies the constraint.
    pub fn is_trivially_satisfied(&self) -> bool {
        match self.comparator {
            Comparator::Ge => self.min_sum() >= self.rhs,
            Comparator::Le => self.max_sum() <= self.rhs,
            // An equality holds everywhere only in the degenerate 0 = 0 case.
            Comparator::Eq => self.terms.is_empty() && self.rhs.is_zero(),
        }
    }

    /// True if no assignment satisfies the constraint. For equalities this
    /// is a bound check, not a subset-sum test.
    pub fn is_trivially_violated(&self) -> bool {
        match self.comparator {
            Comparator::Ge => self.max_sum() < self.rhs,
            Comparator::Le => self.min_sum() > self.rhs,
            Comparator::Eq => self.rhs < self.min_sum() || self.rhs > self.max_sum(),
        }
    }

    /// True for the explicit FALSE marker form: no terms and unsatisfiable.
    pub fn is_false_marker(&self) -> bool {
        self.terms.is_empty() && self.is_trivially_violated()
    }

    /// Left-hand side value under a total assignment of the constraint's
    /// variables.
    ///
    /// Panics if a mentioned variable is unassigned.
    pub fn lhs(&self, assignment: &Assignment) -> BigInt {
        let mut sum = BigInt::zero();
        for term in &self.terms {
            let var_value = assignment
                .get(term.literal.var())
                .unwrap_or_else(|| panic!("{} is unassigned", term.literal.var()));
            if term.literal.value(var_value) {
                sum += &term.coeff;
            }
        }
        sum
    }

    /// Evaluates the constraint under a total assignment of its variables.
    pub fn evaluate(&self, assignment: &Assignment) -> bool {
        let lhs = self.lhs(assignment);
        match self.comparator {
            Comparator::Ge => lhs >= self.rhs,
            Comparator::Eq => lhs == self.rhs,
            Comparator::Le => lhs <= self.rhs,
        }
    }
}

impl fmt::Display for PbConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for term in &self.terms {
            write!(f, "{:+} {} ", term.coeff, term.literal)?;
        }
        write!(f, "{} {}", self.comparator, self.rhs)
    }
}

/// A pseudo-Boolean formula: a conjunction of constraints over the variable
/// universe `1..=num_vars`. Variables of the universe may be unmentioned
/// (free); they still count towards the model count.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PbFormula {
    num_vars: u32,
    constraints: Vec<PbConstraint>,
}

impl PbFormula {
    /// Builds a formula over `1..=num_vars`.
    ///
    /// Panics if a constraint mentions a variable outside the universe.
    pub fn new(num_vars: u32, constraints: Vec<PbConstraint>) -> Self {
        for c in &constraints {
            for v in c.variables() {
                assert!(
                    v.index() <= num_vars,
                    "{v} exceeds the declared universe of {num_vars} variables"
                );
            }
        }
        PbFormula {
            num_vars,
            constraints,
        }
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn constraints(&self) -> &[PbConstraint] {
        &self.constraints
    }

    /// Variables that occur in at least one constraint, ascending.
    pub fn occurring_vars(&self) -> Vec<Var> {
        let mut seen = vec![false; self.num_vars as usize + 1];
        for c in &self.constraints {
            for v in c.variables() {
                seen[v.index() as usize] = true;
            }
        }
        (1..=self.num_vars)
            .filter(|&i| seen[i as usize])
            .map(Var::new)
            .collect()
    }

    /// Normalizes every constraint to `>=` / `=` form.
    pub fn normalize(&self) -> PbFormula {
        PbFormula {
            num_vars: self.num_vars,
            constraints: self
                .constraints
                .iter()
                .map(PbConstraint::normalize)
                .collect(),
        }
    }

    /// Restricts the formula under a partial assignment.
    ///
    /// Terms over assigned variables are removed and the right-hand side is
    /// reduced by the coefficient of every literal the assignment makes
    /// true. A constraint that loses at least one term and becomes trivially
    /// satisfied is dropped; one that becomes an empty violated constraint is
    /// kept as an explicit FALSE marker. Untouched constraints are kept
    /// verbatim, so restricting by the empty assignment is the identity.
    pub fn restrict(&self, assignment: &Assignment) -> PbFormula {
        if assignment.is_empty() {
            return self.clone();
        }
        let mut constraints = Vec::with_capacity(self.constraints.len());
        for c in &self.constraints {
            let mut touched = false;
            let mut terms = Vec::with_capacity(c.terms.len());
            let mut rhs = c.rhs.clone();
            for term in &c.terms {
                match assignment.get(term.literal.var()) {
                    None => terms.push(term.clone()),
                    Some(value) => {
                        touched = true;
                        if term.literal.value(value) {
                            rhs -= &term.coeff;
                        }
                    }
                }
            }
            let restricted = PbConstraint {
                terms,
                comparator: c.comparator,
                rhs,
            };
            if touched && restricted.is_trivially_satisfied() {
                continue;
            }
            constraints.push(restricted);
        }
        PbFormula {
            num_vars: self.num_vars,
            constraints,
        }
    }

    /// Evaluates the formula under a total assignment of `1..=num_vars`.
    ///
    /// Panics if any universe variable is unassigned.
    pub fn evaluate(&self, assignment: &Assignment) -> bool {
        for i in 1..=self.num_vars {
            assert!(
                assignment.get(Var::new(i)).is_some(),
                "assignment is partial: x{i} is unassigned"
            );
        }
        self.constraints.iter().all(|c| c.evaluate(assignment))
    }
}

/// A partial mapping from variables to Boolean values.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Assignment {
    map: BTreeMap<Var, bool>,
}

impl Assignment {
    pub fn new() -> Self {
        Assignment::default()
    }

    pub fn get(&self, var: Var) -> Option<bool> {
        self.map.get(&var).copied()
    }

    /// Sets a variable, returning the previous value if there was one.
    pub fn insert(&mut self, var: Var, value: bool) -> Option<bool> {
        self.map.insert(var, value)
    }

    pub fn contains(&self, var: Var) -> bool {
        self.map.contains_key(&var)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Var, bool)> + '_ {
        self.map.iter().map(|(&v, &b)| (v, b))
    }

    /// The literal each assigned variable is mapped to.
    pub fn literals(&self) -> impl Iterator<Item = Literal> + '_ {
        self.iter()
            .map(|(v, b)| if b { v.pos_lit() } else { v.neg_lit() })
    }
}

impl FromIterator<(Var, bool)> for Assignment {
    fn from_iter<I: IntoIterator<Item = (Var, bool)>>(iter: I) -> Self {
        Assignment {
            map: iter.into_iter().collect(),
        }
    }
}
