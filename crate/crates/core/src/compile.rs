//! Compilation of one normalized constraint into a 0/1-leaf ADD.
//!
//! Two routes are provided: bottom-up builds the linear expression ADD and
//! thresholds its leaves; top-down recurses over the term list with ITE and
//! terminates early once the remaining slack decides the constraint. The
//! optimized entry points rewrite the term list first (sign manipulation and
//! sorting), and the dynamic selector picks a route per constraint from
//! coefficient statistics.

use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::add::{AddHandle, AddManager, AddOp};
use crate::formula::{Comparator, PbConstraint, Term};

/// Compilation route requested by the caller.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CompileMode {
    BottomUp,
    TopDown,
    /// Chooses between the other two per constraint.
    Dynamic,
}

/// Route a compilation actually took.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ResolvedMode {
    BottomUp,
    TopDown,
}

impl std::fmt::Display for ResolvedMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ResolvedMode::BottomUp => write!(f, "bottomup"),
            ResolvedMode::TopDown => write!(f, "topdown"),
        }
    }
}

/// Instrumentation gathered while compiling one constraint.
#[derive(Clone, Debug)]
pub struct CompileStats {
    pub mode: ResolvedMode,
    /// Recursive calls taken by the top-down route (0 for bottom-up).
    pub recursion_calls: u64,
    /// Largest intermediate expression-ADD size seen by the bottom-up route
    /// (0 for top-down).
    pub peak_expression_nodes: usize,
}

/// A compiled constraint: its indicator ADD plus instrumentation.
#[derive(Clone, Debug)]
pub struct CompiledConstraint {
    pub add: AddHandle,
    pub stats: CompileStats,
}

/// The top-down route requires terms in ascending coefficient order or all
/// coefficients non-negative; a negative coefficient after a non-negative
/// one violates that.
#[derive(Debug, Error, PartialEq, Eq)]
#[error(
    "term {index} has a negative coefficient after a non-negative one; sort or flip signs first"
)]
pub struct TermOrderError {
    pub index: usize,
}

/// Outcome of a budgeted top-down run: `add` is `None` when the call budget
/// was exhausted before the recursion finished.
#[derive(Clone, Debug)]
pub struct TopDownOutcome {
    pub add: Option<AddHandle>,
    pub calls: u64,
}

fn assert_normalized(constraint: &PbConstraint) {
    assert!(
        constraint.comparator() != Comparator::Le,
        "compilation expects a normalized (>= or =) constraint"
    );
}

/// Builds the expression ADD `sum coeff_i * literal_i` term by term, then
/// maps every leaf to 1 where it satisfies the comparator and 0 elsewhere.
pub fn compile_bottom_up(
    manager: &mut AddManager,
    constraint: &PbConstraint,
) -> CompiledConstraint {
    assert_normalized(constraint);
    let mut expr = manager.zero();
    let mut peak = manager.node_count(expr);
    for term in constraint.terms() {
        let coeff = manager.constant(BigRational::from_integer(term.coeff.clone()));
        let literal = manager.literal(term.literal);
        let term_add = manager.apply(AddOp::Mul, coeff, literal);
        expr = manager.apply(AddOp::Add, expr, term_add);
        peak = peak.max(manager.node_count(expr));
    }
    let rhs = BigRational::from_integer(constraint.rhs().clone());
    let eq = constraint.comparator() == Comparator::Eq;
    let add = manager.map_leaves(expr, |value| {
        let satisfied = if eq { *value == rhs } else { *value >= rhs };
        if satisfied {
            BigRational::one()
        } else {
            BigRational::zero()
        }
    });
    CompiledConstraint {
        add,
        stats: CompileStats {
            mode: ResolvedMode::BottomUp,
            recursion_calls: 0,
            peak_expression_nodes: peak,
        },
    }
}

struct TopDownRun<'m> {
    manager: &'m mut AddManager,
    terms: Vec<Term>,
    eq: bool,
    calls: u64,
    budget: Option<u64>,
}

impl TopDownRun<'_> {
    fn recur(&mut self, k: BigInt, idx: usize) -> Option<AddHandle> {
        self.calls += 1;
        if self.budget.is_some_and(|budget| self.calls > budget) {
            return None;
        }
        // Once the current (and thus every remaining) coefficient is
        // non-negative, k can only decrease in deeper calls.
        let is_pos = idx >= self.terms.len() || !self.terms[idx].coeff.is_negative();
        if self.eq && is_pos && k.is_negative() {
            return Some(self.manager.zero());
        }
        if !self.eq && is_pos && k <= BigInt::zero() {
            return Some(self.manager.one());
        }
        if idx < self.terms.len() {
            let literal = self.manager.literal(self.terms[idx].literal);
            let lo = self.recur(k.clone(), idx + 1)?;
            let hi = self.recur(k - &self.terms[idx].coeff, idx + 1)?;
            Some(self.manager.ite(literal, hi, lo))
        } else if self.eq && k.is_zero() {
            Some(self.manager.one())
        } else {
            Some(self.manager.zero())
        }
    }
}

fn check_term_order(constraint: &PbConstraint) -> Result<(), TermOrderError> {
    let mut seen_non_negative = false;
    for (index, term) in constraint.terms().iter().enumerate() {
        if term.coeff.is_negative() {
            if seen_non_negative {
                return Err(TermOrderError { index });
            }
        } else {
            seen_non_negative = true;
        }
    }
    Ok(())
}

fn run_top_down(
    manager: &mut AddManager,
    constraint: &PbConstraint,
    budget: Option<u64>,
) -> TopDownOutcome {
    let eq = constraint.comparator() == Comparator::Eq;
    let terms = constraint.terms();
    if terms.is_empty() {
        let satisfied = if eq {
            constraint.rhs().is_zero()
        } else {
            constraint.rhs() <= &BigInt::zero()
        };
        let add = if satisfied {
            manager.one()
        } else {
            manager.zero()
        };
        return TopDownOutcome {
            add: Some(add),
            calls: 0,
        };
    }
    let mut run = TopDownRun {
        manager,
        terms: terms.to_vec(),
        eq,
        calls: 0,
        budget,
    };
    let root = run.manager.literal(terms[0].literal);
    let lo = run.recur(constraint.rhs().clone(), 1);
    let hi = match lo {
        Some(_) => run.recur(constraint.rhs() - &terms[0].coeff, 1),
        None => None,
    };
    let add = match (lo, hi) {
        (Some(lo), Some(hi)) => Some(run.manager.ite(root, hi, lo)),
        _ => None,
    };
    TopDownOutcome {
        add,
        calls: run.calls,
    }
}

/// Recursive ITE construction over the term list, decrementing the
/// right-hand side on each true branch.
///
/// Errors when the term order admits no early termination (a negative
/// coefficient after a non-negative one); use
/// [`optimize_compile_top_down`] for arbitrary constraints.
pub fn compile_top_down(
    manager: &mut AddManager,
    constraint: &PbConstraint,
) -> Result<CompiledConstraint, TermOrderError> {
    assert_normalized(constraint);
    check_term_order(constraint)?;
    let outcome = run_top_down(manager, constraint, None);
    Ok(CompiledConstraint {
        add: outcome.add.expect("unbudgeted run always finishes"),
        stats: CompileStats {
            mode: ResolvedMode::TopDown,
            recursion_calls: outcome.calls,
            peak_expression_nodes: 0,
        },
    })
}

/// Like [`compile_top_down`] but gives up once the recursion exceeds
/// `budget` calls, for instrumentation of runs that are known to blow up.
pub fn compile_top_down_budgeted(
    manager: &mut AddManager,
    constraint: &PbConstraint,
    budget: u64,
) -> Result<TopDownOutcome, TermOrderError> {
    assert_normalized(constraint);
    check_term_order(constraint)?;
    Ok(run_top_down(manager, constraint, Some(budget)))
}

/// Sorts terms by ascending coefficient magnitude and flips literals so the
/// coefficient signs alternate starting positive, to improve subset-sum
/// collisions in the intermediate expression ADD.
fn rewrite_for_bottom_up(constraint: &PbConstraint) -> PbConstraint {
    let mut terms = constraint.terms().to_vec();
    terms.sort_by_cached_key(|t| t.coeff.abs());
    let mut rewritten = PbConstraint::new(terms, constraint.comparator(), constraint.rhs().clone());
    for index in 0..rewritten.terms().len() {
        let coeff = &rewritten.terms()[index].coeff;
        let wrong_sign = if index % 2 == 0 {
            coeff.is_negative()
        } else {
            coeff.is_positive()
        };
        if wrong_sign {
            rewritten = rewritten.flip_term_sign(index);
        }
    }
    rewritten
}

/// Flips every negative-coefficient term and sorts descending, so the
/// top-down precondition holds and large coefficients are tried first.
fn rewrite_for_top_down(constraint: &PbConstraint) -> PbConstraint {
    let mut rewritten = constraint.clone();
    for index in 0..rewritten.terms().len() {
        if rewritten.terms()[index].coeff.is_negative() {
            rewritten = rewritten.flip_term_sign(index);
        }
    }
    let mut terms = rewritten.terms().to_vec();
    terms.sort_by(|a, b| b.coeff.cmp(&a.coeff));
    PbConstraint::new(terms, rewritten.comparator(), rewritten.rhs().clone())
}

/// Bottom-up compilation after the subset-sum-collision rewrite.
pub fn optimize_compile_bottom_up(
    manager: &mut AddManager,
    constraint: &PbConstraint,
) -> CompiledConstraint {
    assert_normalized(constraint);
    compile_bottom_up(manager, &rewrite_for_bottom_up(constraint))
}

/// Top-down compilation after making all coefficients positive and sorting
/// descending.
pub fn optimize_compile_top_down(
    manager: &mut AddManager,
    constraint: &PbConstraint,
) -> CompiledConstraint {
    assert_normalized(constraint);
    compile_top_down(manager, &rewrite_for_top_down(constraint))
        .expect("all-positive descending terms satisfy the order precondition")
}

/// Budgeted variant of [`optimize_compile_top_down`].
pub fn optimize_compile_top_down_budgeted(
    manager: &mut AddManager,
    constraint: &PbConstraint,
    budget: u64,
) -> TopDownOutcome {
    assert_normalized(constraint);
    compile_top_down_budgeted(manager, &rewrite_for_top_down(constraint), budget)
        .expect("all-positive descending terms satisfy the order precondition")
}

/// Statistics over the absolute coefficient values of a term list, driving
/// the dynamic route selection.
#[derive(Clone, Debug)]
pub struct CoefficientStats {
    pub sorted_abs_coeffs: Vec<BigInt>,
    /// Element at index `floor(0.25 * (len - 1))` of the ascending sorted
    /// absolute coefficients.
    pub percentile25: BigInt,
    /// Distinct absolute coefficient values over the term count.
    pub unique_coeff_rate: Rational64,
    /// Distinct differences of consecutive absolute coefficients, in term
    /// order, over `len - 1`; 1 for a single term.
    pub unique_adj_diff_rate: Rational64,
}

/// Computes [`CoefficientStats`]. Panics on an empty term list.
pub fn coefficient_stats(terms: &[Term]) -> CoefficientStats {
    assert!(
        !terms.is_empty(),
        "coefficient statistics need at least one term"
    );
    let abs: Vec<BigInt> = terms.iter().map(|t| t.coeff.abs()).collect();
    let mut sorted = abs.clone();
    sorted.sort();
    let percentile25 = sorted[(terms.len() - 1) / 4].clone();
    let distinct_coeffs = {
        let mut unique = sorted.clone();
        unique.dedup();
        unique.len()
    };
    let unique_coeff_rate = Rational64::new(distinct_coeffs as i64, terms.len() as i64);
    let unique_adj_diff_rate = if terms.len() == 1 {
        Rational64::one()
    } else {
        let mut diffs: Vec<BigInt> = abs.windows(2).map(|pair| &pair[1] - &pair[0]).collect();
        diffs.sort();
        diffs.dedup();
        Rational64::new(diffs.len() as i64, terms.len() as i64 - 1)
    };
    CoefficientStats {
        sorted_abs_coeffs: sorted,
        percentile25,
        unique_coeff_rate,
        unique_adj_diff_rate,
    }
}

/// Per-constraint route selection: top-down iff
/// `len <= 25 && k < p25` or
/// `k < p25 && unique_coeff_rate >= 0.9 && unique_adj_diff_rate >= 0.85`,
/// bottom-up otherwise. Both conditions are evaluated on the constraint as
/// given, before the optimization rewrites.
pub fn compile_dynamic(manager: &mut AddManager, constraint: &PbConstraint) -> CompiledConstraint {
    assert_normalized(constraint);
    if constraint.terms().is_empty() {
        return optimize_compile_bottom_up(manager, constraint);
    }
    let stats = coefficient_stats(constraint.terms());
    let below_percentile = constraint.rhs() < &stats.percentile25;
    let cond1 = constraint.terms().len() <= 25 && below_percentile;
    let cond2 = below_percentile
        && stats.unique_coeff_rate >= Rational64::new(9, 10)
        && stats.unique_adj_diff_rate >= Rational64::new(17, 20);
    if cond1 || cond2 {
        optimize_compile_top_down(manager, constraint)
    } else {
        optimize_compile_bottom_up(manager, constraint)
    }
}

/// Dispatches on the requested mode.
pub fn compile(
    manager: &mut AddManager,
    constraint: &PbConstraint,
    mode: CompileMode,
) -> CompiledConstraint {
    match mode {
        CompileMode::BottomUp => optimize_compile_bottom_up(manager, constraint),
        CompileMode::TopDown => optimize_compile_top_down(manager, constraint),
        CompileMode::Dynamic => compile_dynamic(manager, constraint),
    }
}
