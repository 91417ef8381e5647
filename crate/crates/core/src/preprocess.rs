//! Formula simplification: iterated decision inference on single-term
//! constraints, propagation, and assumption probing.
//!
//! The driver alternates a unit-inference sweep and a probing sweep, each
//! followed by one propagation, until the formula stops changing. All forced
//! assignments are accumulated so the caller can account for their weights;
//! conflicts and violated markers surface as `unsat`.

use num_bigint::BigInt;
use num_traits::Zero;

use crate::formula::{Assignment, Comparator, PbConstraint, PbFormula, Var};

/// Classification of a single-term constraint over the two values its
/// literal can take.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum InferenceResult {
    /// Exactly one literal value satisfies the constraint; the variable is
    /// forced to the stated Boolean.
    Forced(Var, bool),
    /// Both literal values satisfy the constraint.
    Tautology,
    /// Neither literal value satisfies the constraint.
    Contradiction,
}

/// Classifies a single-term constraint `a * l <cmp> k` by checking the two
/// possible left-hand sides `{0, a}`.
///
/// Panics unless the constraint has exactly one term and a `>=` or `=`
/// comparator (normalize first).
pub fn infer_decision(constraint: &PbConstraint) -> InferenceResult {
    let term = constraint
        .single_term()
        .expect("decision inference needs exactly one term");
    assert!(
        constraint.comparator() != Comparator::Le,
        "decision inference needs a normalized (>= or =) constraint"
    );
    let satisfied = |lhs: &BigInt| match constraint.comparator() {
        Comparator::Ge => lhs >= constraint.rhs(),
        Comparator::Eq => lhs == constraint.rhs(),
        Comparator::Le => unreachable!(),
    };
    let lit_false = satisfied(&BigInt::zero());
    let lit_true = satisfied(&term.coeff);
    match (lit_false, lit_true) {
        (true, true) => InferenceResult::Tautology,
        (false, false) => InferenceResult::Contradiction,
        // the literal must be true: unfold its polarity onto the variable
        (false, true) => InferenceResult::Forced(term.literal.var(), !term.literal.is_negated()),
        (true, false) => InferenceResult::Forced(term.literal.var(), term.literal.is_negated()),
    }
}

/// Result of propagating an assignment: either the simplified formula or
/// the discovery that it is unsatisfiable.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Propagation {
    Formula(PbFormula),
    Unsat,
}

/// Restricts the formula under `assignment` and reports UNSAT when a
/// violated marker constraint remains.
pub fn propagate(formula: &PbFormula, assignment: &Assignment) -> Propagation {
    let restricted = formula.restrict(assignment);
    if restricted
        .constraints()
        .iter()
        .any(PbConstraint::is_false_marker)
    {
        Propagation::Unsat
    } else {
        Propagation::Formula(restricted)
    }
}

struct BranchInference {
    forced: Assignment,
    contradictory: bool,
}

fn probe_branch(formula: &PbFormula, var: Var, value: bool) -> BranchInference {
    let assignment: Assignment = [(var, value)].into_iter().collect();
    let restricted = formula.restrict(&assignment);
    let mut forced = Assignment::new();
    let mut contradictory = restricted
        .constraints()
        .iter()
        .any(PbConstraint::is_false_marker);
    for constraint in restricted.constraints() {
        if contradictory {
            break;
        }
        if constraint.single_term().is_none() {
            continue;
        }
        match infer_decision(constraint) {
            InferenceResult::Forced(v, b) => {
                if forced.insert(v, b).is_some_and(|prev| prev != b) {
                    contradictory = true;
                }
            }
            InferenceResult::Contradiction => contradictory = true,
            InferenceResult::Tautology => {}
        }
    }
    BranchInference {
        forced,
        contradictory,
    }
}

/// Probes both values of `var` and returns the variables inferred to the
/// same value under both branches.
///
/// A single contradictory branch forces `var` itself to the other value. If
/// both branches are contradictory the formula is unsatisfiable; `var` is
/// returned forced (arbitrarily true) and the contradiction surfaces during
/// the following propagation or inference sweep.
pub fn assum_probe(formula: &PbFormula, var: Var) -> Assignment {
    let on_true = probe_branch(formula, var, true);
    let on_false = probe_branch(formula, var, false);
    match (on_true.contradictory, on_false.contradictory) {
        (true, true) => [(var, true)].into_iter().collect(),
        (true, false) => [(var, false)].into_iter().collect(),
        (false, true) => [(var, true)].into_iter().collect(),
        (false, false) => on_true
            .forced
            .iter()
            .filter(|&(v, b)| v != var && on_false.forced.get(v) == Some(b))
            .collect(),
    }
}

/// Simplified formula plus the assignments forced while simplifying.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PreprocessOutcome {
    pub reduced: PbFormula,
    pub forced: Assignment,
    pub unsat: bool,
}

/// Runs the full simplification loop: unit inference, propagation,
/// assumption probing over all occurring variables, propagation, repeated
/// until the formula no longer changes.
///
/// Expects all constraints normalized to `>=` / `=` form. The weighted count
/// of the input equals the weighted count of `reduced` over the remaining
/// universe times the weight of each forced literal.
pub fn preprocess(formula: &PbFormula) -> PreprocessOutcome {
    let mut current = formula.clone();
    let mut forced = Assignment::new();

    let unsat = |current: PbFormula, forced: Assignment| PreprocessOutcome {
        reduced: current,
        forced,
        unsat: true,
    };

    loop {
        let before = current.clone();

        let mut mapping = Assignment::new();
        for constraint in current.constraints() {
            if constraint.single_term().is_none() {
                continue;
            }
            match infer_decision(constraint) {
                InferenceResult::Forced(v, b) => {
                    if mapping.insert(v, b).is_some_and(|prev| prev != b) {
                        return unsat(current, forced);
                    }
                }
                InferenceResult::Contradiction => return unsat(current, forced),
                InferenceResult::Tautology => {}
            }
        }
        match propagate(&current, &mapping) {
            Propagation::Unsat => return unsat(current, forced),
            Propagation::Formula(next) => current = next,
        }
        for (v, b) in mapping.iter() {
            if forced.insert(v, b).is_some_and(|prev| prev != b) {
                return unsat(current, forced);
            }
        }

        let mut probe_mapping = Assignment::new();
        for var in current.occurring_vars() {
            for (v, b) in assum_probe(&current, var).iter() {
                if probe_mapping.insert(v, b).is_some_and(|prev| prev != b) {
                    return unsat(current, forced);
                }
            }
        }
        match propagate(&current, &probe_mapping) {
            Propagation::Unsat => return unsat(current, forced),
            Propagation::Formula(next) => current = next,
        }
        for (v, b) in probe_mapping.iter() {
            if forced.insert(v, b).is_some_and(|prev| prev != b) {
                return unsat(current, forced);
            }
        }

        if current == before {
            break;
        }
    }

    PreprocessOutcome {
        reduced: current,
        forced,
        unsat: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::Term;

    fn var(i: u32) -> Var {
        Var::new(i)
    }

    fn constraint(terms: Vec<(i64, u32, bool)>, cmp: Comparator, rhs: i64) -> PbConstraint {
        PbConstraint::new(
            terms
                .into_iter()
                .map(|(c, v, neg)| {
                    Term::new(
                        c,
                        if neg {
                            var(v).neg_lit()
                        } else {
                            var(v).pos_lit()
                        },
                    )
                })
                .collect(),
            cmp,
            rhs,
        )
    }

    #[test]
    fn infer_equality_forces_true() {
        let c = constraint(vec![(3, 1, false)], Comparator::Eq, 3);
        assert_eq!(infer_decision(&c), InferenceResult::Forced(var(1), true));
    }

    #[test]
    fn infer_zero_equality_forces_literal_false() {
        // 4 ~x2 = 0 forces the literal ~x2 false, so x2 true
        let c = constraint(vec![(4, 2, true)], Comparator::Eq, 0);
        assert_eq!(infer_decision(&c), InferenceResult::Forced(var(2), true));
    }

    #[test]
    fn infer_ge_forces_true() {
        let c = constraint(vec![(5, 1, false)], Comparator::Ge, 2);
        assert_eq!(infer_decision(&c), InferenceResult::Forced(var(1), true));
    }

    #[test]
    fn infer_unreachable_rhs_is_contradiction() {
        let c = constraint(vec![(2, 1, false)], Comparator::Ge, 3);
        assert_eq!(infer_decision(&c), InferenceResult::Contradiction);
    }

    #[test]
    fn infer_negative_coefficient_on_negated_literal() {
        // -2 ~x1 >= -1: ~x1 = 1 gives -2 < -1, ~x1 = 0 gives 0 >= -1
        let c = constraint(vec![(-2, 1, true)], Comparator::Ge, -1);
        assert_eq!(infer_decision(&c), InferenceResult::Forced(var(1), true));
    }

    #[test]
    fn infer_tautology() {
        let c = constraint(vec![(3, 1, false)], Comparator::Ge, 0);
        assert_eq!(infer_decision(&c), InferenceResult::Tautology);
    }

    /// The two-point rule agrees with direct enumeration of the literal's
    /// values for every small single-term constraint.
    #[test]
    fn infer_matches_two_point_enumeration() {
        for coeff in -10i64..=10 {
            if coeff == 0 {
                continue;
            }
            for rhs in -25i64..=25 {
                for negated in [false, true] {
                    for cmp in [Comparator::Ge, Comparator::Eq] {
                        let c = constraint(vec![(coeff, 1, negated)], cmp, rhs);
                        let sat = |value: bool| {
                            let a: Assignment = [(var(1), value)].into_iter().collect();
                            c.evaluate(&a)
                        };
                        let expected = match (sat(false), sat(true)) {
                            (true, true) => InferenceResult::Tautology,
                            (false, false) => InferenceResult::Contradiction,
                            (false, true) => InferenceResult::Forced(var(1), true),
                            (true, false) => InferenceResult::Forced(var(1), false),
                        };
                        assert_eq!(infer_decision(&c), expected, "{c}");
                    }
                }
            }
        }
    }

    #[test]
    #[should_panic(expected = "exactly one term")]
    fn infer_rejects_multiple_terms() {
        let c = constraint(vec![(1, 1, false), (1, 2, false)], Comparator::Ge, 1);
        infer_decision(&c);
    }

    #[test]
    fn propagate_removes_satisfied_constraints() {
        let g = PbFormula::new(
            2,
            vec![
                constraint(vec![(3, 1, false), (4, 2, false)], Comparator::Ge, 3),
                constraint(vec![(1, 1, false)], Comparator::Ge, 1),
            ],
        );
        let a: Assignment = [(var(1), true)].into_iter().collect();
        let Propagation::Formula(reduced) = propagate(&g, &a) else {
            panic!("expected a formula");
        };
        assert!(reduced.constraints().is_empty());
    }

    #[test]
    fn propagate_detects_unsat() {
        let g = PbFormula::new(1, vec![constraint(vec![(1, 1, false)], Comparator::Ge, 1)]);
        let a: Assignment = [(var(1), false)].into_iter().collect();
        assert_eq!(propagate(&g, &a), Propagation::Unsat);
    }

    #[test]
    fn propagate_empty_assignment_is_identity() {
        let g = PbFormula::new(
            2,
            vec![constraint(
                vec![(2, 1, false), (3, 2, false)],
                Comparator::Ge,
                3,
            )],
        );
        assert_eq!(
            propagate(&g, &Assignment::new()),
            Propagation::Formula(g.clone())
        );
    }

    #[test]
    fn probe_agreeing_branches() {
        // both branches of x1 force x2 true
        let g = PbFormula::new(
            2,
            vec![constraint(
                vec![(2, 1, false), (3, 2, false)],
                Comparator::Ge,
                3,
            )],
        );
        let probed = assum_probe(&g, var(1));
        assert_eq!(probed.len(), 1);
        assert_eq!(probed.get(var(2)), Some(true));
    }

    #[test]
    fn probe_single_branch_inference_is_discarded() {
        // x1 = 1 satisfies the constraint outright, so only one branch infers x2
        let g = PbFormula::new(
            2,
            vec![constraint(
                vec![(1, 1, false), (1, 2, false)],
                Comparator::Ge,
                1,
            )],
        );
        assert!(assum_probe(&g, var(1)).is_empty());
    }

    #[test]
    fn probe_empty_formula() {
        let g = PbFormula::new(3, vec![]);
        assert!(assum_probe(&g, var(2)).is_empty());
    }

    #[test]
    fn probe_contradictory_branch_forces_probed_variable() {
        // x1 = 0 leaves 2 x2 >= 3, contradictory, so x1 is forced true
        let g = PbFormula::new(
            2,
            vec![constraint(
                vec![(3, 1, false), (2, 2, false)],
                Comparator::Ge,
                3,
            )],
        );
        let probed = assum_probe(&g, var(1));
        assert_eq!(probed.get(var(1)), Some(true));
        assert_eq!(probed.len(), 1);
    }

    #[test]
    fn preprocess_forces_and_reduces() {
        let g = PbFormula::new(
            2,
            vec![
                constraint(vec![(2, 1, false)], Comparator::Ge, 2),
                constraint(vec![(1, 1, false), (1, 2, false)], Comparator::Ge, 1),
            ],
        );
        let out = preprocess(&g);
        assert!(!out.unsat);
        assert!(out.reduced.constraints().is_empty());
        assert_eq!(out.forced.get(var(1)), Some(true));
        assert_eq!(out.forced.len(), 1);
    }

    #[test]
    fn preprocess_detects_conflicting_units() {
        let g = PbFormula::new(
            1,
            vec![
                constraint(vec![(1, 1, false)], Comparator::Ge, 1),
                constraint(vec![(-1, 1, false)], Comparator::Ge, 0),
            ],
        );
        assert!(preprocess(&g).unsat);
    }

    #[test]
    fn preprocess_empty_formula_is_fixpoint() {
        let g = PbFormula::new(3, vec![]);
        let out = preprocess(&g);
        assert!(!out.unsat);
        assert_eq!(out.reduced, g);
        assert!(out.forced.is_empty());
    }

    #[test]
    fn preprocess_probing_cascades() {
        // probing x1 forces x2 under both branches, which then satisfies the
        // second constraint
        let g = PbFormula::new(
            3,
            vec![
                constraint(vec![(2, 1, false), (3, 2, false)], Comparator::Ge, 3),
                constraint(vec![(1, 2, false), (1, 3, false)], Comparator::Ge, 1),
            ],
        );
        let out = preprocess(&g);
        assert!(!out.unsat);
        assert_eq!(out.forced.get(var(2)), Some(true));
        // x1 and x3 stay free
        assert!(!out.forced.contains(var(1)));
        assert!(!out.forced.contains(var(3)));
    }
}
