//! Independent counting oracles for verification: exhaustive enumeration
//! over the full assignment space and a meet-in-the-middle counter for
//! single-constraint formulas. Neither touches the decision-diagram
//! pipeline.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use thiserror::Error;

use crate::formula::{Comparator, PbConstraint, PbFormula, Var};
use crate::weights::WeightFunction;

/// Enumeration guard for [`brute_force_count`].
pub const BRUTE_FORCE_VAR_LIMIT: u32 = 26;
/// Enumeration guard for [`mitm_count_single_constraint`].
pub const MITM_VAR_LIMIT: u32 = 40;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("universe of {num_vars} variables exceeds the oracle guard of {limit}")]
    UniverseTooLarge { num_vars: u32, limit: u32 },
    #[error("meet-in-the-middle needs exactly one constraint, got {constraints}")]
    NotSingleConstraint { constraints: usize },
}

/// Sums the weight of every satisfying assignment by walking all
/// `2^num_vars` assignments in Gray-code order, maintaining each
/// constraint's left-hand side incrementally.
pub fn brute_force_count(
    formula: &PbFormula,
    weights: &WeightFunction,
) -> Result<BigRational, OracleError> {
    let n = formula.num_vars();
    if n > BRUTE_FORCE_VAR_LIMIT {
        return Err(OracleError::UniverseTooLarge {
            num_vars: n,
            limit: BRUTE_FORCE_VAR_LIMIT,
        });
    }
    let constraints = formula.constraints();

    // per-variable occurrence lists: (constraint, coefficient, negated)
    let mut occurrences: Vec<Vec<(usize, BigInt, bool)>> = vec![Vec::new(); n as usize + 1];
    for (ci, constraint) in constraints.iter().enumerate() {
        for term in constraint.terms() {
            occurrences[term.literal.var().index() as usize].push((
                ci,
                term.coeff.clone(),
                term.literal.is_negated(),
            ));
        }
    }

    // all-false start: negated literals are true
    let mut lhs: Vec<BigInt> = constraints
        .iter()
        .map(|c| {
            c.terms()
                .iter()
                .filter(|t| t.literal.is_negated())
                .map(|t| &t.coeff)
                .sum()
        })
        .collect();
    let satisfied = |constraint: &PbConstraint, lhs: &BigInt| match constraint.comparator() {
        Comparator::Ge => lhs >= constraint.rhs(),
        Comparator::Eq => lhs == constraint.rhs(),
        Comparator::Le => lhs <= constraint.rhs(),
    };
    let mut sat_flags: Vec<bool> = constraints
        .iter()
        .zip(&lhs)
        .map(|(c, lhs)| satisfied(c, lhs))
        .collect();
    let mut violated = sat_flags.iter().filter(|&&f| !f).count();

    let unweighted = weights.is_all_ones();
    let mut values = vec![false; n as usize + 1];
    let mut model_count: u64 = 0;
    let mut weighted_total = BigRational::zero();

    let mut tally = |values: &[bool], violated: usize| {
        if violated != 0 {
            return;
        }
        if unweighted {
            model_count += 1;
        } else {
            let assignment_literals = (1..=n).map(|i| {
                let var = Var::new(i);
                if values[i as usize] {
                    var.pos_lit()
                } else {
                    var.neg_lit()
                }
            });
            weighted_total += weights.assignment_weight(assignment_literals);
        }
    };

    tally(&values, violated);
    for step in 1u64..(1u64 << n) {
        let var = step.trailing_zeros() as usize + 1;
        values[var] = !values[var];
        for (ci, coeff, negated) in &occurrences[var] {
            let literal_now_true = values[var] != *negated;
            if literal_now_true {
                lhs[*ci] += coeff;
            } else {
                lhs[*ci] -= coeff;
            }
            let now = satisfied(&constraints[*ci], &lhs[*ci]);
            if now != sat_flags[*ci] {
                sat_flags[*ci] = now;
                if now {
                    violated -= 1;
                } else {
                    violated += 1;
                }
            }
        }
        tally(&values, violated);
    }

    Ok(if unweighted {
        BigRational::from_integer(model_count.into())
    } else {
        weighted_total
    })
}

/// Unweighted model count of a formula consisting of a single constraint
/// over `num_vars` variables: split the terms in half, enumerate both sum
/// tables, sort one side, and count matching pairs. Variables outside the
/// constraint contribute a free factor of two each.
pub fn mitm_count_single_constraint(
    constraint: &PbConstraint,
    num_vars: u32,
) -> Result<BigInt, OracleError> {
    if num_vars > MITM_VAR_LIMIT {
        return Err(OracleError::UniverseTooLarge {
            num_vars,
            limit: MITM_VAR_LIMIT,
        });
    }
    let terms = constraint.terms();
    let (left, right) = terms.split_at(terms.len() / 2);

    fn sums(terms: &[crate::formula::Term]) -> Vec<BigInt> {
        let mut acc = vec![BigInt::zero()];
        for term in terms {
            let mut next = Vec::with_capacity(acc.len() * 2);
            for sum in &acc {
                next.push(sum.clone());
                next.push(sum + &term.coeff);
            }
            acc = next;
        }
        acc
    }

    let left_sums = sums(left);
    let mut right_sums = sums(right);
    right_sums.sort();

    let mut pairs = BigInt::zero();
    for ls in &left_sums {
        let target = constraint.rhs() - ls;
        let below = right_sums.partition_point(|rs| rs < &target);
        let at_or_below = right_sums.partition_point(|rs| rs <= &target);
        let matching = match constraint.comparator() {
            Comparator::Ge => right_sums.len() - below,
            Comparator::Le => at_or_below,
            Comparator::Eq => at_or_below - below,
        };
        pairs += matching;
    }

    let free = num_vars - terms.len() as u32;
    Ok(pairs << free)
}

/// [`mitm_count_single_constraint`] lifted to a formula, rejecting formulas
/// that are not a single constraint.
pub fn mitm_count_formula(formula: &PbFormula) -> Result<BigInt, OracleError> {
    match formula.constraints() {
        [constraint] => mitm_count_single_constraint(constraint, formula.num_vars()),
        other => Err(OracleError::NotSingleConstraint {
            constraints: other.len(),
        }),
    }
}
