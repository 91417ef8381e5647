//! Property tests across the library: semantic preservation of the
//! constraint rewrites, parse/render round trips, compile-route agreement
//! against enumeration, and projection-order independence.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use proptest::prelude::*;

use pbadd::add::{AddManager, AddOp};
use pbadd::compile::{
    compile_bottom_up, compile_dynamic, optimize_compile_bottom_up, optimize_compile_top_down,
};
use pbadd::count::{count_formula, CountConfig};
use pbadd::formula::{Assignment, Comparator, PbConstraint, PbFormula, Term, Var};
use pbadd::opb::{parse_opb, render_opb};
use pbadd::oracle::brute_force_count;
use pbadd::weights::WeightFunction;
use pbadd::CompileMode;

const MAX_VARS: u32 = 6;

fn comparator() -> impl Strategy<Value = Comparator> {
    prop_oneof![
        Just(Comparator::Ge),
        Just(Comparator::Eq),
        Just(Comparator::Le)
    ]
}

/// Raw term triples (variable, coefficient, negated); duplicates allowed.
fn raw_terms() -> impl Strategy<Value = Vec<(u32, i64, bool)>> {
    prop::collection::vec(
        (
            1..=MAX_VARS,
            (-10i64..=10).prop_filter("nonzero", |c| *c != 0),
            any::<bool>(),
        ),
        0..=8,
    )
}

fn constraint() -> impl Strategy<Value = PbConstraint> {
    (raw_terms(), comparator(), -25i64..=25).prop_map(|(terms, cmp, rhs)| {
        PbConstraint::new(
            terms
                .into_iter()
                .map(|(v, c, neg)| {
                    let var = Var::new(v);
                    Term::new(c, if neg { var.neg_lit() } else { var.pos_lit() })
                })
                .collect(),
            cmp,
            rhs,
        )
    })
}

fn formula() -> impl Strategy<Value = PbFormula> {
    prop::collection::vec(constraint(), 0..=4).prop_map(|cs| PbFormula::new(MAX_VARS, cs))
}

fn all_assignments(num_vars: u32) -> impl Iterator<Item = Assignment> {
    (0u64..(1 << num_vars)).map(move |bits| {
        (1..=num_vars)
            .map(|i| (Var::new(i), bits >> (i - 1) & 1 == 1))
            .collect()
    })
}

/// Evaluates a raw term list with duplicates, without any merging.
fn raw_lhs(terms: &[(u32, i64, bool)], assignment: &Assignment) -> i64 {
    terms
        .iter()
        .map(|&(v, c, neg)| {
            let value = assignment.get(Var::new(v)).unwrap();
            if value != neg {
                c
            } else {
                0
            }
        })
        .sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn normalize_preserves_satisfying_set(c in constraint()) {
        let normalized = c.normalize();
        prop_assert!(normalized.comparator() != Comparator::Le);
        for a in all_assignments(MAX_VARS) {
            prop_assert_eq!(c.evaluate(&a), normalized.evaluate(&a));
        }
    }

    #[test]
    fn flip_term_sign_preserves_satisfying_set(c in constraint(), index in 0usize..8) {
        prop_assume!(!c.terms().is_empty());
        let index = index % c.terms().len();
        let flipped = c.flip_term_sign(index);
        for a in all_assignments(MAX_VARS) {
            prop_assert_eq!(c.evaluate(&a), flipped.evaluate(&a));
        }
        prop_assert_eq!(&flipped.flip_term_sign(index), &c);
    }

    #[test]
    fn merging_duplicates_preserves_satisfying_set(
        raw in raw_terms(),
        cmp in comparator(),
        rhs in -25i64..=25,
    ) {
        let merged = PbConstraint::new(
            raw.iter()
                .map(|&(v, c, neg)| {
                    let var = Var::new(v);
                    Term::new(c, if neg { var.neg_lit() } else { var.pos_lit() })
                })
                .collect(),
            cmp,
            rhs,
        );
        for a in all_assignments(MAX_VARS) {
            let lhs = raw_lhs(&raw, &a);
            let direct = match cmp {
                Comparator::Ge => lhs >= rhs,
                Comparator::Eq => lhs == rhs,
                Comparator::Le => lhs <= rhs,
            };
            prop_assert_eq!(direct, merged.evaluate(&a));
        }
    }

    #[test]
    fn parse_render_identity_on_positive_literal_formulas(
        raw in prop::collection::vec((raw_terms(), comparator(), -25i64..=25), 0..=4),
    ) {
        let constraints = raw
            .into_iter()
            .map(|(mut terms, cmp, rhs)| {
                // canonical rendering order is ascending variable index
                terms.sort_by_key(|&(v, _, _)| v);
                PbConstraint::new(
                    terms
                        .into_iter()
                        .map(|(v, c, _)| Term::new(c, Var::new(v).pos_lit()))
                        .collect(),
                    cmp,
                    rhs,
                )
            })
            .collect();
        let g = PbFormula::new(MAX_VARS, constraints);
        prop_assert_eq!(&parse_opb(&render_opb(&g)).unwrap(), &g);
    }

    #[test]
    fn parse_render_round_trip(g in formula()) {
        // rendering folds negated literals; one round settles the form
        let rendered = render_opb(&g);
        let parsed = parse_opb(&rendered).unwrap();
        prop_assert_eq!(render_opb(&parsed), rendered.clone());
        prop_assert_eq!(&parse_opb(&rendered).unwrap(), &parsed);
        // and the folded form still counts the same models
        let ones = WeightFunction::ones();
        prop_assert_eq!(
            brute_force_count(&g, &ones).unwrap(),
            brute_force_count(&parsed, &ones).unwrap()
        );
    }

    #[test]
    fn restrict_commutes_with_evaluation(g in formula(), split in 0u64..64) {
        for a in all_assignments(MAX_VARS) {
            let partial: Assignment = a.iter().filter(|(v, _)| split >> (v.index() - 1) & 1 == 1).collect();
            let restricted = g.restrict(&partial);
            prop_assert_eq!(g.evaluate(&a), restricted.evaluate(&a));
        }
    }

    #[test]
    fn compile_routes_agree_with_enumeration(c in constraint()) {
        let normalized = c.normalize();
        let mut m = AddManager::new(MAX_VARS);
        let bottom_up = compile_bottom_up(&mut m, &normalized).add;
        let optimized_bu = optimize_compile_bottom_up(&mut m, &normalized).add;
        let optimized_td = optimize_compile_top_down(&mut m, &normalized).add;
        let dynamic = compile_dynamic(&mut m, &normalized).add;
        prop_assert_eq!(bottom_up, optimized_bu);
        prop_assert_eq!(bottom_up, optimized_td);
        prop_assert_eq!(bottom_up, dynamic);
        prop_assert!(m.is_indicator(bottom_up));
        prop_assert!(m.is_reduced(bottom_up));
        for a in all_assignments(MAX_VARS) {
            let expected = c.evaluate(&a);
            prop_assert_eq!(m.evaluate(bottom_up, &a).is_one(), expected);
        }
    }

    #[test]
    fn pipeline_matches_brute_force(g in formula()) {
        let ones = WeightFunction::ones();
        let expected = brute_force_count(&g, &ones).unwrap();
        for preprocess in [true, false] {
            let config = CountConfig { preprocess, ..CountConfig::default() };
            let result = count_formula(&g, &ones, &config);
            prop_assert_eq!(&result.count, &expected);
        }
    }

    #[test]
    fn apply_commutes_and_restrict_distributes(
        c1 in constraint(),
        c2 in constraint(),
        var_index in 1..=MAX_VARS,
        value in any::<bool>(),
    ) {
        let mut m = AddManager::new(MAX_VARS);
        let a = compile_bottom_up(&mut m, &c1.normalize()).add;
        let b = compile_bottom_up(&mut m, &c2.normalize()).add;
        let ab = m.apply(AddOp::Add, a, b);
        let ba = m.apply(AddOp::Add, b, a);
        prop_assert_eq!(ab, ba);
        let var = Var::new(var_index);
        // restrict(apply(op, a, b)) == apply(op, restrict(a), restrict(b))
        for op in [AddOp::Add, AddOp::Mul] {
            let combined = m.apply(op, a, b);
            let lhs = m.restrict(combined, var, value);
            let ra = m.restrict(a, var, value);
            let rb = m.restrict(b, var, value);
            let rhs = m.apply(op, ra, rb);
            prop_assert_eq!(lhs, rhs);
        }
    }

    /// Multiplying all constraint ADDs first and then projecting the
    /// universe in any variable order yields the same count.
    #[test]
    fn projection_order_is_irrelevant(g in formula(), seed in 0u64..1000) {
        let ones = WeightFunction::ones();
        let mut m = AddManager::new(MAX_VARS);
        let mut product = m.one();
        for c in g.constraints() {
            let indicator = compile_bottom_up(&mut m, &c.normalize()).add;
            product = m.apply(AddOp::Mul, product, indicator);
        }
        let mut order: Vec<u32> = (1..=MAX_VARS).collect();
        // Fisher-Yates driven by a tiny LCG
        let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
        for i in (1..order.len()).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            order.swap(i, (state >> 33) as usize % (i + 1));
        }
        let mut projected = product;
        for &v in &order {
            let var = Var::new(v);
            let lo = m.restrict(projected, var, false);
            let hi = m.restrict(projected, var, true);
            projected = m.apply(AddOp::Add, lo, hi);
        }
        let value = m.leaf_value(projected).unwrap().clone();
        prop_assert_eq!(value, brute_force_count(&g, &ones).unwrap());
    }
}

/// Two syntactically different constructions of the same function share a
/// handle: a sum built left-to-right versus right-to-left.
#[test]
fn canonicity_of_reassociated_sums() {
    let mut m = AddManager::new(5);
    let terms: Vec<_> = (1..=5u32)
        .map(|i| {
            let c = m.constant(BigRational::from_integer(BigInt::from(i)));
            let l = m.literal(Var::new(i).pos_lit());
            m.apply(AddOp::Mul, c, l)
        })
        .collect();
    let mut forward = m.zero();
    for &t in &terms {
        forward = m.apply(AddOp::Add, forward, t);
    }
    let mut backward = m.zero();
    for &t in terms.iter().rev() {
        backward = m.apply(AddOp::Add, backward, t);
    }
    assert_eq!(forward, backward);
}

/// The counting universe excludes forced variables but keeps free ones.
#[test]
fn free_variables_double_the_count() {
    let c = PbConstraint::new(vec![Term::new(1, Var::new(1).pos_lit())], Comparator::Ge, 1);
    for extra in 0..4u32 {
        let g = PbFormula::new(1 + extra, vec![c.clone()]);
        let result = count_formula(&g, &WeightFunction::ones(), &CountConfig::default());
        assert_eq!(result.count.to_integer(), BigInt::from(1u64 << extra));
    }
}

/// Cluster strategies agree on a formula with several overlapping
/// constraints, including one that a single shared variable chains through.
#[test]
fn strategies_agree_on_chained_constraints() {
    let chain: Vec<PbConstraint> = (1..MAX_VARS)
        .map(|i| {
            PbConstraint::new(
                vec![
                    Term::new(1, Var::new(i).pos_lit()),
                    Term::new(1, Var::new(i + 1).pos_lit()),
                ],
                Comparator::Ge,
                1,
            )
        })
        .collect();
    let g = PbFormula::new(MAX_VARS, chain);
    let ones = WeightFunction::ones();
    let mut counts = BTreeSet::new();
    for strategy in [pbadd::ClusterStrategy::List, pbadd::ClusterStrategy::Tree] {
        for mode in [
            CompileMode::BottomUp,
            CompileMode::TopDown,
            CompileMode::Dynamic,
        ] {
            let config = CountConfig {
                strategy,
                mode,
                ..CountConfig::default()
            };
            counts.insert(count_formula(&g, &ones, &config).count);
        }
    }
    assert_eq!(counts.len(), 1);
    assert_eq!(
        counts.first().unwrap(),
        &brute_force_count(&g, &ones).unwrap()
    );
}
