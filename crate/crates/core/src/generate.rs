//! Seeded benchmark generators: multi-dimension knapsack, combinatorial
//! auction counting instances, and the fixed 30-variable case-study
//! constraint with power coefficients.
//!
//! Generators are pure functions of their [`GenSpec`]; the same spec always
//! yields the same formula.

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::formula::{Comparator, PbConstraint, PbFormula, Term, Var};

/// Benchmark family to generate.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum BenchFamily {
    Knapsack,
    Auction,
    CaseStudy,
}

/// Deterministic description of one generated instance.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct GenSpec {
    pub family: BenchFamily,
    /// Item count; doubles as the threshold k for the case-study family,
    /// whose formula always has 30 variables.
    pub num_vars: u32,
    /// Dimension count (knapsack) or participant count (auction).
    pub num_constraints: u32,
    pub seed: u64,
    /// Inclusive coefficient bounds. Knapsack clamps the lower bound to 1;
    /// auction skips 0.
    pub coeff_lo: i64,
    pub coeff_hi: i64,
}

impl GenSpec {
    pub fn knapsack(num_vars: u32, num_constraints: u32, seed: u64) -> Self {
        GenSpec {
            family: BenchFamily::Knapsack,
            num_vars,
            num_constraints,
            seed,
            coeff_lo: 1,
            coeff_hi: 20,
        }
    }

    pub fn auction(num_vars: u32, num_constraints: u32, seed: u64) -> Self {
        GenSpec {
            family: BenchFamily::Auction,
            num_vars,
            num_constraints,
            seed,
            coeff_lo: -10,
            coeff_hi: 10,
        }
    }
}

/// Dispatches on the spec's family.
pub fn generate(spec: &GenSpec) -> PbFormula {
    match spec.family {
        BenchFamily::Knapsack => gen_knapsack(spec),
        BenchFamily::Auction => gen_auction(spec),
        BenchFamily::CaseStudy => case_study_formula(spec.num_vars as i64),
    }
}

/// `num_constraints` dimensions over `num_vars` items: each dimension
/// constrains `sum w_i x_i <= b` with positive uniform weights and a budget
/// between the smallest weight and half the weight sum, keeping instances
/// nontrivial.
pub fn gen_knapsack(spec: &GenSpec) -> PbFormula {
    assert_eq!(spec.family, BenchFamily::Knapsack);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let lo = spec.coeff_lo.max(1);
    let hi = spec.coeff_hi.max(lo);
    let mut constraints = Vec::with_capacity(spec.num_constraints as usize);
    for _ in 0..spec.num_constraints {
        let weights: Vec<i64> = (0..spec.num_vars).map(|_| rng.gen_range(lo..=hi)).collect();
        let min_weight = weights.iter().copied().min().unwrap_or(1);
        let half_sum = weights.iter().sum::<i64>() / 2;
        let budget = rng.gen_range(min_weight..=half_sum.max(min_weight));
        let terms = weights
            .iter()
            .enumerate()
            .map(|(i, &w)| Term::new(w, Var::new(i as u32 + 1).pos_lit()))
            .collect();
        constraints.push(PbConstraint::new(terms, Comparator::Le, budget));
    }
    PbFormula::new(spec.num_vars, constraints)
}

/// `num_constraints` participants over `num_vars` items: each participant
/// requires `sum u_i x_i >= t` with signed nonzero utilities and a threshold
/// drawn from the achievable interval.
pub fn gen_auction(spec: &GenSpec) -> PbFormula {
    assert_eq!(spec.family, BenchFamily::Auction);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut constraints = Vec::with_capacity(spec.num_constraints as usize);
    for _ in 0..spec.num_constraints {
        let utilities: Vec<i64> = (0..spec.num_vars)
            .map(|_| loop {
                let u = rng.gen_range(spec.coeff_lo..=spec.coeff_hi);
                if u != 0 {
                    break u;
                }
            })
            .collect();
        let lowest: i64 = utilities.iter().filter(|&&u| u < 0).sum();
        let highest: i64 = utilities.iter().filter(|&&u| u > 0).sum();
        let threshold = rng.gen_range(lowest..=highest);
        let terms = utilities
            .iter()
            .enumerate()
            .map(|(i, &u)| Term::new(u, Var::new(i as u32 + 1).pos_lit()))
            .collect();
        constraints.push(PbConstraint::new(terms, Comparator::Ge, threshold));
    }
    PbFormula::new(spec.num_vars, constraints)
}

/// The 30-variable case-study constraint
/// `sum 2^i x_{i+1} + sum 3^i x_{i+13} + sum 7^i x_{i+23} >= k`
/// with `i` ranging over `0..=12`, `1..=10` and `1..=7` respectively.
pub fn case_study_formula(k: i64) -> PbFormula {
    let mut terms = Vec::with_capacity(30);
    for i in 0..=12u32 {
        terms.push(Term::new(BigInt::from(2).pow(i), Var::new(i + 1).pos_lit()));
    }
    for i in 1..=10u32 {
        terms.push(Term::new(
            BigInt::from(3).pow(i),
            Var::new(i + 13).pos_lit(),
        ));
    }
    for i in 1..=7u32 {
        terms.push(Term::new(
            BigInt::from(7).pow(i),
            Var::new(i + 23).pos_lit(),
        ));
    }
    PbFormula::new(30, vec![PbConstraint::new(terms, Comparator::Ge, k)])
}

/// The case-study constraint with every coefficient set to 1:
/// `sum_{i=1}^{30} x_i >= k`.
pub fn case_study_all_ones(k: i64) -> PbFormula {
    let terms = (1..=30u32)
        .map(|i| Term::new(1, Var::new(i).pos_lit()))
        .collect();
    PbFormula::new(30, vec![PbConstraint::new(terms, Comparator::Ge, k)])
}
