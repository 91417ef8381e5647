//! The counting pipeline: maximum cardinality search over the primal graph,
//! constraint clustering, cluster multiplication with early projection, and
//! the end-to-end count gluing preprocessing, compilation and the
//! free-variable factors together.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::BigRational;
use thiserror::Error;

use crate::add::{AddHandle, AddManager, AddOp, CarrierValue};
use crate::compile::{compile, CompileMode, CompileStats};
use crate::formula::{Assignment, PbFormula, Var};
use crate::preprocess::{preprocess, PreprocessOutcome};
use crate::weights::WeightFunction;

/// A global variable order: a permutation of the declared universe with a
/// rank lookup.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct VariableOrder {
    order: Vec<Var>,
    rank_of: Vec<usize>,
}

impl VariableOrder {
    /// Wraps a permutation. Panics on duplicates.
    pub fn new(order: Vec<Var>) -> Self {
        let max_index = order.iter().map(|v| v.index()).max().unwrap_or(0);
        let mut rank_of = vec![usize::MAX; max_index as usize + 1];
        for (rank, var) in order.iter().enumerate() {
            assert!(
                rank_of[var.index() as usize] == usize::MAX,
                "duplicate {var} in order"
            );
            rank_of[var.index() as usize] = rank;
        }
        VariableOrder { order, rank_of }
    }

    pub fn identity(num_vars: u32) -> Self {
        Self::new((1..=num_vars).map(Var::new).collect())
    }

    pub fn order(&self) -> &[Var] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// 0-based rank of a variable. Panics if the variable is not ordered.
    pub fn rank(&self, var: Var) -> usize {
        let rank = self
            .rank_of
            .get(var.index() as usize)
            .copied()
            .unwrap_or(usize::MAX);
        assert!(rank != usize::MAX, "{var} is not in the order");
        rank
    }
}

/// Maximum cardinality search over the primal graph: variables are adjacent
/// when they co-occur in a constraint. Repeatedly picks the unvisited
/// variable with the most visited neighbors, breaking ties by lowest index,
/// which also makes the lowest-indexed variable the start vertex.
pub fn mcs_variable_order(formula: &PbFormula) -> VariableOrder {
    let n = formula.num_vars() as usize;
    let mut adjacency: Vec<BTreeSet<u32>> = vec![BTreeSet::new(); n + 1];
    for constraint in formula.constraints() {
        let vars: Vec<u32> = constraint.variables().map(Var::index).collect();
        for (i, &a) in vars.iter().enumerate() {
            for &b in &vars[i + 1..] {
                adjacency[a as usize].insert(b);
                adjacency[b as usize].insert(a);
            }
        }
    }
    let mut visited = vec![false; n + 1];
    let mut visited_neighbors = vec![0usize; n + 1];
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        let mut best = 0usize;
        for v in 1..=n {
            if !visited[v] && (best == 0 || visited_neighbors[v] > visited_neighbors[best]) {
                best = v;
            }
        }
        visited[best] = true;
        order.push(Var::new(best as u32));
        for &u in &adjacency[best] {
            if !visited[u as usize] {
                visited_neighbors[u as usize] += 1;
            }
        }
    }
    VariableOrder::new(order)
}

/// How clusters hand their intermediate results on.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ClusterStrategy {
    /// One running product over clusters in order.
    List,
    /// Results forwarded to the earliest later cluster sharing support.
    Tree,
}

/// One cluster: the constraints whose earliest-ranked variable has this
/// rank, plus their combined variable set.
#[derive(Clone, Debug)]
pub struct Cluster {
    pub rank: usize,
    pub constraints: Vec<usize>,
    pub vars: BTreeSet<Var>,
}

/// Ordered grouping of constraints driving the dynamic-programming count.
#[derive(Clone, Debug)]
pub struct ClusterPlan {
    pub strategy: ClusterStrategy,
    pub clusters: Vec<Cluster>,
}

/// Assigns every constraint to the cluster of its earliest-ranked variable
/// (rank 0 for constraints without variables); clusters are ordered by
/// ascending rank and empty ranks are dropped.
pub fn build_clusters(
    formula: &PbFormula,
    order: &VariableOrder,
    strategy: ClusterStrategy,
) -> ClusterPlan {
    let mut by_rank: BTreeMap<usize, Cluster> = BTreeMap::new();
    for (index, constraint) in formula.constraints().iter().enumerate() {
        let rank = constraint
            .variables()
            .map(|v| order.rank(v))
            .min()
            .unwrap_or(0);
        let cluster = by_rank.entry(rank).or_insert_with(|| Cluster {
            rank,
            constraints: Vec::new(),
            vars: BTreeSet::new(),
        });
        cluster.constraints.push(index);
        cluster.vars.extend(constraint.variables());
    }
    ClusterPlan {
        strategy,
        clusters: by_rank.into_values().collect(),
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CountError {
    #[error("constraint ADD {constraint} has a leaf outside {{0, 1}}")]
    NonIndicator { constraint: usize },
}

/// Abstracts `var` out of `psi`: `W(~x) * psi[x -> 0] + W(x) * psi[x -> 1]`.
fn project(
    manager: &mut AddManager,
    psi: AddHandle,
    var: Var,
    weights: &WeightFunction,
) -> AddHandle {
    let lo = manager.restrict(psi, var, false);
    let hi = manager.restrict(psi, var, true);
    let w_neg = manager.constant(weights.weight(var.neg_lit()));
    let w_pos = manager.constant(weights.weight(var.pos_lit()));
    let lo_part = manager.apply(AddOp::Mul, w_neg, lo);
    let hi_part = manager.apply(AddOp::Mul, w_pos, hi);
    manager.apply(AddOp::Add, lo_part, hi_part)
}

/// Variable sets mentioned by clusters strictly after each position.
fn suffix_vars(clusters: &[Cluster]) -> Vec<BTreeSet<Var>> {
    let mut suffix = vec![BTreeSet::new(); clusters.len() + 1];
    for j in (0..clusters.len()).rev() {
        let mut set = suffix[j + 1].clone();
        set.extend(clusters[j].vars.iter().copied());
        suffix[j] = set;
    }
    suffix.remove(0);
    suffix
}

/// Multiplies the constraint ADDs cluster by cluster, projecting every
/// variable out as soon as no later cluster mentions it, then projects the
/// remaining universe variables. Both strategies return the same value; they
/// only differ in where intermediate products are multiplied.
pub fn compute_count(
    manager: &mut AddManager,
    constraint_adds: &[AddHandle],
    plan: &ClusterPlan,
    weights: &WeightFunction,
    universe: &BTreeSet<Var>,
) -> Result<CarrierValue, CountError> {
    for (index, &add) in constraint_adds.iter().enumerate() {
        if !manager.is_indicator(add) {
            return Err(CountError::NonIndicator { constraint: index });
        }
    }
    let mut projected: BTreeSet<Var> = BTreeSet::new();
    let value = match plan.strategy {
        ClusterStrategy::List => list_count(
            manager,
            constraint_adds,
            &plan.clusters,
            weights,
            &mut projected,
        ),
        ClusterStrategy::Tree => tree_count(
            manager,
            constraint_adds,
            &plan.clusters,
            weights,
            &mut projected,
        ),
    };
    let mut value = value;
    for &var in universe {
        if projected.contains(&var) {
            continue;
        }
        value = project(manager, value, var, weights);
    }
    Ok(manager
        .leaf_value(value)
        .expect("all support variables projected")
        .clone())
}

/// Support of `psi` ordered by ascending rank in the manager's order.
fn support_by_rank(
    manager: &mut AddManager,
    psi: AddHandle,
    order_rank: &BTreeMap<Var, usize>,
) -> Vec<Var> {
    let mut support = manager.support(psi);
    support.sort_by_key(|v| order_rank[v]);
    support
}

fn list_count(
    manager: &mut AddManager,
    constraint_adds: &[AddHandle],
    clusters: &[Cluster],
    weights: &WeightFunction,
    projected: &mut BTreeSet<Var>,
) -> AddHandle {
    let order_rank: BTreeMap<Var, usize> = manager
        .variable_order()
        .iter()
        .enumerate()
        .map(|(rank, &v)| (v, rank))
        .collect();
    let later = suffix_vars(clusters);
    let mut acc = manager.one();
    for (j, cluster) in clusters.iter().enumerate() {
        let mut cluster_add = manager.one();
        for &ci in &cluster.constraints {
            cluster_add = manager.apply(AddOp::Mul, cluster_add, constraint_adds[ci]);
        }
        acc = manager.apply(AddOp::Mul, acc, cluster_add);
        for var in support_by_rank(manager, acc, &order_rank) {
            if later[j].contains(&var) {
                continue;
            }
            acc = project(manager, acc, var, weights);
            projected.insert(var);
        }
    }
    acc
}

fn tree_count(
    manager: &mut AddManager,
    constraint_adds: &[AddHandle],
    clusters: &[Cluster],
    weights: &WeightFunction,
    projected: &mut BTreeSet<Var>,
) -> AddHandle {
    let order_rank: BTreeMap<Var, usize> = manager
        .variable_order()
        .iter()
        .enumerate()
        .map(|(rank, &v)| (v, rank))
        .collect();
    let later = suffix_vars(clusters);
    // results forwarded to each cluster, with their supports
    let mut pending: Vec<Vec<(AddHandle, BTreeSet<Var>)>> = vec![Vec::new(); clusters.len()];
    let mut root = manager.one();
    for j in 0..clusters.len() {
        let mut merged = manager.one();
        for &ci in &clusters[j].constraints {
            merged = manager.apply(AddOp::Mul, merged, constraint_adds[ci]);
        }
        for (forwarded, _) in std::mem::take(&mut pending[j]) {
            merged = manager.apply(AddOp::Mul, merged, forwarded);
        }
        // a variable may be projected only once nothing unprocessed mentions
        // it: later clusters' constraints or results still waiting there
        let mut blocked = later[j].clone();
        for queue in pending.iter().skip(j + 1) {
            for (_, support) in queue {
                blocked.extend(support.iter().copied());
            }
        }
        for var in support_by_rank(manager, merged, &order_rank) {
            if blocked.contains(&var) {
                continue;
            }
            merged = project(manager, merged, var, weights);
            projected.insert(var);
        }
        let support: BTreeSet<Var> = manager.support(merged).into_iter().collect();
        if support.is_empty() {
            root = manager.apply(AddOp::Mul, root, merged);
            continue;
        }
        let parent = (j + 1..clusters.len())
            .find(|&p| {
                !clusters[p].vars.is_disjoint(&support)
                    || pending[p].iter().any(|(_, s)| !s.is_disjoint(&support))
            })
            .expect("unprojected support is mentioned by a later cluster");
        pending[parent].push((merged, support));
    }
    root
}

/// Configuration for [`count_formula`].
#[derive(Clone, Copy, Debug)]
pub struct CountConfig {
    pub mode: CompileMode,
    pub strategy: ClusterStrategy,
    pub preprocess: bool,
    /// Soft cap on ADD operation caches; 0 = unbounded.
    pub cache_limit: usize,
}

impl Default for CountConfig {
    fn default() -> Self {
        CountConfig {
            mode: CompileMode::Dynamic,
            strategy: ClusterStrategy::List,
            preprocess: true,
            cache_limit: 0,
        }
    }
}

/// Run statistics of one end-to-end count.
#[derive(Clone, Debug, Default)]
pub struct CountStats {
    pub preprocess_forced: usize,
    pub preprocess_unsat: bool,
    /// Per-constraint compile instrumentation, in constraint order of the
    /// reduced formula.
    pub compile: Vec<CompileStats>,
    pub apply_calls: u64,
    pub peak_nodes: usize,
}

/// An exact count plus run statistics. The count is integer-valued whenever
/// the weight function is all ones.
#[derive(Clone, Debug)]
pub struct CountResult {
    pub count: CarrierValue,
    pub stats: CountStats,
}

/// End-to-end weighted model count over the declared universe: normalize,
/// optionally preprocess, order variables by MCS over the reduced formula,
/// compile every constraint, run the cluster count, and fold the forced
/// literals' weights back in.
pub fn count_formula(
    formula: &PbFormula,
    weights: &WeightFunction,
    config: &CountConfig,
) -> CountResult {
    let normalized = formula.normalize();
    let PreprocessOutcome {
        reduced,
        forced,
        unsat,
    } = if config.preprocess {
        preprocess(&normalized)
    } else {
        PreprocessOutcome {
            reduced: normalized,
            forced: Assignment::new(),
            unsat: false,
        }
    };
    if unsat {
        return CountResult {
            count: BigRational::from_integer(0.into()),
            stats: CountStats {
                preprocess_forced: forced.len(),
                preprocess_unsat: true,
                ..CountStats::default()
            },
        };
    }

    let order = mcs_variable_order(&reduced);
    let mut manager = AddManager::with_order(order.order().to_vec());
    manager.set_cache_limit(config.cache_limit);

    let mut constraint_adds = Vec::with_capacity(reduced.constraints().len());
    let mut compile_stats = Vec::with_capacity(reduced.constraints().len());
    for constraint in reduced.constraints() {
        let compiled = compile(&mut manager, constraint, config.mode);
        constraint_adds.push(compiled.add);
        compile_stats.push(compiled.stats);
    }

    let plan = build_clusters(&reduced, &order, config.strategy);
    let universe: BTreeSet<Var> = (1..=reduced.num_vars())
        .map(Var::new)
        .filter(|v| !forced.contains(*v))
        .collect();
    let value = compute_count(&mut manager, &constraint_adds, &plan, weights, &universe)
        .expect("compiled constraints are indicators");
    let forced_factor = weights.assignment_weight(forced.literals());

    CountResult {
        count: value * forced_factor,
        stats: CountStats {
            preprocess_forced: forced.len(),
            preprocess_unsat: false,
            compile: compile_stats,
            apply_calls: manager.apply_calls(),
            peak_nodes: manager.total_nodes(),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compile::compile_bottom_up;
    use crate::formula::{Comparator, PbConstraint, Term};
    use num_bigint::BigInt;
    use num_traits::One;

    fn var(i: u32) -> Var {
        Var::new(i)
    }

    fn ge(terms: Vec<(i64, u32)>, rhs: i64) -> PbConstraint {
        PbConstraint::new(
            terms
                .into_iter()
                .map(|(c, v)| Term::new(c, var(v).pos_lit()))
                .collect(),
            Comparator::Ge,
            rhs,
        )
    }

    fn rat(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    fn int_count(result: &CountResult) -> BigInt {
        assert!(result.count.is_integer());
        result.count.to_integer()
    }

    #[test]
    fn mcs_chain() {
        let g = PbFormula::new(
            3,
            vec![ge(vec![(1, 1), (1, 2)], 1), ge(vec![(1, 2), (1, 3)], 1)],
        );
        let order = mcs_variable_order(&g);
        assert_eq!(order.order(), &[var(1), var(2), var(3)]);
    }

    #[test]
    fn mcs_without_constraints_is_index_order() {
        let g = PbFormula::new(3, vec![]);
        assert_eq!(mcs_variable_order(&g).order(), &[var(1), var(2), var(3)]);
    }

    #[test]
    fn mcs_isolated_start_then_ties() {
        // single constraint over {x2, x5}: x1 is the isolated start vertex,
        // x2 wins the tie, x5 follows via its visited neighbor
        let g = PbFormula::new(5, vec![ge(vec![(1, 2), (1, 5)], 1)]);
        let order = mcs_variable_order(&g);
        assert_eq!(order.order(), &[var(1), var(2), var(5), var(3), var(4)]);
    }

    #[test]
    fn clusters_by_earliest_rank() {
        let g = PbFormula::new(
            3,
            vec![ge(vec![(1, 1), (1, 2)], 1), ge(vec![(1, 2), (1, 3)], 1)],
        );
        let order = mcs_variable_order(&g);
        let plan = build_clusters(&g, &order, ClusterStrategy::List);
        assert_eq!(plan.clusters.len(), 2);
        assert_eq!(plan.clusters[0].constraints, vec![0]);
        assert_eq!(plan.clusters[1].constraints, vec![1]);
    }

    #[test]
    fn shared_first_variable_single_cluster() {
        let g = PbFormula::new(2, vec![ge(vec![(1, 1)], 1), ge(vec![(1, 1), (1, 2)], 1)]);
        let order = mcs_variable_order(&g);
        let plan = build_clusters(&g, &order, ClusterStrategy::List);
        assert_eq!(plan.clusters.len(), 1);
        assert_eq!(plan.clusters[0].constraints, vec![0, 1]);
    }

    #[test]
    fn empty_constraint_goes_to_first_cluster() {
        let g = PbFormula::new(
            2,
            vec![
                ge(vec![(1, 2)], 1),
                PbConstraint::new(vec![], Comparator::Ge, 0),
            ],
        );
        let order = mcs_variable_order(&g);
        let plan = build_clusters(&g, &order, ClusterStrategy::List);
        assert_eq!(plan.clusters[0].rank, 0);
        assert!(plan.clusters[0].constraints.contains(&1));
    }

    #[test]
    fn compute_count_figure_constraint() {
        let g = PbFormula::new(2, vec![ge(vec![(3, 1), (4, 2)], 3)]);
        let order = mcs_variable_order(&g);
        let mut m = AddManager::with_order(order.order().to_vec());
        let compiled = compile_bottom_up(&mut m, &g.constraints()[0]);
        let plan = build_clusters(&g, &order, ClusterStrategy::List);
        let universe: BTreeSet<Var> = [var(1), var(2)].into_iter().collect();
        let count = compute_count(
            &mut m,
            &[compiled.add],
            &plan,
            &WeightFunction::ones(),
            &universe,
        )
        .unwrap();
        assert_eq!(count, rat(3));
    }

    #[test]
    fn compute_count_free_universe() {
        let g = PbFormula::new(3, vec![]);
        let order = mcs_variable_order(&g);
        let mut m = AddManager::with_order(order.order().to_vec());
        let plan = build_clusters(&g, &order, ClusterStrategy::List);
        let universe: BTreeSet<Var> = (1..=3).map(var).collect();
        let count = compute_count(&mut m, &[], &plan, &WeightFunction::ones(), &universe).unwrap();
        assert_eq!(count, rat(8));
    }

    #[test]
    fn compute_count_weighted() {
        let g = PbFormula::new(2, vec![ge(vec![(1, 1)], 1)]);
        let order = mcs_variable_order(&g);
        let mut m = AddManager::with_order(order.order().to_vec());
        let compiled = compile_bottom_up(&mut m, &g.constraints()[0]);
        let plan = build_clusters(&g, &order, ClusterStrategy::List);
        let universe: BTreeSet<Var> = [var(1), var(2)].into_iter().collect();
        let mut weights = WeightFunction::ones();
        weights.set(var(1).pos_lit(), BigRational::new(3.into(), 10.into()));
        weights.set(var(1).neg_lit(), BigRational::new(7.into(), 10.into()));
        let count = compute_count(&mut m, &[compiled.add], &plan, &weights, &universe).unwrap();
        assert_eq!(count, BigRational::new(3.into(), 5.into()));
    }

    #[test]
    fn compute_count_rejects_non_indicator() {
        let g = PbFormula::new(1, vec![]);
        let order = mcs_variable_order(&g);
        let mut m = AddManager::with_order(order.order().to_vec());
        let five = m.constant(rat(5));
        let plan = build_clusters(&g, &order, ClusterStrategy::List);
        let err = compute_count(
            &mut m,
            &[five],
            &plan,
            &WeightFunction::ones(),
            &BTreeSet::new(),
        )
        .unwrap_err();
        assert_eq!(err, CountError::NonIndicator { constraint: 0 });
    }

    #[test]
    fn count_formula_figure_three() {
        let g = PbFormula::new(2, vec![ge(vec![(3, 1), (4, 2)], 3)]);
        for mode in [
            CompileMode::BottomUp,
            CompileMode::TopDown,
            CompileMode::Dynamic,
        ] {
            for strategy in [ClusterStrategy::List, ClusterStrategy::Tree] {
                for preprocess in [true, false] {
                    let config = CountConfig {
                        mode,
                        strategy,
                        preprocess,
                        cache_limit: 0,
                    };
                    let result = count_formula(&g, &WeightFunction::ones(), &config);
                    assert_eq!(int_count(&result), BigInt::from(3), "{mode:?} {strategy:?}");
                }
            }
        }
    }

    #[test]
    fn count_formula_with_forced_variable() {
        let g = PbFormula::new(2, vec![ge(vec![(2, 1)], 2), ge(vec![(1, 1), (1, 2)], 1)]);
        let result = count_formula(&g, &WeightFunction::ones(), &CountConfig::default());
        assert_eq!(int_count(&result), BigInt::from(2));
        assert_eq!(result.stats.preprocess_forced, 1);
    }

    #[test]
    fn count_formula_unsat() {
        let g = PbFormula::new(1, vec![ge(vec![(1, 1)], 1), ge(vec![(-1, 1)], 0)]);
        let result = count_formula(&g, &WeightFunction::ones(), &CountConfig::default());
        assert_eq!(int_count(&result), BigInt::from(0));
        assert!(result.stats.preprocess_unsat);
        // without preprocessing the zero comes out of the diagrams
        let config = CountConfig {
            preprocess: false,
            ..CountConfig::default()
        };
        let result = count_formula(&g, &WeightFunction::ones(), &config);
        assert_eq!(int_count(&result), BigInt::from(0));
    }

    #[test]
    fn weighted_all_ones_matches_unweighted() {
        let g = PbFormula::new(3, vec![ge(vec![(1, 1), (-2, 2), (2, 3)], 0)]);
        let unweighted = count_formula(&g, &WeightFunction::ones(), &CountConfig::default());
        assert!(unweighted.count.is_integer());
        let mut trivial = WeightFunction::ones();
        trivial.set(var(2).pos_lit(), BigRational::one());
        let weighted = count_formula(&g, &trivial, &CountConfig::default());
        assert_eq!(unweighted.count, weighted.count);
    }
}
