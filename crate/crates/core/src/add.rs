//! Reduced, ordered, hash-consed algebraic decision diagrams.
//!
//! An [`AddManager`] owns all nodes of its diagrams. Nodes are interned in a
//! unique table, so structural equality of handles coincides with functional
//! equality of the represented functions. Leaf values are exact rationals;
//! unweighted counting paths stay integral by construction.
//!
//! The manager follows one global variable order fixed at construction.
//! Every internal node's children are on strictly later-ordered variables or
//! are leaves, and no internal node has equal children.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::atomic::{AtomicU32, Ordering};

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::formula::{Literal, Var};

/// Values stored in ADD leaves: exact rationals (integers are rationals
/// with denominator 1).
pub type CarrierValue = BigRational;

/// Binary operators supported by [`AddManager::apply`]. Both are
/// commutative, which the operation cache exploits.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum AddOp {
    Add,
    Mul,
}

/// Opaque reference to a node, valid only within the manager that created
/// it. Handles compare equal exactly when they represent the same function.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct AddHandle {
    mgr: u32,
    node: u32,
}

#[derive(Clone, PartialEq, Eq, Debug)]
enum Node {
    Leaf(BigRational),
    Inner { var: Var, lo: u32, hi: u32 },
}

const LEAF_LEVEL: u32 = u32::MAX;

static NEXT_MANAGER_ID: AtomicU32 = AtomicU32::new(0);

/// Node store, unique tables and operation caches for one family of ADDs.
pub struct AddManager {
    id: u32,
    order: Vec<Var>,
    level_of: Vec<u32>,
    nodes: Vec<Node>,
    leaf_table: HashMap<BigRational, u32>,
    unique_table: HashMap<(Var, u32, u32), u32>,
    apply_cache: HashMap<(AddOp, u32, u32), u32>,
    ite_cache: HashMap<(u32, u32, u32), u32>,
    restrict_cache: HashMap<(u32, u32, bool), u32>,
    cache_limit: usize,
    apply_calls: u64,
    stamps: Vec<u32>,
    stamp: u32,
    zero: u32,
    one: u32,
}

impl AddManager {
    /// Creates a manager over `1..=num_vars` in index order.
    pub fn new(num_vars: u32) -> Self {
        Self::with_order((1..=num_vars).map(Var::new).collect())
    }

    /// Creates a manager with an explicit global variable order.
    ///
    /// Panics if `order` is not duplicate-free.
    pub fn with_order(order: Vec<Var>) -> Self {
        let max_index = order.iter().map(|v| v.index()).max().unwrap_or(0);
        let mut level_of = vec![LEAF_LEVEL; max_index as usize + 1];
        for (level, var) in order.iter().enumerate() {
            assert!(
                level_of[var.index() as usize] == LEAF_LEVEL,
                "duplicate {var} in variable order"
            );
            level_of[var.index() as usize] = level as u32;
        }
        let mut mgr = AddManager {
            id: NEXT_MANAGER_ID.fetch_add(1, Ordering::Relaxed),
            order,
            level_of,
            nodes: Vec::new(),
            leaf_table: HashMap::new(),
            unique_table: HashMap::new(),
            apply_cache: HashMap::new(),
            ite_cache: HashMap::new(),
            restrict_cache: HashMap::new(),
            cache_limit: 0,
            apply_calls: 0,
            stamps: Vec::new(),
            stamp: 0,
            zero: 0,
            one: 0,
        };
        mgr.zero = mgr.mk_leaf(BigRational::zero());
        mgr.one = mgr.mk_leaf(BigRational::one());
        mgr
    }

    /// Soft cap on operation-cache entries; 0 means unbounded. When the
    /// combined caches exceed the cap after an operation they are cleared.
    /// Node and unique tables are unaffected.
    pub fn set_cache_limit(&mut self, limit: usize) {
        self.cache_limit = limit;
    }

    pub fn num_vars(&self) -> u32 {
        self.order.len() as u32
    }

    pub fn variable_order(&self) -> &[Var] {
        &self.order
    }

    /// Total number of nodes ever created, including leaves. Nodes are not
    /// garbage collected within a run, so this is also the peak.
    pub fn total_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// Number of `apply` invocations, including recursive ones.
    pub fn apply_calls(&self) -> u64 {
        self.apply_calls
    }

    fn handle(&self, node: u32) -> AddHandle {
        AddHandle { mgr: self.id, node }
    }

    fn check(&self, handle: AddHandle) -> u32 {
        assert!(
            handle.mgr == self.id && (handle.node as usize) < self.nodes.len(),
            "AddHandle belongs to a different manager"
        );
        handle.node
    }

    fn level(&self, node: u32) -> u32 {
        match &self.nodes[node as usize] {
            Node::Leaf(_) => LEAF_LEVEL,
            Node::Inner { var, .. } => self.level_of[var.index() as usize],
        }
    }

    fn mk_leaf(&mut self, value: BigRational) -> u32 {
        if let Some(&id) = self.leaf_table.get(&value) {
            return id;
        }
        let id = self.nodes.len() as u32;
        self.leaf_table.insert(value.clone(), id);
        self.nodes.push(Node::Leaf(value));
        self.stamps.push(0);
        id
    }

    fn mk_node(&mut self, var: Var, lo: u32, hi: u32) -> u32 {
        if lo == hi {
            return lo;
        }
        debug_assert!(self.level_of[var.index() as usize] < self.level(lo));
        debug_assert!(self.level_of[var.index() as usize] < self.level(hi));
        if let Some(&id) = self.unique_table.get(&(var, lo, hi)) {
            return id;
        }
        let id = self.nodes.len() as u32;
        self.unique_table.insert((var, lo, hi), id);
        self.nodes.push(Node::Inner { var, lo, hi });
        self.stamps.push(0);
        id
    }

    /// Children of `node` with respect to the variable at `level`.
    fn cofactors(&self, node: u32, level: u32) -> (u32, u32) {
        match &self.nodes[node as usize] {
            Node::Inner { var, lo, hi } if self.level_of[var.index() as usize] == level => {
                (*lo, *hi)
            }
            _ => (node, node),
        }
    }

    fn trim_caches(&mut self) {
        if self.cache_limit > 0
            && self.apply_cache.len() + self.ite_cache.len() + self.restrict_cache.len()
                > self.cache_limit
        {
            self.apply_cache.clear();
            self.ite_cache.clear();
            self.restrict_cache.clear();
        }
    }

    /// The unique leaf for `value`.
    pub fn constant(&mut self, value: CarrierValue) -> AddHandle {
        let id = self.mk_leaf(value);
        self.handle(id)
    }

    pub fn zero(&self) -> AddHandle {
        self.handle(self.zero)
    }

    pub fn one(&self) -> AddHandle {
        self.handle(self.one)
    }

    /// The indicator ADD of a literal: a node on its variable with leaves 1
    /// and 0 arranged by polarity.
    ///
    /// Panics if the variable is not in the manager's order.
    pub fn literal(&mut self, literal: Literal) -> AddHandle {
        let index = literal.var().index() as usize;
        assert!(
            index < self.level_of.len() && self.level_of[index] != LEAF_LEVEL,
            "{} is not in this manager's variable order",
            literal.var()
        );
        let (lo, hi) = if literal.is_negated() {
            (self.one, self.zero)
        } else {
            (self.zero, self.one)
        };
        let id = self.mk_node(literal.var(), lo, hi);
        self.handle(id)
    }

    /// Pointwise combination of two ADDs under `op`, memoized.
    pub fn apply(&mut self, op: AddOp, a: AddHandle, b: AddHandle) -> AddHandle {
        let (a, b) = (self.check(a), self.check(b));
        let id = self.apply_rec(op, a, b);
        self.trim_caches();
        self.handle(id)
    }

    fn apply_rec(&mut self, op: AddOp, a: u32, b: u32) -> u32 {
        self.apply_calls += 1;
        match op {
            AddOp::Add => {
                if a == self.zero {
                    return b;
                }
                if b == self.zero {
                    return a;
                }
            }
            AddOp::Mul => {
                if a == self.zero || b == self.zero {
                    return self.zero;
                }
                if a == self.one {
                    return b;
                }
                if b == self.one {
                    return a;
                }
            }
        }
        if let (Node::Leaf(x), Node::Leaf(y)) = (&self.nodes[a as usize], &self.nodes[b as usize]) {
            let value = match op {
                AddOp::Add => x + y,
                AddOp::Mul => x * y,
            };
            return self.mk_leaf(value);
        }
        let key = (op, a.min(b), a.max(b));
        if let Some(&cached) = self.apply_cache.get(&key) {
            return cached;
        }
        let level = self.level(a).min(self.level(b));
        let var = self.order[level as usize];
        let (a_lo, a_hi) = self.cofactors(a, level);
        let (b_lo, b_hi) = self.cofactors(b, level);
        let lo = self.apply_rec(op, a_lo, b_lo);
        let hi = self.apply_rec(op, a_hi, b_hi);
        let result = self.mk_node(var, lo, hi);
        self.apply_cache.insert(key, result);
        result
    }

    /// If-then-else composition: pointwise `if func(f) = 1 then func(g)
    /// else func(h)`.
    ///
    /// Panics if `f` has a leaf outside `{0, 1}`.
    pub fn ite(&mut self, f: AddHandle, g: AddHandle, h: AddHandle) -> AddHandle {
        let (f, g, h) = (self.check(f), self.check(g), self.check(h));
        let id = self.ite_rec(f, g, h);
        self.trim_caches();
        self.handle(id)
    }

    fn ite_rec(&mut self, f: u32, g: u32, h: u32) -> u32 {
        if f == self.one {
            return g;
        }
        if f == self.zero {
            return h;
        }
        if let Node::Leaf(value) = &self.nodes[f as usize] {
            panic!("ITE selector has leaf {value} outside {{0, 1}}");
        }
        if g == h {
            return g;
        }
        let key = (f, g, h);
        if let Some(&cached) = self.ite_cache.get(&key) {
            return cached;
        }
        let level = self.level(f).min(self.level(g)).min(self.level(h));
        let var = self.order[level as usize];
        let (f_lo, f_hi) = self.cofactors(f, level);
        let (g_lo, g_hi) = self.cofactors(g, level);
        let (h_lo, h_hi) = self.cofactors(h, level);
        let lo = self.ite_rec(f_lo, g_lo, h_lo);
        let hi = self.ite_rec(f_hi, g_hi, h_hi);
        let result = self.mk_node(var, lo, hi);
        self.ite_cache.insert(key, result);
        result
    }

    /// Cofactor `psi[var -> value]`. Returns `psi` unchanged if `var` is not
    /// in its support.
    pub fn restrict(&mut self, psi: AddHandle, var: Var, value: bool) -> AddHandle {
        let node = self.check(psi);
        let var_level = self
            .level_of
            .get(var.index() as usize)
            .copied()
            .unwrap_or(LEAF_LEVEL);
        if var_level == LEAF_LEVEL {
            return psi;
        }
        let id = self.restrict_rec(node, var, var_level, value);
        self.trim_caches();
        self.handle(id)
    }

    fn restrict_rec(&mut self, node: u32, var: Var, var_level: u32, value: bool) -> u32 {
        let level = self.level(node);
        if level > var_level {
            return node;
        }
        if level == var_level {
            let Node::Inner { lo, hi, .. } = self.nodes[node as usize] else {
                unreachable!()
            };
            return if value { hi } else { lo };
        }
        let key = (node, var.index(), value);
        if let Some(&cached) = self.restrict_cache.get(&key) {
            return cached;
        }
        let Node::Inner {
            var: node_var,
            lo,
            hi,
        } = self.nodes[node as usize]
        else {
            unreachable!()
        };
        let lo = self.restrict_rec(lo, var, var_level, value);
        let hi = self.restrict_rec(hi, var, var_level, value);
        let result = self.mk_node(node_var, lo, hi);
        self.restrict_cache.insert(key, result);
        result
    }

    /// Replaces every leaf value `v` with `f(v)` and re-reduces the
    /// diagram, merging branches that become equal.
    pub fn map_leaves<F>(&mut self, psi: AddHandle, mut f: F) -> AddHandle
    where
        F: FnMut(&CarrierValue) -> CarrierValue,
    {
        let node = self.check(psi);
        let mut memo = HashMap::new();
        let id = self.map_leaves_rec(node, &mut f, &mut memo);
        self.handle(id)
    }

    fn map_leaves_rec<F>(&mut self, node: u32, f: &mut F, memo: &mut HashMap<u32, u32>) -> u32
    where
        F: FnMut(&CarrierValue) -> CarrierValue,
    {
        if let Some(&cached) = memo.get(&node) {
            return cached;
        }
        let result = match &self.nodes[node as usize] {
            Node::Leaf(value) => {
                let mapped = f(value);
                self.mk_leaf(mapped)
            }
            Node::Inner { var, lo, hi } => {
                let (var, lo, hi) = (*var, *lo, *hi);
                let lo = self.map_leaves_rec(lo, f, memo);
                let hi = self.map_leaves_rec(hi, f, memo);
                self.mk_node(var, lo, hi)
            }
        };
        memo.insert(node, result);
        result
    }

    /// Value of a constant ADD, or `None` on an internal node.
    pub fn leaf_value(&self, psi: AddHandle) -> Option<&CarrierValue> {
        match &self.nodes[self.check(psi) as usize] {
            Node::Leaf(value) => Some(value),
            Node::Inner { .. } => None,
        }
    }

    fn visit_reachable(&mut self, root: u32, mut on_node: impl FnMut(&Node)) {
        self.stamp += 1;
        let stamp = self.stamp;
        let mut stack = vec![root];
        while let Some(node) = stack.pop() {
            if self.stamps[node as usize] == stamp {
                continue;
            }
            self.stamps[node as usize] = stamp;
            on_node(&self.nodes[node as usize]);
            if let Node::Inner { lo, hi, .. } = self.nodes[node as usize] {
                stack.push(lo);
                stack.push(hi);
            }
        }
    }

    /// Variables labelling reachable internal nodes, ascending by index.
    pub fn support(&mut self, psi: AddHandle) -> Vec<Var> {
        let root = self.check(psi);
        let mut vars = Vec::new();
        self.visit_reachable(root, |node| {
            if let Node::Inner { var, .. } = node {
                vars.push(*var);
            }
        });
        vars.sort();
        vars.dedup();
        vars
    }

    /// Number of distinct reachable nodes, leaves included.
    pub fn node_count(&mut self, psi: AddHandle) -> usize {
        let root = self.check(psi);
        let mut count = 0usize;
        self.visit_reachable(root, |_| count += 1);
        count
    }

    /// Distinct reachable leaf values, ascending.
    pub fn leaf_values(&mut self, psi: AddHandle) -> Vec<CarrierValue> {
        let root = self.check(psi);
        let mut values = Vec::new();
        self.visit_reachable(root, |node| {
            if let Node::Leaf(value) = node {
                values.push(value.clone());
            }
        });
        values.sort();
        values
    }

    /// True if no reachable internal node has equal children. Holds for
    /// every handle by construction; exposed so tests can verify it.
    pub fn is_reduced(&mut self, psi: AddHandle) -> bool {
        let root = self.check(psi);
        let mut reduced = true;
        self.visit_reachable(root, |node| {
            if let Node::Inner { lo, hi, .. } = node {
                if lo == hi {
                    reduced = false;
                }
            }
        });
        reduced
    }

    /// True if every reachable leaf is 0 or 1.
    pub fn is_indicator(&mut self, psi: AddHandle) -> bool {
        let root = self.check(psi);
        let (zero, one) = (self.zero, self.one);
        let mut ok = true;
        self.stamp += 1;
        let stamp = self.stamp;
        let mut stack = vec![root];
        while let Some(node) = stack.pop() {
            if self.stamps[node as usize] == stamp {
                continue;
            }
            self.stamps[node as usize] = stamp;
            match self.nodes[node as usize] {
                Node::Leaf(_) => {
                    if node != zero && node != one {
                        ok = false;
                    }
                }
                Node::Inner { lo, hi, .. } => {
                    stack.push(lo);
                    stack.push(hi);
                }
            }
        }
        ok
    }

    /// Evaluates the represented function under a total assignment of the
    /// support variables.
    pub fn evaluate(
        &self,
        psi: AddHandle,
        assignment: &crate::formula::Assignment,
    ) -> CarrierValue {
        let mut node = self.check(psi);
        loop {
            match &self.nodes[node as usize] {
                Node::Leaf(value) => return value.clone(),
                Node::Inner { var, lo, hi } => {
                    let value = assignment
                        .get(*var)
                        .unwrap_or_else(|| panic!("{var} is unassigned"));
                    node = if value { *hi } else { *lo };
                }
            }
        }
    }

    /// DOT dump for debugging: solid edges are true branches, dotted edges
    /// false branches.
    pub fn to_dot(&self, psi: AddHandle) -> String {
        let root = self.check(psi);
        let mut out = String::from("digraph add {\n");
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![root];
        let mut body = String::new();
        while let Some(node) = stack.pop() {
            if seen[node as usize] {
                continue;
            }
            seen[node as usize] = true;
            match &self.nodes[node as usize] {
                Node::Leaf(value) => {
                    let _ = writeln!(body, "  n{node} [shape=box, label=\"{value}\"];");
                }
                Node::Inner { var, lo, hi } => {
                    let _ = writeln!(body, "  n{node} [shape=circle, label=\"{var}\"];");
                    let _ = writeln!(body, "  n{node} -> n{lo} [style=dotted];");
                    let _ = writeln!(body, "  n{node} -> n{hi};");
                    stack.push(*lo);
                    stack.push(*hi);
                }
            }
        }
        out.push_str(&body);
        out.push_str("}\n");
        out
    }
}
