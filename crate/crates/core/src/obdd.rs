//! Reduced ordered BDDs with a hash-consed unique table.
//!
//! A [`Manager`] owns every node; [`NodeRef`]s are only meaningful inside
//! the manager that produced them. Two refs from one manager are equal
//! iff they denote the same function.

use std::collections::HashMap;
use std::fmt::Write as _;

use num_bigint::BigUint;
use thiserror::Error;

use crate::formula::{Formula, Instance, VarUniverse};

pub const DEFAULT_NODE_BUDGET: usize = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BddError {
    #[error("node budget of {limit} nodes exceeded")]
    NodeBudgetExceeded { limit: usize },
    #[error("variable {var} outside universe of {n} variables")]
    VarOutOfRange { var: usize, n: usize },
    #[error("invalid variable order: {0}")]
    BadOrder(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeRef(u32);

impl NodeRef {
    pub const ZERO: NodeRef = NodeRef(0);
    pub const ONE: NodeRef = NodeRef(1);

    pub fn is_const(self) -> bool {
        self.0 < 2
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Op {
    And,
    Or,
    Implies,
    Iff,
}

impl Op {
    fn commutative(self) -> bool {
        !matches!(self, Op::Implies)
    }

    fn eval(self, a: bool, b: bool) -> bool {
        match self {
            Op::And => a && b,
            Op::Or => a || b,
            Op::Implies => !a || b,
            Op::Iff => a == b,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct Node {
    var: u32,
    low: NodeRef,
    high: NodeRef,
}

/// Sentinel variable stored in the two sink slots.
const SINK_VAR: u32 = u32::MAX;

#[derive(Debug, Clone)]
pub struct Manager {
    order: Vec<usize>,
    level: Vec<usize>,
    nodes: Vec<Node>,
    unique: HashMap<Node, NodeRef>,
    apply_cache: HashMap<(Op, NodeRef, NodeRef), NodeRef>,
    not_cache: HashMap<NodeRef, NodeRef>,
    budget: usize,
}

impl Manager {
    /// Manager over `n` variables in index order.
    pub fn new(n: usize) -> Self {
        Self::with_order((0..n).collect()).expect("identity order is a permutation")
    }

    /// `order[p]` is the variable tested at position `p`.
    pub fn with_order(order: Vec<usize>) -> Result<Self, BddError> {
        let n = order.len();
        let mut level = vec![usize::MAX; n];
        for (pos, &v) in order.iter().enumerate() {
            if v >= n {
                return Err(BddError::BadOrder(format!("variable {v} out of range")));
            }
            if level[v] != usize::MAX {
                return Err(BddError::BadOrder(format!("variable {v} repeated")));
            }
            level[v] = pos;
        }
        let sink = |b| Node {
            var: SINK_VAR,
            low: NodeRef(b),
            high: NodeRef(b),
        };
        Ok(Manager {
            order,
            level,
            nodes: vec![sink(0), sink(1)],
            unique: HashMap::new(),
            apply_cache: HashMap::new(),
            not_cache: HashMap::new(),
            budget: DEFAULT_NODE_BUDGET,
        })
    }

    /// Builds an order from variable names, e.g. `--order A,P,K,L`.
    pub fn order_from_names(universe: &VarUniverse, names: &[&str]) -> Result<Vec<usize>, BddError> {
        if names.len() != universe.len() {
            return Err(BddError::BadOrder(format!(
                "order lists {} variables, universe has {}",
                names.len(),
                universe.len()
            )));
        }
        names
            .iter()
            .map(|name| {
                universe
                    .index_of(name.trim())
                    .ok_or_else(|| BddError::BadOrder(format!("unknown variable {name:?}")))
            })
            .collect()
    }

    pub fn set_node_budget(&mut self, budget: usize) {
        self.budget = budget;
    }

    pub fn node_budget(&self) -> usize {
        self.budget
    }

    pub fn num_vars(&self) -> usize {
        self.order.len()
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Position of `var` in the order.
    pub fn level_of_var(&self, var: usize) -> usize {
        self.level[var]
    }

    /// Internal nodes stored in the manager (all functions).
    pub fn stored_nodes(&self) -> usize {
        self.nodes.len() - 2
    }

    /// Decision variable of `a`, `None` for sinks.
    pub fn top_var(&self, a: NodeRef) -> Option<usize> {
        if a.is_const() {
            None
        } else {
            Some(self.nodes[a.index()].var as usize)
        }
    }

    pub fn low(&self, a: NodeRef) -> NodeRef {
        self.nodes[a.index()].low
    }

    pub fn high(&self, a: NodeRef) -> NodeRef {
        self.nodes[a.index()].high
    }

    fn level(&self, a: NodeRef) -> usize {
        if a.is_const() {
            self.order.len()
        } else {
            self.level[self.nodes[a.index()].var as usize]
        }
    }

    fn check_var(&self, var: usize) -> Result<(), BddError> {
        if var >= self.order.len() {
            Err(BddError::VarOutOfRange {
                var,
                n: self.order.len(),
            })
        } else {
            Ok(())
        }
    }

    fn mk(&mut self, var: usize, low: NodeRef, high: NodeRef) -> Result<NodeRef, BddError> {
        if low == high {
            return Ok(low);
        }
        let node = Node {
            var: var as u32,
            low,
            high,
        };
        if let Some(&r) = self.unique.get(&node) {
            return Ok(r);
        }
        if self.nodes.len() - 2 >= self.budget {
            return Err(BddError::NodeBudgetExceeded { limit: self.budget });
        }
        let r = NodeRef(self.nodes.len() as u32);
        self.nodes.push(node);
        self.unique.insert(node, r);
        Ok(r)
    }

    pub fn constant(&self, value: bool) -> NodeRef {
        if value {
            NodeRef::ONE
        } else {
            NodeRef::ZERO
        }
    }

    pub fn var(&mut self, var: usize) -> Result<NodeRef, BddError> {
        self.literal(var, true)
    }

    pub fn literal(&mut self, var: usize, value: bool) -> Result<NodeRef, BddError> {
        self.check_var(var)?;
        if value {
            self.mk(var, NodeRef::ZERO, NodeRef::ONE)
        } else {
            self.mk(var, NodeRef::ONE, NodeRef::ZERO)
        }
    }

    /// Conjunction of literals `(var, value)`. Contradictory literals give ZERO.
    pub fn cube(&mut self, literals: &[(usize, bool)]) -> Result<NodeRef, BddError> {
        let mut lits = Vec::with_capacity(literals.len());
        for &(v, b) in literals {
            self.check_var(v)?;
            lits.push((self.level[v], v, b));
        }
        lits.sort_unstable();
        for w in lits.windows(2) {
            if w[0].1 == w[1].1 && w[0].2 != w[1].2 {
                return Ok(NodeRef::ZERO);
            }
        }
        lits.dedup();
        let mut acc = NodeRef::ONE;
        for &(_, v, b) in lits.iter().rev() {
            acc = if b {
                self.mk(v, NodeRef::ZERO, acc)?
            } else {
                self.mk(v, acc, NodeRef::ZERO)?
            };
        }
        Ok(acc)
    }

    pub fn compile(&mut self, f: &Formula) -> Result<NodeRef, BddError> {
        match f {
            Formula::Const(b) => Ok(self.constant(*b)),
            Formula::Var(v) => self.var(*v),
            Formula::Not(a) => {
                let a = self.compile(a)?;
                self.negate(a)
            }
            Formula::And(a, b) => self.compile_binary(Op::And, a, b),
            Formula::Or(a, b) => self.compile_binary(Op::Or, a, b),
            Formula::Implies(a, b) => self.compile_binary(Op::Implies, a, b),
            Formula::Iff(a, b) => self.compile_binary(Op::Iff, a, b),
        }
    }

    fn compile_binary(&mut self, op: Op, a: &Formula, b: &Formula) -> Result<NodeRef, BddError> {
        let a = self.compile(a)?;
        let b = self.compile(b)?;
        self.apply(op, a, b)
    }

    pub fn and(&mut self, a: NodeRef, b: NodeRef) -> Result<NodeRef, BddError> {
        self.apply(Op::And, a, b)
    }

    pub fn or(&mut self, a: NodeRef, b: NodeRef) -> Result<NodeRef, BddError> {
        self.apply(Op::Or, a, b)
    }

    pub fn implies(&mut self, a: NodeRef, b: NodeRef) -> Result<NodeRef, BddError> {
        self.apply(Op::Implies, a, b)
    }

    pub fn iff(&mut self, a: NodeRef, b: NodeRef) -> Result<NodeRef, BddError> {
        self.apply(Op::Iff, a, b)
    }

    pub fn apply(&mut self, op: Op, a: NodeRef, b: NodeRef) -> Result<NodeRef, BddError> {
        use NodeRef as N;
        // terminal rules
        match op {
            Op::And => {
                if a == N::ZERO || b == N::ZERO {
                    return Ok(N::ZERO);
                }
                if a == N::ONE || a == b {
                    return Ok(b);
                }
                if b == N::ONE {
                    return Ok(a);
                }
            }
            Op::Or => {
                if a == N::ONE || b == N::ONE {
                    return Ok(N::ONE);
                }
                if a == N::ZERO || a == b {
                    return Ok(b);
                }
                if b == N::ZERO {
                    return Ok(a);
                }
            }
            Op::Implies => {
                if a == N::ZERO || b == N::ONE || a == b {
                    return Ok(N::ONE);
                }
                if a == N::ONE {
                    return Ok(b);
                }
                if b == N::ZERO {
                    return self.negate(a);
                }
            }
            Op::Iff => {
                if a == b {
                    return Ok(N::ONE);
                }
                if a == N::ONE {
                    return Ok(b);
                }
                if b == N::ONE {
                    return Ok(a);
                }
                if a == N::ZERO {
                    return self.negate(b);
                }
                if b == N::ZERO {
                    return self.negate(a);
                }
            }
        }
        if a.is_const() && b.is_const() {
            return Ok(self.constant(op.eval(a == N::ONE, b == N::ONE)));
        }
        let (a, b) = if op.commutative() && b < a { (b, a) } else { (a, b) };
        if let Some(&r) = self.apply_cache.get(&(op, a, b)) {
            return Ok(r);
        }
        let (la, lb) = (self.level(a), self.level(b));
        let top = la.min(lb);
        let var = self.order[top];
        let (a0, a1) = if la == top { (self.low(a), self.high(a)) } else { (a, a) };
        let (b0, b1) = if lb == top { (self.low(b), self.high(b)) } else { (b, b) };
        let low = self.apply(op, a0, b0)?;
        let high = self.apply(op, a1, b1)?;
        let r = self.mk(var, low, high)?;
        self.apply_cache.insert((op, a, b), r);
        Ok(r)
    }

    pub fn negate(&mut self, a: NodeRef) -> Result<NodeRef, BddError> {
        if a == NodeRef::ZERO {
            return Ok(NodeRef::ONE);
        }
        if a == NodeRef::ONE {
            return Ok(NodeRef::ZERO);
        }
        if let Some(&r) = self.not_cache.get(&a) {
            return Ok(r);
        }
        let Node { var, low, high } = self.nodes[a.index()];
        let low = self.negate(low)?;
        let high = self.negate(high)?;
        let r = self.mk(var as usize, low, high)?;
        self.not_cache.insert(a, r);
        self.not_cache.insert(r, a);
        Ok(r)
    }

    /// `if var then high else low`.
    pub fn ite_var(&mut self, var: usize, high: NodeRef, low: NodeRef) -> Result<NodeRef, BddError> {
        let v = self.literal(var, true)?;
        let nv = self.literal(var, false)?;
        let h = self.and(v, high)?;
        let l = self.and(nv, low)?;
        self.or(h, l)
    }

    /// Restriction of `a` to `var = value`.
    pub fn cofactor(&mut self, a: NodeRef, var: usize, value: bool) -> Result<NodeRef, BddError> {
        self.check_var(var)?;
        let mut memo = HashMap::new();
        self.cofactor_rec(a, self.level[var], value, &mut memo)
    }

    fn cofactor_rec(
        &mut self,
        a: NodeRef,
        target_level: usize,
        value: bool,
        memo: &mut HashMap<NodeRef, NodeRef>,
    ) -> Result<NodeRef, BddError> {
        let la = self.level(a);
        if la > target_level {
            return Ok(a);
        }
        let Node { var, low, high } = self.nodes[a.index()];
        if la == target_level {
            return Ok(if value { high } else { low });
        }
        if let Some(&r) = memo.get(&a) {
            return Ok(r);
        }
        let l = self.cofactor_rec(low, target_level, value, memo)?;
        let h = self.cofactor_rec(high, target_level, value, memo)?;
        let r = self.mk(var as usize, l, h)?;
        memo.insert(a, r);
        Ok(r)
    }

    /// Universal quantification: `a|var=0 & a|var=1`.
    pub fn forall(&mut self, a: NodeRef, var: usize) -> Result<NodeRef, BddError> {
        let a0 = self.cofactor(a, var, false)?;
        let a1 = self.cofactor(a, var, true)?;
        self.and(a0, a1)
    }

    pub fn exists(&mut self, a: NodeRef, var: usize) -> Result<NodeRef, BddError> {
        let a0 = self.cofactor(a, var, false)?;
        let a1 = self.cofactor(a, var, true)?;
        self.or(a0, a1)
    }

    pub fn eval(&self, a: NodeRef, x: &Instance) -> bool {
        let mut cur = a;
        while !cur.is_const() {
            let node = self.nodes[cur.index()];
            cur = if x.get(node.var as usize) { node.high } else { node.low };
        }
        cur == NodeRef::ONE
    }

    /// Number of satisfying assignments over the whole universe.
    pub fn count_models(&self, a: NodeRef) -> BigUint {
        let mut memo: HashMap<NodeRef, BigUint> = HashMap::new();
        let below = self.count_below(a, &mut memo);
        below << self.level(a)
    }

    // models over the variables at levels >= level(a)
    fn count_below(&self, a: NodeRef, memo: &mut HashMap<NodeRef, BigUint>) -> BigUint {
        if a == NodeRef::ZERO {
            return BigUint::from(0u32);
        }
        if a == NodeRef::ONE {
            return BigUint::from(1u32);
        }
        if let Some(c) = memo.get(&a) {
            return c.clone();
        }
        let Node { low, high, .. } = self.nodes[a.index()];
        let la = self.level(a);
        let cl = self.count_below(low, memo) << (self.level(low) - la - 1);
        let ch = self.count_below(high, memo) << (self.level(high) - la - 1);
        let c = cl + ch;
        memo.insert(a, c.clone());
        c
    }

    /// Internal nodes reachable from `a`.
    pub fn node_count(&self, a: NodeRef) -> usize {
        self.reachable(a).len()
    }

    fn reachable(&self, a: NodeRef) -> Vec<NodeRef> {
        let mut seen = std::collections::HashSet::new();
        let mut stack = vec![a];
        let mut out = Vec::new();
        while let Some(r) = stack.pop() {
            if r.is_const() || !seen.insert(r) {
                continue;
            }
            out.push(r);
            stack.push(self.low(r));
            stack.push(self.high(r));
        }
        out
    }

    /// Variables `a` depends on, sorted by index.
    pub fn support(&self, a: NodeRef) -> Vec<usize> {
        let mut vars: Vec<usize> = self
            .reachable(a)
            .into_iter()
            .map(|r| self.nodes[r.index()].var as usize)
            .collect();
        vars.sort_unstable();
        vars.dedup();
        vars
    }

    /// Returns one satisfying assignment, unassigned variables set to 0.
    pub fn any_model(&self, a: NodeRef) -> Option<Instance> {
        if a == NodeRef::ZERO {
            return None;
        }
        let mut x = Instance::new(vec![false; self.num_vars()]);
        let mut cur = a;
        while !cur.is_const() {
            let node = self.nodes[cur.index()];
            if node.low != NodeRef::ZERO {
                cur = node.low;
            } else {
                x.set(node.var as usize, true);
                cur = node.high;
            }
        }
        Some(x)
    }

    /// Graphviz rendering: solid edges go to the high child, dashed to the low.
    pub fn to_dot(&self, a: NodeRef, universe: &VarUniverse) -> String {
        let mut out = String::from("digraph bdd {\n");
        out.push_str("  n0 [label=\"0\", shape=box];\n  n1 [label=\"1\", shape=box];\n");
        let mut nodes = self.reachable(a);
        nodes.sort();
        for r in &nodes {
            let Node { var, low, high } = self.nodes[r.index()];
            let _ = writeln!(
                out,
                "  n{} [label=\"{}\"];\n  n{} -> n{} [style=dashed];\n  n{} -> n{};",
                r.0,
                universe.name(var as usize),
                r.0,
                low.0,
                r.0,
                high.0
            );
        }
        if a.is_const() {
            let _ = writeln!(out, "  root -> n{};", a.0);
        } else {
            let _ = writeln!(out, "  root [shape=point];\n  root -> n{};", a.0);
        }
        out.push_str("}\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{parse, parse_infer};

    fn compile_text(text: &str) -> (VarUniverse, Manager, NodeRef) {
        let (u, f) = parse_infer(text).unwrap();
        let mut m = Manager::new(u.len());
        let r = m.compile(&f).unwrap();
        (u, m, r)
    }

    #[test]
    fn iff_has_three_nodes() {
        let (_, m, r) = compile_text("X1 <-> X2");
        assert_eq!(m.node_count(r), 3);
        for i in 0..4 {
            let x = Instance::from_index(i, 2);
            assert_eq!(m.eval(r, &x), x.get(0) == x.get(1));
        }
    }

    #[test]
    fn constants_reduce() {
        let (_, _, r) = compile_text("true");
        assert_eq!(r, NodeRef::ONE);
        let (_, _, r) = compile_text("X1 & !X1");
        assert_eq!(r, NodeRef::ZERO);
    }

    #[test]
    fn apply_identities() {
        let u = VarUniverse::new(["X1", "X2"]).unwrap();
        let mut m = Manager::new(2);
        let kappa = m.compile(&parse("X1 -> X2", &u).unwrap()).unwrap();
        let f = m.compile(&parse("X1 <-> X2", &u).unwrap()).unwrap();
        let nk = m.negate(kappa).unwrap();
        let lhs = m.or(nk, f).unwrap();
        let rhs = m.compile(&parse("(X1 -> X2) -> (X1 <-> X2)", &u).unwrap()).unwrap();
        assert_eq!(lhs, rhs);
        assert_eq!(m.and(f, NodeRef::ONE).unwrap(), f);
        let both = m.and(kappa, f).unwrap();
        let onset: Vec<usize> = (0..4).filter(|&i| m.eval(both, &Instance::from_index(i, 2))).collect();
        assert_eq!(onset, vec![0b00, 0b11]);
    }

    #[test]
    fn cofactor_and_forall() {
        let u = VarUniverse::new(["X1", "X2"]).unwrap();
        let mut m = Manager::new(2);
        let f = m.compile(&parse("X1 <-> X2", &u).unwrap()).unwrap();
        let x2 = m.var(1).unwrap();
        assert_eq!(m.cofactor(f, 0, true).unwrap(), x2);
        assert_eq!(m.forall(f, 0).unwrap(), NodeRef::ZERO);
        let nf = m.negate(f).unwrap();
        assert_eq!(m.negate(nf).unwrap(), f);
        // quantifying a variable outside the support is the identity
        let g = m.var(0).unwrap();
        assert_eq!(m.forall(g, 1).unwrap(), g);
        assert_eq!(m.exists(f, 1).unwrap(), NodeRef::ONE);
    }

    #[test]
    fn counts() {
        let (_, m, r) =
            compile_text("(a | b | c | d) & !(a & b) & !(a & c) & !(a & d) & !(b & c) & !(b & d) & !(c & d)");
        assert_eq!(m.count_models(r), BigUint::from(4u32));
        let m = Manager::new(7);
        assert_eq!(m.count_models(NodeRef::ONE), BigUint::from(128u32));
        assert_eq!(m.count_models(NodeRef::ZERO), BigUint::from(0u32));
        let mut m = Manager::new(3);
        let c = m.var(2).unwrap();
        assert_eq!(m.count_models(c), BigUint::from(4u32));
    }

    #[test]
    fn custom_order() {
        let u = VarUniverse::new(["a", "b", "c"]).unwrap();
        let order = Manager::order_from_names(&u, &["c", "a", "b"]).unwrap();
        let mut m = Manager::with_order(order).unwrap();
        let f = m.compile(&parse("a & (b | c)", &u).unwrap()).unwrap();
        assert_eq!(m.top_var(f), Some(2));
        for i in 0..8 {
            let x = Instance::from_index(i, 3);
            assert_eq!(m.eval(f, &x), x.get(0) && (x.get(1) || x.get(2)));
        }
        assert!(Manager::order_from_names(&u, &["a", "b"]).is_err());
        assert!(Manager::order_from_names(&u, &["a", "b", "z"]).is_err());
        assert!(Manager::with_order(vec![0, 0, 1]).is_err());
    }

    #[test]
    fn budget_is_enforced() {
        let (_, f) = parse_infer("(a <-> b) & (c <-> d) & (e <-> f)").unwrap();
        let mut m = Manager::new(6);
        m.set_node_budget(3);
        assert_eq!(m.compile(&f), Err(BddError::NodeBudgetExceeded { limit: 3 }));
    }

    #[test]
    fn out_of_range_var() {
        let mut m = Manager::new(2);
        assert!(matches!(m.var(5), Err(BddError::VarOutOfRange { .. })));
        assert!(m.compile(&Formula::var(2)).is_err());
    }

    #[test]
    fn cube_contradiction() {
        let mut m = Manager::new(3);
        assert_eq!(m.cube(&[(0, true), (0, false)]).unwrap(), NodeRef::ZERO);
        assert_eq!(m.cube(&[]).unwrap(), NodeRef::ONE);
        let c = m.cube(&[(2, true), (0, false)]).unwrap();
        assert_eq!(m.count_models(c), BigUint::from(2u32));
    }

    #[test]
    fn dot_export() {
        let (u, m, r) = compile_text("X1 <-> X2");
        let dot = m.to_dot(r, &u);
        assert!(dot.starts_with("digraph"));
        assert_eq!(dot.matches("style=dashed").count(), 3);
        assert!(dot.contains("label=\"X2\""));
    }

    #[test]
    fn any_model_satisfies() {
        let (_, m, r) = compile_text("!a & (b | c) & !b");
        let x = m.any_model(r).unwrap();
        assert!(m.eval(r, &x));
        assert_eq!(m.any_model(NodeRef::ZERO), None);
    }
}
