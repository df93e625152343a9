//! Sufficient reasons: prime implicants of a target function that are
//! satisfied by the instance being explained.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::rc::Rc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constrained::Mode;
use crate::formula::{Formula, Instance, VarUniverse};
use crate::obdd::{BddError, Manager, NodeRef};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Literal {
    pub var: usize,
    pub value: bool,
}

impl Literal {
    pub fn new(var: usize, value: bool) -> Self {
        Literal { var, value }
    }

    // positive literals first, then by variable
    fn rank(self) -> (bool, usize) {
        (!self.value, self.var)
    }
}

impl Ord for Literal {
    fn cmp(&self, other: &Self) -> Ordering {
        self.rank().cmp(&other.rank())
    }
}

impl PartialOrd for Literal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("term assigns variable {0} both polarities")]
pub struct InconsistentTerm(pub usize);

/// Consistent conjunction of literals, stored sorted by variable index.
/// The empty term is `true`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Term {
    lits: Vec<Literal>,
}

impl Term {
    pub fn empty() -> Self {
        Term::default()
    }

    pub fn new<I: IntoIterator<Item = Literal>>(lits: I) -> Result<Self, InconsistentTerm> {
        let mut lits: Vec<Literal> = lits.into_iter().collect();
        lits.sort_by_key(|l| (l.var, l.value));
        lits.dedup();
        for w in lits.windows(2) {
            if w[0].var == w[1].var {
                return Err(InconsistentTerm(w[0].var));
            }
        }
        Ok(Term { lits })
    }

    /// Term from `(var, value)` pairs; panics on inconsistency.
    pub fn from_pairs(pairs: &[(usize, bool)]) -> Self {
        Term::new(pairs.iter().map(|&(v, b)| Literal::new(v, b))).expect("consistent term")
    }

    /// The literals of `x` on the given variables.
    pub fn restrict(x: &Instance, vars: &[usize]) -> Self {
        Term::new(vars.iter().map(|&v| Literal::new(v, x.get(v)))).expect("instance is consistent")
    }

    pub fn literals(&self) -> &[Literal] {
        &self.lits
    }

    pub fn len(&self) -> usize {
        self.lits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lits.is_empty()
    }

    pub fn value_of(&self, var: usize) -> Option<bool> {
        self.lits
            .binary_search_by_key(&var, |l| l.var)
            .ok()
            .map(|i| self.lits[i].value)
    }

    pub fn satisfied_by(&self, x: &Instance) -> bool {
        self.lits.iter().all(|l| x.get(l.var) == l.value)
    }

    /// Literal-set inclusion `self ⊆ other`.
    pub fn is_subset_of(&self, other: &Term) -> bool {
        if self.lits.len() > other.lits.len() {
            return false;
        }
        let mut it = other.lits.iter();
        'outer: for l in &self.lits {
            for o in it.by_ref() {
                if o.var == l.var {
                    if o.value == l.value {
                        continue 'outer;
                    }
                    return false;
                }
                if o.var > l.var {
                    return false;
                }
            }
            return false;
        }
        true
    }

    /// Copy of `self` with literal `lit` added; `lit.var` must not occur yet.
    fn with(&self, lit: Literal) -> Term {
        let pos = self.lits.partition_point(|l| l.var < lit.var);
        debug_assert!(self.lits.get(pos).is_none_or(|l| l.var != lit.var));
        let mut lits = Vec::with_capacity(self.lits.len() + 1);
        lits.extend_from_slice(&self.lits[..pos]);
        lits.push(lit);
        lits.extend_from_slice(&self.lits[pos..]);
        Term { lits }
    }

    pub fn without(&self, var: usize) -> Term {
        Term {
            lits: self.lits.iter().copied().filter(|l| l.var != var).collect(),
        }
    }

    pub fn pairs(&self) -> Vec<(usize, bool)> {
        self.lits.iter().map(|l| (l.var, l.value)).collect()
    }

    pub fn to_formula(&self) -> Formula {
        let mut it = self.lits.iter();
        match it.next() {
            None => Formula::Const(true),
            Some(first) => it.fold(Formula::literal(first.var, first.value), |acc, l| {
                acc.and(Formula::literal(l.var, l.value))
            }),
        }
    }

    /// `(!L & A)`, a bare literal for single-literal terms, `true` when empty.
    pub fn render(&self, universe: &VarUniverse) -> String {
        TermDisplay { term: self, universe }.to_string()
    }

    fn sort_key(&self) -> Vec<Literal> {
        let mut key = self.lits.clone();
        key.sort();
        key
    }
}

/// Shortest first; equal lengths compare the literal lists, each sorted
/// with positive literals ahead of negative ones.
impl Ord for Term {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.sort_key().cmp(&other.sort_key()))
    }
}

impl PartialOrd for Term {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct TermDisplay<'a> {
    term: &'a Term,
    universe: &'a VarUniverse,
}

impl fmt::Display for TermDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lits = self.term.literals();
        let lit = |f: &mut fmt::Formatter<'_>, l: &Literal| {
            let bang = if l.value { "" } else { "!" };
            write!(f, "{bang}{}", self.universe.name(l.var))
        };
        match lits {
            [] => f.write_str("true"),
            [only] => lit(f, only),
            _ => {
                f.write_str("(")?;
                for (i, l) in lits.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" & ")?;
                    }
                    lit(f, l)?;
                }
                f.write_str(")")
            }
        }
    }
}

/// `s` subsumes `t` iff `[t] ⊆ [s]`.
pub fn subsumes(s: &Term, t: &Term) -> bool {
    s.is_subset_of(t)
}

pub fn is_implicant(m: &mut Manager, t: &Term, target: NodeRef) -> Result<bool, BddError> {
    let cube = m.cube(&t.pairs())?;
    let off = m.negate(target)?;
    Ok(m.and(cube, off)? == NodeRef::ZERO)
}

/// `[s] ∩ C = [t] ∩ C`.
pub fn constraint_equivalent(m: &mut Manager, s: &Term, t: &Term, kappa: NodeRef) -> Result<bool, BddError> {
    Ok(restrict_to(m, s, kappa)? == restrict_to(m, t, kappa)?)
}

/// `[t] ∩ C ⊆ [s] ∩ C`, i.e. `t` is constraint-subsumed by `s`.
pub fn constraint_subsumes(m: &mut Manager, s: &Term, t: &Term, kappa: NodeRef) -> Result<bool, BddError> {
    let sc = restrict_to(m, s, kappa)?;
    let tc = restrict_to(m, t, kappa)?;
    Ok(m.implies(tc, sc)? == NodeRef::ONE)
}

fn restrict_to(m: &mut Manager, t: &Term, kappa: NodeRef) -> Result<NodeRef, BddError> {
    let cube = m.cube(&t.pairs())?;
    m.and(cube, kappa)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReasonError {
    #[error("instance {0} is not a positive instance of the target")]
    NotPositive(String),
    #[error(transparent)]
    Bdd(#[from] BddError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TermStatus {
    Kept,
    /// Constraint-equivalent to the reason at this index in the trace.
    MergedInto(usize),
    /// Strictly constraint-subsumed by the reason at this index.
    DroppedSubsumed(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    pub target: NodeRef,
    pub instance: Instance,
    pub mode: Option<Mode>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterPolicy {
    #[default]
    None,
    CeqClasses,
    CsubMaximal,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReasonSet {
    pub query: Query,
    /// Surviving reasons in output order.
    pub reasons: Vec<Term>,
    /// Every enumerated reason in output order with its filter status.
    pub trace: Vec<(Term, TermStatus)>,
    pub policy: FilterPolicy,
}

impl ReasonSet {
    pub fn min_len(&self) -> Option<usize> {
        self.reasons.iter().map(Term::len).min()
    }

    pub fn max_len(&self) -> Option<usize> {
        self.reasons.iter().map(Term::len).max()
    }

    pub fn render(&self, universe: &VarUniverse) -> Vec<String> {
        self.reasons.iter().map(|t| t.render(universe)).collect()
    }
}

/// All prime implicants of `target` satisfied by `x`, sorted.
pub fn sufficient_reasons(m: &mut Manager, target: NodeRef, x: &Instance) -> Result<ReasonSet, ReasonError> {
    if !m.eval(target, x) {
        return Err(ReasonError::NotPositive(x.bitstring()));
    }
    let mut memo = HashMap::new();
    let found = reasons_rec(m, target, x, &mut memo)?;
    let mut reasons: Vec<Term> = found.as_ref().clone();
    reasons.sort();
    let trace = reasons.iter().map(|t| (t.clone(), TermStatus::Kept)).collect();
    Ok(ReasonSet {
        query: Query {
            target,
            instance: x.clone(),
            mode: None,
        },
        reasons,
        trace,
        policy: FilterPolicy::None,
    })
}

// Shannon expansion on the top variable v of `g`, following only x's branch:
// reasons omitting v are those of forall(g, v); reasons using v extend the
// reasons of g|v=x_v and survive unless some v-free reason is a subset.
fn reasons_rec(
    m: &mut Manager,
    g: NodeRef,
    x: &Instance,
    memo: &mut HashMap<NodeRef, Rc<Vec<Term>>>,
) -> Result<Rc<Vec<Term>>, BddError> {
    if g == NodeRef::ONE {
        return Ok(Rc::new(vec![Term::empty()]));
    }
    if g == NodeRef::ZERO {
        return Ok(Rc::new(Vec::new()));
    }
    if let Some(r) = memo.get(&g) {
        return Ok(Rc::clone(r));
    }
    let v = m.top_var(g).expect("internal node");
    let xv = x.get(v);
    let (low, high) = (m.low(g), m.high(g));
    let both = m.and(low, high)?;
    let branch = if xv { high } else { low };

    let without_v = reasons_rec(m, both, x, memo)?;
    let with_v = reasons_rec(m, branch, x, memo)?;

    let lit = Literal::new(v, xv);
    let mut out: Vec<Term> = without_v.as_ref().clone();
    for t in with_v.iter() {
        if !without_v.iter().any(|a| a.is_subset_of(t)) {
            out.push(t.with(lit));
        }
    }
    let out = Rc::new(out);
    memo.insert(g, Rc::clone(&out));
    Ok(out)
}

/// Applies a representative-selection policy relative to constraint `kappa`.
pub fn filter_representatives(
    m: &mut Manager,
    rs: &ReasonSet,
    kappa: NodeRef,
    policy: FilterPolicy,
) -> Result<ReasonSet, BddError> {
    let terms: Vec<Term> = rs.trace.iter().map(|(t, _)| t.clone()).collect();
    let mut status = vec![TermStatus::Kept; terms.len()];
    match policy {
        FilterPolicy::None => {}
        FilterPolicy::CeqClasses => {
            // terms are sorted, so the first member of a class is its representative
            let mut classes: HashMap<NodeRef, usize> = HashMap::new();
            for (i, t) in terms.iter().enumerate() {
                let key = restrict_to(m, t, kappa)?;
                match classes.get(&key) {
                    Some(&rep) => status[i] = TermStatus::MergedInto(rep),
                    None => {
                        classes.insert(key, i);
                    }
                }
            }
        }
        FilterPolicy::CsubMaximal => {
            let restricted = terms
                .iter()
                .map(|t| restrict_to(m, t, kappa))
                .collect::<Result<Vec<_>, _>>()?;
            for i in 0..terms.len() {
                for j in 0..terms.len() {
                    if i == j || restricted[i] == restricted[j] {
                        continue;
                    }
                    if m.implies(restricted[i], restricted[j])? == NodeRef::ONE {
                        status[i] = TermStatus::DroppedSubsumed(j);
                        break;
                    }
                }
            }
        }
    }
    let reasons = terms
        .iter()
        .zip(&status)
        .filter(|(_, s)| **s == TermStatus::Kept)
        .map(|(t, _)| t.clone())
        .collect();
    Ok(ReasonSet {
        query: rs.query.clone(),
        reasons,
        trace: terms.into_iter().zip(status).collect(),
        policy,
    })
}
