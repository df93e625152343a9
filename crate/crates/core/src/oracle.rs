//! Brute-force ground truth by explicit enumeration. Exponential on
//! purpose; used to check the BDD path, never as the product path.

use thiserror::Error;

use crate::formula::{Formula, Instance};
use crate::reasons::Term;

pub const MAX_ORACLE_VARS: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("{0} variables exceeds the oracle cap of {MAX_ORACLE_VARS}")]
    TooManyVars(usize),
    #[error("instance {0} is not a positive (cared-for) instance")]
    NotPositive(String),
    #[error("tables disagree on arity ({0} vs {1})")]
    Arity(usize, usize),
}

/// Explicit truth table; entry `i` is the value at `Instance::from_index(i, n)`
/// (variable 0 most significant).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruthTable {
    n: usize,
    bits: Vec<bool>,
}

impl TruthTable {
    pub fn from_fn(n: usize, f: impl Fn(&Instance) -> bool) -> Result<Self, OracleError> {
        if n > MAX_ORACLE_VARS {
            return Err(OracleError::TooManyVars(n));
        }
        let bits = (0..1usize << n).map(|i| f(&Instance::from_index(i, n))).collect();
        Ok(TruthTable { n, bits })
    }

    pub fn constant(n: usize, value: bool) -> Result<Self, OracleError> {
        Self::from_fn(n, |_| value)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, x: &Instance) -> bool {
        self.bits[x.to_index()]
    }
}

pub fn table_of(f: &Formula, n: usize) -> Result<TruthTable, OracleError> {
    TruthTable::from_fn(n, |x| f.eval(x))
}

pub fn brute_reasons(tt: &TruthTable, x: &Instance) -> Result<Vec<Term>, OracleError> {
    let care = TruthTable::constant(tt.n, true)?;
    brute_reasons_partial(tt, &care, x)
}

/// Reasons of the partial function that is `f` on `care` and don't-care
/// elsewhere: a cube is an implicant when every instance it covers is
/// either outside `care` or mapped to 1.
pub fn brute_reasons_partial(f: &TruthTable, care: &TruthTable, x: &Instance) -> Result<Vec<Term>, OracleError> {
    let n = f.n;
    if care.n != n {
        return Err(OracleError::Arity(n, care.n));
    }
    if x.len() != n || !care.get(x) || !f.get(x) {
        return Err(OracleError::NotPositive(x.bitstring()));
    }
    let base = x.to_index();
    let allowed = |i: usize| !care.bits[i] || f.bits[i];

    let mut subsets: Vec<usize> = (0..1usize << n).collect();
    subsets.sort_by_key(|s| (s.count_ones(), *s));
    let mut kept: Vec<usize> = Vec::new();
    for fixed in subsets {
        if kept.iter().any(|&k| k & !fixed == 0) {
            continue;
        }
        let free = !fixed & ((1usize << n) - 1);
        if subcube_all(base, free, allowed) {
            kept.push(fixed);
        }
    }
    let mut out: Vec<Term> = kept
        .into_iter()
        .map(|mask| {
            let vars: Vec<usize> = (0..n).filter(|&v| mask >> (n - 1 - v) & 1 == 1).collect();
            Term::restrict(x, &vars)
        })
        .collect();
    out.sort();
    Ok(out)
}

// every instance agreeing with `base` outside `free` satisfies `pred`
fn subcube_all(base: usize, free: usize, mut pred: impl FnMut(usize) -> bool) -> bool {
    let fixed_part = base & !free;
    // enumerate submasks of `free`
    let mut sub = free;
    loop {
        if !pred(fixed_part | sub) {
            return false;
        }
        if sub == 0 {
            return true;
        }
        sub = (sub - 1) & free;
    }
}
