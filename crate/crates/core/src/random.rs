//! Random formulas and explanation queries for cross-checking against the
//! oracle.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::formula::{Formula, Instance, VarUniverse};

/// Universe `x0, x1, ...`.
pub fn numbered_universe(n: usize) -> VarUniverse {
    VarUniverse::new((0..n).map(|i| format!("x{i}"))).expect("generated names are valid")
}

/// Random formula with roughly `size` leaves over variables `0..n`.
pub fn random_formula<R: Rng + ?Sized>(rng: &mut R, n: usize, size: usize) -> Formula {
    if size <= 1 || n == 0 {
        if n == 0 || rng.gen_ratio(1, 40) {
            return Formula::Const(rng.gen());
        }
        let v = rng.gen_range(0..n);
        return Formula::literal(v, rng.gen());
    }
    if rng.gen_ratio(1, 8) {
        return random_formula(rng, n, size).not();
    }
    let left = rng.gen_range(1..size);
    let a = random_formula(rng, n, left);
    let b = random_formula(rng, n, size - left);
    match rng.gen_range(0..10) {
        0..=3 => a.and(b),
        4..=7 => a.or(b),
        8 => a.implies(b),
        _ => a.iff(b),
    }
}

/// Conjunction of a few short clauses, or occasionally an arbitrary formula.
pub fn random_constraint<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Formula {
    if n == 0 {
        return Formula::Const(true);
    }
    match rng.gen_range(0..6) {
        0 => Formula::Const(true),
        1 => {
            let size = rng.gen_range(2..=2 * n);
            random_formula(rng, n, size)
        }
        _ => {
            let clauses = rng.gen_range(1..=n.div_ceil(2).max(1));
            let mut vars: Vec<usize> = (0..n).collect();
            Formula::conjunction((0..clauses).map(|_| {
                vars.shuffle(rng);
                let width = rng.gen_range(1..=3.min(n));
                Formula::disjunction(vars[..width].iter().map(|&v| Formula::literal(v, rng.gen())))
            }))
        }
    }
}

#[derive(Debug, Clone)]
pub struct RandomCase {
    pub universe: VarUniverse,
    pub f: Formula,
    pub kappa: Formula,
    /// A positive instance of `f` inside the constraint.
    pub x: Instance,
}

/// Draws `(f, kappa, x)` over `n` variables with `x` in C and `f(x) = 1`,
/// retrying until such an `x` exists. `n` must be small enough to enumerate.
pub fn random_case<R: Rng + ?Sized>(rng: &mut R, n: usize) -> RandomCase {
    loop {
        let size = rng.gen_range(n..=3 * n);
        let f = random_formula(rng, n, size);
        let kappa = random_constraint(rng, n);
        let candidates: Vec<usize> = (0..1usize << n)
            .filter(|&i| {
                let x = Instance::from_index(i, n);
                kappa.eval(&x) && f.eval(&x)
            })
            .collect();
        if let Some(&i) = candidates.choose(rng) {
            return RandomCase {
                universe: numbered_universe(n),
                f,
                kappa,
                x: Instance::from_index(i, n),
            };
        }
    }
}

/// `f = x0 & ... & x(n-1)` under `kappa = x0 -> (x1 & ... & x(n-1))`, explained
/// at all-ones: unconstrained the only reason uses every variable, under
/// the constraint `x0` alone suffices.
pub fn implication_chain_case(n: usize) -> RandomCase {
    assert!(n >= 2);
    let all = Formula::conjunction((0..n).map(Formula::var));
    let rest = Formula::conjunction((1..n).map(Formula::var));
    RandomCase {
        universe: numbered_universe(n),
        f: all,
        kappa: Formula::var(0).implies(rest),
        x: Instance::new(vec![true; n]),
    }
}
