//! Acceptance suite: one PASS/FAIL line per criterion. Run with
//! `cargo test -p reasonkit --test acceptance`.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use reasonkit::constrained::{ConstrainedFn, InstanceClass, Mode};
use reasonkit::fixtures;
use reasonkit::formula::{parse, parse_infer, Formula, Instance, VarUniverse};
use reasonkit::ingest::{ttt_alternation_node, ttt_cell_constraint, ttt_universe};
use reasonkit::obdd::{Manager, NodeRef};
use reasonkit::oracle::{brute_reasons_partial, table_of};
use reasonkit::pipeline::{ConstraintSource, ExplainOptions};
use reasonkit::random::{implication_chain_case, random_case, RandomCase};
use reasonkit::reasons::{constraint_equivalent, subsumes, sufficient_reasons, Term};

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration) -> Result<Duration, String> {
    let took = start.elapsed();
    ensure(took < limit, || format!("took {took:?}, limit {limit:?}"))?;
    Ok(took)
}

/// `"!L & P & A"` as a term over `u`.
fn term(u: &VarUniverse, text: &str) -> Term {
    let pairs: Vec<(usize, bool)> = text
        .split('&')
        .map(|lit| {
            let lit = lit.trim();
            let (name, value) = match lit.strip_prefix('!') {
                Some(rest) => (rest, false),
                None => (lit, true),
            };
            (u.index_of(name).unwrap(), value)
        })
        .collect();
    Term::from_pairs(&pairs)
}

fn term_set(u: &VarUniverse, texts: &[&str]) -> BTreeSet<Term> {
    texts.iter().map(|t| term(u, t)).collect()
}

fn reasons(m: &mut Manager, target: NodeRef, x: &Instance) -> Result<BTreeSet<Term>, String> {
    let rs = sufficient_reasons(m, target, x).map_err(|e| e.to_string())?;
    Ok(rs.reasons.into_iter().collect())
}

fn criterion_1() -> Check {
    let start = Instant::now();
    let (u, f) = parse_infer("X1 <-> X2").unwrap();
    let kappa = parse("X1 -> X2", &u).unwrap();
    let cf = ConstrainedFn::new(u.clone(), f, kappa).unwrap();
    let mut m = Manager::new(2);
    let ignore = m.compile(&cf.build_target(Mode::Ignore)).unwrap();
    let implies = m.compile(&cf.build_target(Mode::Implies)).unwrap();
    let cases = [
        (ignore, "00", "!X1 & !X2"),
        (ignore, "11", "X1 & X2"),
        (implies, "00", "!X2"),
        (implies, "11", "X1"),
    ];
    for (target, bits, want) in cases {
        let x = Instance::parse(bits, &u).unwrap();
        let got = reasons(&mut m, target, &x)?;
        ensure(got == term_set(&u, &[want]), || {
            format!("x={bits}: got {got:?}, want {{{want}}}")
        })?;
    }
    let took = within(start, Duration::from_secs(1))?;
    Ok(format!("4/4 reason sets match ({took:?})"))
}

fn criterion_2() -> Check {
    let start = Instant::now();
    let mut p = fixtures::shortlist_spec().build().map_err(|e| e.to_string())?;
    let u = p.universe.clone();
    let onset: BTreeSet<String> = (0..16)
        .map(|i| Instance::from_index(i, 4))
        .filter(|x| p.manager.eval(p.f, x))
        .map(|x| x.bitstring())
        .collect();
    let want_onset: BTreeSet<String> = ["0011", "0110", "0111", "1100", "1101", "1110", "1111"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    ensure(onset == want_onset, || format!("tree onset {onset:?}"))?;

    let rows: [(&str, &[&str], &[&str]); 5] = [
        ("0011", &["!L & P & A"], &["!L & A"]),
        ("0111", &["!L & P & A", "K & P"], &["!L & A", "K"]),
        ("1100", &["L & K"], &["K"]),
        ("1110", &["L & K", "K & P"], &["K"]),
        ("1111", &["L & K", "K & P"], &["K"]),
    ];
    let positive_in_c: Vec<String> = (0..16)
        .map(|i| Instance::from_index(i, 4))
        .filter(|x| p.classify(x) == InstanceClass::InCPositive)
        .map(|x| x.bitstring())
        .collect();
    let row_keys: Vec<String> = rows.iter().map(|r| r.0.to_string()).collect();
    ensure(positive_in_c == row_keys, || {
        format!("positive instances in C are {positive_in_c:?}")
    })?;

    for (bits, ignore, implies) in rows {
        let x = p.parse_instance(bits).unwrap();
        for (mode, want) in [(Mode::Ignore, ignore), (Mode::Implies, implies)] {
            let opts = ExplainOptions {
                mode,
                ..Default::default()
            };
            let got: BTreeSet<Term> = p
                .explain(&x, &opts)
                .map_err(|e| e.to_string())?
                .reasons
                .reasons
                .into_iter()
                .collect();
            ensure(got == term_set(&u, want), || {
                format!("{bits} {mode}: got {got:?}, want {want:?}")
            })?;
        }
    }
    let took = within(start, Duration::from_secs(1))?;
    Ok(format!("5/5 rows match under ignore and implies ({took:?})"))
}

fn criterion_3() -> Check {
    let (u, _) = parse_infer("X1 | X2").unwrap();
    let mut m = Manager::new(2);
    let xor = m.compile(&parse("(X1 | X2) & !(X1 & X2)", &u).unwrap()).unwrap();
    let s = term(&u, "!X1");
    let t = term(&u, "X2");
    let under_xor = constraint_equivalent(&mut m, &s, &t, xor).map_err(|e| e.to_string())?;
    let under_top = constraint_equivalent(&mut m, &s, &t, NodeRef::ONE).map_err(|e| e.to_string())?;
    ensure(under_xor, || "not equivalent under exactly-one".into())?;
    ensure(!under_top, || "equivalent without constraints".into())?;
    Ok("!X1 ~ X2 under exactly-one, not under true".into())
}

struct Corpus {
    cases: Vec<RandomCase>,
    random: usize,
}

fn corpus() -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut cases: Vec<RandomCase> = (0..520)
        .map(|_| {
            let n = rng.gen_range(4..=12);
            random_case(&mut rng, n)
        })
        .collect();
    let random = cases.len();
    cases.extend((4..=12).map(implication_chain_case));
    Corpus { cases, random }
}

/// Reasons under ignore, implies and conjoin, compiled from formulas.
fn mode_reasons(case: &RandomCase) -> Result<[Vec<Term>; 3], String> {
    let cf =
        ConstrainedFn::new(case.universe.clone(), case.f.clone(), case.kappa.clone()).map_err(|e| e.to_string())?;
    let mut m = Manager::new(case.universe.len());
    let mut out: [Vec<Term>; 3] = Default::default();
    for (slot, mode) in out.iter_mut().zip(Mode::ALL) {
        let target = m.compile(&cf.build_target(mode)).map_err(|e| e.to_string())?;
        *slot = sufficient_reasons(&mut m, target, &case.x)
            .map_err(|e| e.to_string())?
            .reasons;
    }
    Ok(out)
}

fn criterion_4(corpus: &Corpus) -> Check {
    let start = Instant::now();
    let mut mismatches = 0;
    let mut first = None;
    for (i, case) in corpus.cases.iter().enumerate() {
        let n = case.universe.len();
        let cf = ConstrainedFn::new(case.universe.clone(), case.f.clone(), case.kappa.clone()).unwrap();
        let mut m = Manager::new(n);
        let target = m.compile(&cf.build_target(Mode::Implies)).unwrap();
        let got = sufficient_reasons(&mut m, target, &case.x)
            .map_err(|e| e.to_string())?
            .reasons;
        let tf = table_of(&case.f, n).unwrap();
        let tk = table_of(&case.kappa, n).unwrap();
        let want = brute_reasons_partial(&tf, &tk, &case.x).unwrap();
        if got != want {
            mismatches += 1;
            first.get_or_insert(i);
        }
    }
    ensure(mismatches == 0, || {
        format!("{mismatches} mismatches, first at case {first:?}")
    })?;
    let took = within(start, Duration::from_secs(300))?;
    Ok(format!(
        "{}/{} agree with the partial-function oracle ({} random, 4-12 vars, {took:?})",
        corpus.cases.len(),
        corpus.cases.len(),
        corpus.random
    ))
}

fn covered(lower: &[Term], upper: &[Term]) -> usize {
    lower.iter().filter(|t| !upper.iter().any(|s| subsumes(s, t))).count()
}

fn criterion_5(sets: &[[Vec<Term>; 3]]) -> Check {
    let mut violations = 0;
    let mut links = 0;
    for [ignore, implies, conjoin] in sets {
        violations += covered(conjoin, ignore) + covered(ignore, implies);
        links += conjoin.len() + ignore.len();
    }
    ensure(violations == 0, || format!("{violations} uncovered reasons"))?;
    Ok(format!(
        "{links} subsumption links over {} cases, 0 violations",
        sets.len()
    ))
}

fn criterion_6(sets: &[[Vec<Term>; 3]]) -> Check {
    let min = |v: &Vec<Term>| v.iter().map(Term::len).min().unwrap_or(usize::MAX);
    let mut strict = 0;
    for (i, [ignore, implies, conjoin]) in sets.iter().enumerate() {
        let (a, b, c) = (min(implies), min(ignore), min(conjoin));
        ensure(a <= b && b <= c, || {
            format!("case {i}: implies {a}, ignore {b}, conjoin {c}")
        })?;
        if a < b || b < c {
            strict += 1;
        }
    }
    ensure(strict > 0, || "no strict case".into())?;
    Ok(format!("monotone on {} cases, strict on {strict}", sets.len()))
}

fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn criterion_7() -> Check {
    let u = ttt_universe();
    let mut m = Manager::new(u.len());
    let cell = m
        .compile(&ttt_cell_constraint(&u).unwrap())
        .map_err(|e| e.to_string())?;
    let alt = ttt_alternation_node(&mut m, &u).map_err(|e| e.to_string())?;
    let cell_count = m.count_models(cell);
    ensure(cell_count == BigUint::from(19683u32), || {
        format!("cell constraint has {cell_count} models")
    })?;
    ensure(m.implies(alt, cell).unwrap() == NodeRef::ONE, || {
        "alternation escapes cell constraint".into()
    })?;
    // |S| = s X-cells, |T| = t O-cells among the remaining 9 - s, t in {s-1, s}
    let expected: u64 = (0..=9u64)
        .map(|s| {
            let one_less = if s >= 1 { binomial(9 - s, s - 1) } else { 0 };
            binomial(9, s) * (binomial(9 - s, s) + one_less)
        })
        .sum();
    let alt_count = m.count_models(alt);
    ensure(alt_count == BigUint::from(expected), || {
        format!("alternation has {alt_count}, expected {expected}")
    })?;
    Ok(format!(
        "cell 19683 models, alternation {alt_count} = enumeration {expected}, alternation within cell"
    ))
}

fn criterion_8() -> Check {
    let mut c = fixtures::ttt_spec(vec![ConstraintSource::TttCell])
        .build()
        .map_err(|e| e.to_string())?;
    let mut c2 = fixtures::ttt_spec(vec![ConstraintSource::TttCell, ConstraintSource::TttAlternation])
        .build()
        .map_err(|e| e.to_string())?;
    let opts = ExplainOptions::default();
    let x = c.parse_instance(fixtures::TTT_DEMO_INSTANCE).unwrap();
    let under_c = c.explain(&x, &opts).map_err(|e| e.to_string())?.reasons.reasons;
    let under_c2 = c2.explain(&x, &opts).map_err(|e| e.to_string())?.reasons.reasons;
    let novel = under_c2
        .iter()
        .filter(|t| !under_c.iter().any(|s| subsumes(s, t)))
        .count();
    ensure(novel > 0, || "every C' reason is subsumed by a C reason".into())?;
    Ok(format!(
        "stand-in model: {} reasons under C, {} under C', {novel} of them new",
        under_c.len(),
        under_c2.len()
    ))
}

/// Semantics-preserving rewrite used to produce equivalent formula pairs.
fn rewrite(rng: &mut ChaCha8Rng, f: &Formula) -> Formula {
    let r = |rng: &mut ChaCha8Rng, g: &Formula| rewrite(rng, g);
    match f {
        Formula::Const(_) | Formula::Var(_) => {
            if rng.gen_ratio(1, 4) {
                f.clone().not().not()
            } else {
                f.clone()
            }
        }
        Formula::Not(a) => match a.as_ref() {
            Formula::And(x, y) if rng.gen() => r(rng, x).not().or(r(rng, y).not()),
            Formula::Or(x, y) if rng.gen() => r(rng, x).not().and(r(rng, y).not()),
            _ => r(rng, a).not(),
        },
        Formula::And(a, b) => {
            if rng.gen() {
                r(rng, b).and(r(rng, a))
            } else {
                r(rng, a).not().or(r(rng, b).not()).not()
            }
        }
        Formula::Or(a, b) => {
            if rng.gen() {
                r(rng, b).or(r(rng, a))
            } else {
                r(rng, a).not().implies(r(rng, b))
            }
        }
        Formula::Implies(a, b) => {
            if rng.gen() {
                r(rng, a).not().or(r(rng, b))
            } else {
                r(rng, b).not().implies(r(rng, a).not())
            }
        }
        Formula::Iff(a, b) => {
            if rng.gen() {
                r(rng, b).iff(r(rng, a))
            } else {
                r(rng, a).implies(r(rng, b)).and(r(rng, b).implies(r(rng, a)))
            }
        }
    }
}

fn criterion_9() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut equal_pairs, mut distinct_pairs) = (0, 0);
    for i in 0..1000 {
        let n = rng.gen_range(1..=8);
        let size = rng.gen_range(1..=3 * n);
        let f = reasonkit::random::random_formula(&mut rng, n, size);
        let g = if i % 2 == 0 {
            rewrite(&mut rng, &f)
        } else {
            let size = rng.gen_range(1..=3 * n);
            reasonkit::random::random_formula(&mut rng, n, size)
        };
        let mut m = Manager::new(n);
        let (a, b) = (m.compile(&f).unwrap(), m.compile(&g).unwrap());
        let same_table = table_of(&f, n).unwrap() == table_of(&g, n).unwrap();
        ensure(same_table == (a == b), || format!("formula {i}: canonicity broken"))?;
        if same_table {
            equal_pairs += 1;
        } else {
            distinct_pairs += 1;
        }
        for v in 0..n {
            let hi = m.cofactor(a, v, true).unwrap();
            let lo = m.cofactor(a, v, false).unwrap();
            ensure(m.ite_var(v, hi, lo).unwrap() == a, || {
                format!("formula {i}: Shannon fails on var {v}")
            })?;
        }
        let na = m.negate(a).unwrap();
        let total = m.count_models(a) + m.count_models(na);
        ensure(total == BigUint::from(1u32) << n, || {
            format!("formula {i}: counts sum to {total}")
        })?;
    }
    let took = within(start, Duration::from_secs(30))?;
    Ok(format!(
        "1000 formulas: canonicity ({equal_pairs} equivalent, {distinct_pairs} distinct pairs), Shannon, complement ({took:?})"
    ))
}

fn main() -> ExitCode {
    let corpus = corpus();
    let sets: Result<Vec<[Vec<Term>; 3]>, String> = corpus.cases.iter().map(mode_reasons).collect();
    let results: Vec<(&str, Check)> = vec![
        ("1 toy example reasons", criterion_1()),
        ("2 shortlisting table", criterion_2()),
        ("3 constraint equivalence", criterion_3()),
        ("4 oracle equivalence", criterion_4(&corpus)),
        ("5 subsumption chain", sets.clone().and_then(|s| criterion_5(&s))),
        ("6 shortest-reason monotonicity", sets.and_then(|s| criterion_6(&s))),
        ("7 tic-tac-toe constraints", criterion_7()),
        ("8 stand-in C' novelty (substitute check)", criterion_8()),
        ("9 BDD engine properties", criterion_9()),
    ];
    let mut failed = 0;
    for (name, result) in &results {
        match result {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {name}: {detail}");
            }
        }
    }
    println!(
        "acceptance: {}/{} criteria passed",
        results.len() - failed,
        results.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
