//! The `selftest` subcommand: bundled reproduction checks plus random
//! cross-checks against the brute-force oracle.

use std::collections::BTreeSet;

use clap::Args;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use reasonkit::constrained::{ConstrainedFn, Mode};
use reasonkit::fixtures;
use reasonkit::formula::{parse, parse_infer};
use reasonkit::obdd::{Manager, NodeRef};
use reasonkit::oracle::{brute_reasons_partial, table_of, MAX_ORACLE_VARS};
use reasonkit::pipeline::{ExplainError, ExplainOptions, Problem};
use reasonkit::random::random_case;
use reasonkit::reasons::{constraint_equivalent, subsumes, sufficient_reasons, Term};

use crate::Code;

#[derive(Args)]
pub struct SelftestArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Random oracle cases; 0 runs the bundled tables only.
    #[arg(long, default_value_t = 200)]
    cases: usize,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u8).range(2..=MAX_ORACLE_VARS as i64))]
    max_vars: u8,
}

type Rendered = BTreeSet<String>;

fn set(items: &[&str]) -> Rendered {
    items.iter().map(|s| s.to_string()).collect()
}

fn explain_set(p: &mut Problem, bits: &str, mode: Mode) -> Result<Rendered, ExplainError> {
    let x = p.parse_instance(bits)?;
    let opts = ExplainOptions {
        mode,
        ..Default::default()
    };
    let e = p.explain(&x, &opts)?;
    Ok(e.reasons.render(&p.universe).into_iter().collect())
}

struct Tally {
    passed: usize,
    total: usize,
}

impl Tally {
    fn new() -> Self {
        Tally { passed: 0, total: 0 }
    }

    fn check(&mut self, what: &str, ok: bool, detail: impl FnOnce() -> String) {
        self.total += 1;
        if ok {
            self.passed += 1;
        } else {
            println!("  mismatch: {what}: {}", detail());
        }
    }

    fn all(&self) -> bool {
        self.passed == self.total
    }
}

fn examples() -> Tally {
    let mut t = Tally::new();
    let mut toy = fixtures::toy_spec().build().expect("bundled toy builds");
    for (bits, mode, want) in [
        ("00", Mode::Ignore, "(!X1 & !X2)"),
        ("11", Mode::Ignore, "(X1 & X2)"),
        ("00", Mode::Implies, "!X2"),
        ("11", Mode::Implies, "X1"),
    ] {
        let got = explain_set(&mut toy, bits, mode);
        t.check(&format!("toy {bits} {mode}"), got.as_ref() == Ok(&set(&[want])), || {
            format!("{got:?}")
        });
    }

    let x = toy.parse_instance("11").unwrap();
    match toy.compare(&x, false, Default::default()) {
        Ok(c) => {
            let conjoin: Rendered = c.for_mode(Mode::Conjoin).render(&toy.universe).into_iter().collect();
            t.check("toy 11 conjoin", conjoin == set(&["(X1 & X2)"]), || {
                format!("{conjoin:?}")
            });
            let x1 = Term::from_pairs(&[(0, true)]);
            let both = Term::from_pairs(&[(0, true), (1, true)]);
            t.check(
                "X1 subsumes X1 & X2",
                subsumes(&x1, &both) && c.chain_holds(),
                String::new,
            );
        }
        Err(e) => t.check("toy 11 compare", false, || e.to_string()),
    }

    let (u, _) = parse_infer("X1 | X2").unwrap();
    let mut m = Manager::new(2);
    let xor = m.compile(&parse("(X1 | X2) & !(X1 & X2)", &u).unwrap()).unwrap();
    let not_x1 = Term::from_pairs(&[(0, false)]);
    let x2 = Term::from_pairs(&[(1, true)]);
    t.check(
        "!X1 ~ X2 under exactly-one",
        constraint_equivalent(&mut m, &not_x1, &x2, xor) == Ok(true),
        String::new,
    );
    t.check(
        "!X1 ~ X2 fails under true",
        constraint_equivalent(&mut m, &not_x1, &x2, NodeRef::ONE) == Ok(false),
        String::new,
    );

    let mut shortlist = fixtures::shortlist_spec().build().expect("bundled shortlist builds");
    let got = explain_set(&mut shortlist, "0001", Mode::Implies);
    t.check(
        "0001 violates the constraints",
        matches!(got, Err(ExplainError::OutOfConstraint(_))),
        || format!("{got:?}"),
    );
    t
}

fn tables() -> Tally {
    let mut t = Tally::new();
    let mut p = fixtures::shortlist_spec().build().expect("bundled shortlist builds");
    let rows: [(&str, &[&str], &[&str]); 5] = [
        ("0011", &["(!L & P & A)"], &["(!L & A)"]),
        ("0111", &["(!L & P & A)", "(K & P)"], &["(!L & A)", "K"]),
        ("1100", &["(L & K)"], &["K"]),
        ("1110", &["(L & K)", "(K & P)"], &["K"]),
        ("1111", &["(L & K)", "(K & P)"], &["K"]),
    ];
    for (bits, ignore, implies) in rows {
        let got_ignore = explain_set(&mut p, bits, Mode::Ignore);
        let got_implies = explain_set(&mut p, bits, Mode::Implies);
        let ok = got_ignore.as_ref() == Ok(&set(ignore)) && got_implies.as_ref() == Ok(&set(implies));
        t.check(&format!("row {bits}"), ok, || {
            format!("ignore {got_ignore:?}, implies {got_implies:?}")
        });
    }
    t
}

fn oracle(args: &SelftestArgs) -> Tally {
    let mut t = Tally::new();
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let max = usize::from(args.max_vars);
    for i in 0..args.cases {
        let n = rng.gen_range(max.min(4)..=max);
        let case = random_case(&mut rng, n);
        let cf = ConstrainedFn::new(case.universe.clone(), case.f.clone(), case.kappa.clone())
            .expect("generated formulas fit their universe");
        let mut m = Manager::new(n);
        let got = m
            .compile(&cf.build_target(Mode::Implies))
            .map_err(|e| e.to_string())
            .and_then(|target| sufficient_reasons(&mut m, target, &case.x).map_err(|e| e.to_string()))
            .map(|rs| rs.reasons);
        let want = brute_reasons_partial(
            &table_of(&case.f, n).unwrap(),
            &table_of(&case.kappa, n).unwrap(),
            &case.x,
        )
        .unwrap();
        t.check(&format!("case {i}"), got.as_ref() == Ok(&want), || {
            format!(
                "f = {}, C = {}, x = {}",
                case.f.render(&case.universe),
                case.kappa.render(&case.universe),
                case.x.bitstring()
            )
        });
    }
    t
}

pub fn run(args: &SelftestArgs) -> Code {
    let ex = examples();
    println!("examples: {}/{} checks matched", ex.passed, ex.total);
    let tb = tables();
    println!("tables: {}/{} rows matched", tb.passed, tb.total);
    let mut ok = ex.all() && tb.all();
    if args.cases == 0 {
        println!("oracle: skipped");
    } else {
        let or = oracle(args);
        println!(
            "oracle agreement {}/{} (seed {}, up to {} vars)",
            or.passed, or.total, args.seed, args.max_vars
        );
        ok &= or.all();
    }
    if ok {
        Code::Ok
    } else {
        Code::Io
    }
}
