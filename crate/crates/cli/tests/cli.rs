use std::io::Write;
use std::process::{Command, Output};

use reasonkit::report::{CompareReport, ExplainReport, Outcome};

const BIN: &str = env!("CARGO_BIN_EXE_reasonkit");

macro_rules! fixture {
    ($name:literal) => {
        concat!(env!("CARGO_MANIFEST_DIR"), "/../core/fixtures/", $name)
    };
}

const SHORTLIST_TREE: &str = fixture!("shortlist.tree");
const SHORTLIST_BOOL: &str = fixture!("shortlist.bool");
const SHORTLIST_C: &str = fixture!("shortlist-constraints.bool");
const TOY_TREE: &str = fixture!("toy.tree");
const TOY_BOOL: &str = fixture!("toy.bool");
const TOY_C: &str = fixture!("toy-constraint.bool");

fn run(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("REASONKIT_NODE_BUDGET")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn shortlist(extra: &[&str]) -> Output {
    let mut args = vec!["explain", "--model", SHORTLIST_TREE, "--constraints", SHORTLIST_C];
    args.extend_from_slice(extra);
    run(&args)
}

fn reason_lines(out: &str) -> Vec<String> {
    out.lines()
        .filter(|l| l.starts_with("  ") && !l.starts_with("  - "))
        .map(|l| l.trim().to_string())
        .collect()
}

#[test]
fn explain_implies_and_ignore() {
    let o = shortlist(&["--instance", "LKPA=0011", "--mode", "implies"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(reason_lines(&stdout(&o)), ["(!L & A)"]);

    let o = shortlist(&["--instance", "LKPA=0011", "--mode", "ignore"]);
    assert_eq!(code(&o), 0);
    assert_eq!(reason_lines(&stdout(&o)), ["(!L & P & A)"]);
}

#[test]
fn default_mode_is_implies() {
    let o = shortlist(&["--instance", "0111"]);
    assert_eq!(reason_lines(&stdout(&o)), ["K", "(!L & A)"]);
}

#[test]
fn out_of_constraint_exits_2() {
    let o = shortlist(&["--instance", "LKPA=0001"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("violates the constraints"));
}

#[test]
fn force_only_applies_to_ignore() {
    // 1101 violates A -> P
    let o = shortlist(&["--instance", "1101", "--mode", "ignore", "--force"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(reason_lines(&stdout(&o)), ["(L & K)"]);
    let o = shortlist(&["--instance", "1101", "--mode", "implies", "--force"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn negative_needs_dual() {
    let o = shortlist(&["--instance", "1010"]);
    assert_eq!(code(&o), 3);
    let o = shortlist(&["--instance", "1010", "--dual", "--mode", "ignore"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("dual"));
    assert_eq!(reason_lines(&stdout(&o)), ["(L & !K)", "(!K & !A)"]);
}

#[test]
fn bad_instance_exits_4() {
    assert_eq!(code(&shortlist(&["--instance", "01"])), 4);
    assert_eq!(code(&shortlist(&["--instance", "ABCD=0011"])), 4);
    assert_eq!(code(&shortlist(&["--instance", "L=0,K=0,P=1"])), 4);
}

#[test]
fn comma_instance_syntax() {
    let o = shortlist(&["--instance", "A=1,P=1,K=0,L=0"]);
    assert_eq!(code(&o), 0);
    assert_eq!(reason_lines(&stdout(&o)), ["(!L & A)"]);
}

#[test]
fn usage_errors_exit_4_and_help_exits_0() {
    assert_eq!(code(&run(&["explain", "--bogus"])), 4);
    assert_eq!(code(&run(&["explain", "--model", TOY_TREE])), 4);
    assert_eq!(
        code(&run(&[
            "explain",
            "--model",
            TOY_TREE,
            "--instance",
            "11",
            "--mode",
            "sideways"
        ])),
        4
    );
    assert_eq!(code(&run(&[])), 4);
    assert_eq!(code(&run(&["--help"])), 0);
    assert_eq!(code(&run(&["explain", "--help"])), 0);
}

#[test]
fn missing_file_exits_1() {
    let o = run(&["explain", "--model", "/no/such/model.bool", "--instance", "1"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn malformed_model_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.bool");
    std::fs::write(&bad, "a & (b |").unwrap();
    let o = run(&["explain", "--model", bad.to_str().unwrap(), "--instance", "11"]);
    assert_eq!(code(&o), 4);
    assert!(stderr(&o).contains("1:9"), "{}", stderr(&o));

    let tree = dir.path().join("bad.tree");
    std::fs::write(&tree, r#"{"root": {"leaf": {"class": 2}}}"#).unwrap();
    assert_eq!(
        code(&run(&["explain", "--model", tree.to_str().unwrap(), "--instance", ""])),
        4
    );
}

#[test]
fn node_budget_exits_5() {
    let o = shortlist(&["--instance", "0011", "--node-budget", "4"]);
    assert_eq!(code(&o), 5);
    let o = Command::new(BIN)
        .args(["explain", "--model", SHORTLIST_TREE, "--instance", "0011"])
        .env("REASONKIT_NODE_BUDGET", "4")
        .output()
        .unwrap();
    assert_eq!(code(&o), 5);
    // the flag wins over the environment
    let o = Command::new(BIN)
        .args([
            "explain",
            "--model",
            SHORTLIST_TREE,
            "--instance",
            "0011",
            "--node-budget",
            "1000",
        ])
        .env("REASONKIT_NODE_BUDGET", "4")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
}

fn instances_file(lines: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(lines.as_bytes()).unwrap();
    f
}

#[test]
fn batch_takes_the_largest_exit_code() {
    let f = instances_file("# shortlist rows\n0011\n0111\n\n1100\n1010  # negative\n0001\n");
    let path = f.path().to_str().unwrap();
    let o = shortlist(&["--instances-file", path, "--format", "structured"]);
    assert_eq!(code(&o), 3);
    let report = ExplainReport::parse(&stdout(&o)).unwrap();
    let outcomes: Vec<Outcome> = report.results.iter().map(|r| r.outcome).collect();
    assert_eq!(
        outcomes,
        [
            Outcome::Ok,
            Outcome::Ok,
            Outcome::Ok,
            Outcome::Negative,
            Outcome::OutOfConstraint
        ]
    );

    let f = instances_file("0011\nnot-an-instance\n");
    let o = shortlist(&["--instances-file", f.path().to_str().unwrap(), "--format", "structured"]);
    assert_eq!(code(&o), 4);
    let report = ExplainReport::parse(&stdout(&o)).unwrap();
    assert_eq!(report.results[1].outcome, Outcome::ParseError);
    assert_eq!(report.results[1].instance, "not-an-instance");
}

#[test]
fn jobs_do_not_change_results() {
    let all: String = (0..16).map(|i| format!("{i:04b}\n")).collect();
    let f = instances_file(&all);
    let path = f.path().to_str().unwrap();
    let one = shortlist(&["--instances-file", path, "--format", "structured", "--dual"]);
    let four = shortlist(&[
        "--instances-file",
        path,
        "--format",
        "structured",
        "--dual",
        "--jobs",
        "4",
    ]);
    assert_eq!(code(&one), 2);
    assert_eq!(code(&four), 2);
    assert_eq!(stdout(&one), stdout(&four));
    assert_eq!(ExplainReport::parse(&stdout(&one)).unwrap().results.len(), 16);
}

#[test]
fn structured_report_round_trips() {
    let o = shortlist(&["--instance", "1111", "--format", "structured", "--mode", "ignore"]);
    let text = stdout(&o);
    let report = ExplainReport::parse(&text).unwrap();
    assert_eq!(report.vars, ["L", "K", "P", "A"]);
    let r = &report.results[0];
    assert_eq!(r.mode, reasonkit::Mode::Ignore);
    let texts: Vec<&str> = r.reasons.iter().map(|e| e.text.as_str()).collect();
    assert_eq!(texts, ["(L & K)", "(K & P)"]);
    assert_eq!((r.lengths.min, r.lengths.max), (Some(2), Some(2)));
    assert_eq!(report.to_json() + "\n", text);
}

#[test]
fn output_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let o = shortlist(&[
        "--instance",
        "0011",
        "--format",
        "structured",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).is_empty());
    ExplainReport::parse(&std::fs::read_to_string(out).unwrap()).unwrap();
}

#[test]
fn formula_model_infers_universe() {
    let o = run(&[
        "explain",
        "--model",
        SHORTLIST_BOOL,
        "--constraints",
        SHORTLIST_C,
        "--instance",
        "LKPA=0011",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(reason_lines(&stdout(&o)), ["(!L & A)"]);
}

#[test]
fn vars_flag_reorders_bitstrings() {
    let o = shortlist(&["--vars", "A,P,K,L", "--instance", "1100"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(reason_lines(&stdout(&o)), ["(A & !L)"]);
    assert_eq!(code(&shortlist(&["--vars", "A,P,K,L", "--instance", "LKPA=0011"])), 4);
}

#[test]
fn order_flag_keeps_reasons() {
    let o = shortlist(&["--order", "A,P,K,L", "--instance", "0111"]);
    assert_eq!(reason_lines(&stdout(&o)), ["K", "(!L & A)"]);
    assert_eq!(code(&shortlist(&["--order", "A,P", "--instance", "0111"])), 4);
}

#[test]
fn filters_merge_equivalent_reasons() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("m.bool");
    let kappa = dir.path().join("k.bool");
    std::fs::write(&model, "X2 | !X1").unwrap();
    std::fs::write(&kappa, "(X1 | X2) & !(X1 & X2)").unwrap();
    let args = |filter: &'static str| {
        run(&[
            "explain",
            "--model",
            model.to_str().unwrap(),
            "--vars",
            "X1,X2",
            "--constraints",
            kappa.to_str().unwrap(),
            "--instance",
            "01",
            "--mode",
            "ignore",
            "--filter",
            filter,
        ])
    };
    let none = args("none");
    assert_eq!(reason_lines(&stdout(&none)), ["X2", "!X1"]);
    let ceq = args("ceq");
    assert_eq!(reason_lines(&stdout(&ceq)), ["X2"]);
    assert!(stdout(&ceq).contains("- !X1 (equivalent to X2"));
}

#[test]
fn groups_constraint() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("m.bool");
    std::fs::write(&model, "A3 | (A2 & M1)").unwrap();
    let vars = "A1,A2,A3,M1,M2,M3";
    let groups = fixture!("crash-demo.groups");
    let o = run(&[
        "explain",
        "--model",
        model.to_str().unwrap(),
        "--vars",
        vars,
        "--constraints",
        groups,
        "--instance",
        "010100",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    // within a group, !A1 pins the age to A2 or A3, either of which suffices with M1
    assert_eq!(
        reason_lines(&stdout(&o)),
        ["(A2 & M1)", "(!A1 & M1)", "(A2 & !M2 & !M3)", "(!A1 & !M2 & !M3)"]
    );
    let o = run(&[
        "explain",
        "--model",
        model.to_str().unwrap(),
        "--vars",
        vars,
        "--constraints",
        groups,
        "--instance",
        "010100",
        "--mode",
        "ignore",
    ]);
    assert_eq!(reason_lines(&stdout(&o)), ["(A2 & M1)"]);
    let o = run(&[
        "explain",
        "--model",
        model.to_str().unwrap(),
        "--vars",
        vars,
        "--constraints",
        groups,
        "--instance",
        "001100",
    ]);
    assert_eq!(
        reason_lines(&stdout(&o)),
        ["A3", "(!A1 & M1)", "(!A1 & !A2)", "(!A1 & !M2 & !M3)"]
    );
    let o = run(&[
        "explain",
        "--model",
        model.to_str().unwrap(),
        "--vars",
        vars,
        "--constraints",
        groups,
        "--instance",
        "011100",
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn unsatisfiable_constraints_warn() {
    let dir = tempfile::tempdir().unwrap();
    let kappa = dir.path().join("k.bool");
    std::fs::write(&kappa, "X1 & !X1").unwrap();
    let o = run(&[
        "explain",
        "--model",
        TOY_TREE,
        "--constraints",
        kappa.to_str().unwrap(),
        "--instance",
        "11",
    ]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("warning: the constraints are unsatisfiable"));
}

#[test]
fn compare_toy_example() {
    let o = run(&[
        "compare",
        "--model",
        TOY_TREE,
        "--constraints",
        TOY_C,
        "--instance",
        "11",
        "--format",
        "structured",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = CompareReport::parse(&stdout(&o)).unwrap();
    let texts = |i: usize| r.modes[i].reasons.iter().map(|e| e.text.clone()).collect::<Vec<_>>();
    assert_eq!(texts(0), ["(X1 & X2)"]);
    assert_eq!(texts(1), ["X1"]);
    assert_eq!(texts(2), ["(X1 & X2)"]);
    assert!(r.chain_holds);
    assert!(r
        .chain
        .iter()
        .any(|c| c.reason == "(X1 & X2)" && c.witness.as_deref() == Some("X1")));
}

#[test]
fn compare_without_constraints_is_flat() {
    let o = run(&["compare", "--model", TOY_BOOL, "--instance", "00"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert_eq!(reason_lines(&out), ["(!X1 & !X2)"; 3]);
}

#[test]
fn compare_shortlist_row() {
    let o = run(&[
        "compare",
        "--model",
        SHORTLIST_TREE,
        "--constraints",
        SHORTLIST_C,
        "--instance",
        "1111",
    ]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(
        out.contains("ignore: 2 reasons, lengths 2..2\n  (L & K)\n  (K & P)\n"),
        "{out}"
    );
    assert!(out.contains("implies: 1 reason, lengths 1..1\n  K\n"), "{out}");
    assert!(out.contains("chain holds: yes"));
    assert_eq!(
        code(&run(&[
            "compare",
            "--model",
            SHORTLIST_TREE,
            "--constraints",
            SHORTLIST_C,
            "--instance",
            "0001"
        ])),
        2
    );
}

#[test]
fn ttt_standin_under_builtins() {
    let tree = fixture!("ttt-standin.tree");
    let x = "101010000000010001";
    let c = run(&[
        "explain",
        "--model",
        tree,
        "--constraints",
        "builtin:ttt-cell",
        "--instance",
        x,
    ]);
    let c2 = run(&[
        "explain",
        "--model",
        tree,
        "--constraints",
        "builtin:ttt-cell",
        "--constraints",
        "builtin:ttt-alternation",
        "--instance",
        x,
    ]);
    assert_eq!(code(&c), 0, "{}", stderr(&c));
    assert_eq!(code(&c2), 0, "{}", stderr(&c2));
    assert!(reason_lines(&stdout(&c2)).len() > reason_lines(&stdout(&c)).len());
    assert_eq!(
        code(&run(&[
            "explain",
            "--model",
            tree,
            "--constraints",
            "builtin:nope",
            "--instance",
            x
        ])),
        4
    );
}

#[test]
fn selftest_reports() {
    let o = run(&["selftest", "--cases", "0"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(out.contains("tables: 5/5 rows matched"), "{out}");
    assert!(out.contains("oracle: skipped"));

    let o = run(&["selftest", "--seed", "7", "--cases", "100", "--max-vars", "10"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("oracle agreement 100/100"), "{}", stdout(&o));
    assert_eq!(code(&run(&["selftest", "--max-vars", "40"])), 4);
}
