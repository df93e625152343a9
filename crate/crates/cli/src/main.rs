//! `reasonkit`: explain decisions of constrained Boolean classifiers.

mod load;
mod selftest;

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use reasonkit::obdd::{BddError, DEFAULT_NODE_BUDGET};
use reasonkit::pipeline::{instance_lines, ExplainError, ExplainOptions, Problem, ProblemSpec};
use reasonkit::reasons::{FilterPolicy, TermStatus};
use reasonkit::report::{CompareReport, ExplainReport, Outcome, ResultEntry};
use reasonkit::Mode;

/// Process exit codes. Batches exit with the largest code seen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Code {
    Ok = 0,
    Io = 1,
    OutOfConstraint = 2,
    Negative = 3,
    Parse = 4,
    NodeBudget = 5,
}

#[derive(Debug)]
pub struct Failure {
    pub code: Code,
    pub message: String,
}

impl Failure {
    pub fn new(code: Code, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "reasonkit",
    version,
    about = "Sufficient reasons for constrained Boolean classifiers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate the sufficient reasons of one or more instances.
    Explain(ExplainArgs),
    /// Reasons under all three modes, with subsumption witnesses.
    Compare(CompareArgs),
    /// Run the bundled reproduction checks and random oracle cross-checks.
    Selftest(selftest::SelftestArgs),
}

#[derive(Args)]
struct ProblemArgs {
    /// Decision function: a decision tree (`.tree`, `.json`) or a formula file.
    #[arg(long)]
    model: PathBuf,
    /// Constraint file (formula, or `.groups` for one-hot groups), or
    /// `builtin:ttt-cell` / `builtin:ttt-alternation`. Repeatable; conjoined.
    #[arg(long = "constraints", value_name = "SOURCE")]
    constraints: Vec<String>,
    /// Variable universe, comma separated. Fixes bitstring positions.
    #[arg(long, value_delimiter = ',', value_name = "NAMES")]
    vars: Option<Vec<String>>,
    /// BDD variable order, comma separated (a permutation of the universe).
    #[arg(long, value_delimiter = ',', value_name = "NAMES")]
    order: Option<Vec<String>>,
    #[arg(long, env = "REASONKIT_NODE_BUDGET", default_value_t = DEFAULT_NODE_BUDGET)]
    node_budget: usize,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, value_name = "FILE")]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ExplainArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// `0011`, `LKPA=0011`, or `L=0,K=0,P=1,A=1`.
    #[arg(long, required_unless_present = "instances_file", conflicts_with = "instances_file")]
    instance: Option<String>,
    /// One instance per line; blank lines and `#` comments are skipped.
    #[arg(long, value_name = "FILE")]
    instances_file: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ModeArg::Implies)]
    mode: ModeArg,
    /// Explain negative decisions through the complement of the model.
    #[arg(long)]
    dual: bool,
    #[arg(long, value_enum, default_value_t = FilterArg::None)]
    filter: FilterArg,
    /// Explain out-of-constraint instances anyway (mode ignore only).
    #[arg(long)]
    force: bool,
    /// Worker threads for instance batches, each with its own BDD manager.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
    jobs: u16,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long)]
    instance: String,
    #[arg(long)]
    dual: bool,
    #[arg(long, value_enum, default_value_t = FilterArg::None)]
    filter: FilterArg,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Structured,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Ignore,
    Implies,
    Conjoin,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Ignore => Mode::Ignore,
            ModeArg::Implies => Mode::Implies,
            ModeArg::Conjoin => Mode::Conjoin,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FilterArg {
    None,
    /// One representative per constraint-equivalence class.
    Ceq,
    /// Drop reasons strictly constraint-subsumed by another.
    Csub,
}

impl From<FilterArg> for FilterPolicy {
    fn from(f: FilterArg) -> FilterPolicy {
        match f {
            FilterArg::None => FilterPolicy::None,
            FilterArg::Ceq => FilterPolicy::CeqClasses,
            FilterArg::Csub => FilterPolicy::CsubMaximal,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { Code::Parse as u8 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Explain(args) => explain(args),
        Command::Compare(args) => compare(args),
        Command::Selftest(args) => Ok(selftest::run(&args)),
    };
    let code = result.unwrap_or_else(|f| {
        eprintln!("error: {}", f.message);
        f.code
    });
    ExitCode::from(code as u8)
}

fn spec_of(args: &ProblemArgs) -> Result<ProblemSpec, Failure> {
    let mut spec = ProblemSpec::new(load::model(&args.model)?);
    spec.constraints = args
        .constraints
        .iter()
        .map(|c| load::constraint(c))
        .collect::<Result<_, _>>()?;
    spec.vars = args.vars.clone();
    spec.order = args.order.clone();
    spec.node_budget = args.node_budget;
    Ok(spec)
}

fn build(spec: &ProblemSpec) -> Result<Problem, Failure> {
    let p = spec.build().map_err(load::problem_failure)?;
    if !p.kappa_satisfiable() {
        eprintln!("warning: the constraints are unsatisfiable; every instance is out of constraint");
    }
    Ok(p)
}

fn emit(args: &ProblemArgs, text: &str) -> Result<(), Failure> {
    match &args.output {
        Some(path) => fs::write(path, text).map_err(|e| Failure::new(Code::Io, format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn explain_error(e: &ExplainError) -> (Outcome, Code) {
    match e {
        ExplainError::OutOfConstraint(_) => (Outcome::OutOfConstraint, Code::OutOfConstraint),
        ExplainError::Negative(_) => (Outcome::Negative, Code::Negative),
        ExplainError::Instance(_) => (Outcome::ParseError, Code::Parse),
        ExplainError::Bdd(BddError::NodeBudgetExceeded { .. }) => (Outcome::NodeBudget, Code::NodeBudget),
        ExplainError::Bdd(_) => (Outcome::ParseError, Code::Parse),
    }
}

fn explain_one(p: &mut Problem, text: &str, opts: &ExplainOptions) -> (ResultEntry, Code) {
    let result = p
        .parse_instance(text)
        .map_err(ExplainError::from)
        .and_then(|x| p.explain(&x, opts));
    match result {
        Ok(e) => (ResultEntry::from_explanation(&e, &p.universe), Code::Ok),
        Err(e) => {
            let (outcome, code) = explain_error(&e);
            (
                ResultEntry::failure(text.to_string(), outcome, e.to_string(), opts.mode, opts.filter),
                code,
            )
        }
    }
}

fn explain(args: ExplainArgs) -> Result<Code, Failure> {
    let spec = spec_of(&args.problem)?;
    let mut p = build(&spec)?;
    let opts = ExplainOptions {
        mode: args.mode.into(),
        dual: args.dual,
        filter: args.filter.into(),
        force: args.force,
    };
    let texts: Vec<String> = match (&args.instance, &args.instances_file) {
        (Some(x), _) => vec![x.clone()],
        (None, Some(path)) => instance_lines(&load::read(path)?)
            .into_iter()
            .map(|(_, l)| l.to_string())
            .collect(),
        (None, None) => unreachable!("clap requires one of them"),
    };

    let jobs = usize::from(args.jobs).min(texts.len()).max(1);
    let results: Vec<(ResultEntry, Code)> = if jobs == 1 {
        texts.iter().map(|t| explain_one(&mut p, t, &opts)).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Failure::new(Code::Io, e.to_string()))?;
        let chunk = texts.len().div_ceil(jobs);
        let parts: Vec<Result<Vec<(ResultEntry, Code)>, Failure>> = pool.install(|| {
            texts
                .par_chunks(chunk)
                .map(|part| {
                    let mut p = spec.build().map_err(load::problem_failure)?;
                    Ok(part.iter().map(|t| explain_one(&mut p, t, &opts)).collect())
                })
                .collect()
        });
        let mut all = Vec::with_capacity(texts.len());
        for part in parts {
            all.extend(part?);
        }
        all
    };

    let code = results.iter().map(|r| r.1).max().unwrap_or(Code::Ok);
    let entries: Vec<ResultEntry> = results.into_iter().map(|r| r.0).collect();
    let out = match args.problem.format {
        Format::Structured => ExplainReport::new(&p.universe, entries).to_json() + "\n",
        Format::Text => {
            for e in entries.iter().filter(|e| e.outcome != Outcome::Ok) {
                eprintln!("error: {}: {}", e.instance, e.message.as_deref().unwrap_or(""));
            }
            explain_text(&entries)
        }
    };
    emit(&args.problem, &out)?;
    Ok(code)
}

fn explain_text(entries: &[ResultEntry]) -> String {
    let mut out = String::new();
    for e in entries.iter().filter(|e| e.outcome == Outcome::Ok) {
        let n = e.reasons.len();
        let dual = if e.dual { ", dual" } else { "" };
        let _ = writeln!(
            out,
            "{} [{}{dual}] {n} reason{}",
            e.instance,
            e.mode,
            if n == 1 { "" } else { "s" }
        );
        for r in &e.reasons {
            let _ = writeln!(out, "  {}", r.text);
        }
        for f in &e.filtered {
            let why = match f.status {
                TermStatus::MergedInto(_) => "equivalent to",
                TermStatus::DroppedSubsumed(_) => "subsumed by",
                TermStatus::Kept => continue,
            };
            let _ = writeln!(out, "  - {} ({why} {} under the constraints)", f.reason.text, f.by);
        }
    }
    out
}

fn compare(args: CompareArgs) -> Result<Code, Failure> {
    let spec = spec_of(&args.problem)?;
    let mut p = build(&spec)?;
    let x = p
        .parse_instance(&args.instance)
        .map_err(|e| Failure::new(Code::Parse, e.to_string()))?;
    let filter: FilterPolicy = args.filter.into();
    let c = p
        .compare(&x, args.dual, filter)
        .map_err(|e| Failure::new(explain_error(&e).1, e.to_string()))?;
    let report = CompareReport::new(&c, &p.universe, filter);
    let out = match args.problem.format {
        Format::Structured => report.to_json() + "\n",
        Format::Text => compare_text(&report),
    };
    emit(&args.problem, &out)?;
    Ok(Code::Ok)
}

fn compare_text(r: &CompareReport) -> String {
    let mut out = String::new();
    let dual = if r.dual {
        " (explaining the negative decision)"
    } else {
        ""
    };
    let _ = writeln!(out, "instance {}{dual}", r.instance);
    for m in &r.modes {
        let lengths = match (m.lengths.min, m.lengths.max) {
            (Some(lo), Some(hi)) => format!(", lengths {lo}..{hi}"),
            _ => String::new(),
        };
        let n = m.lengths.count;
        let _ = writeln!(out, "{}: {n} reason{}{lengths}", m.mode, if n == 1 { "" } else { "s" });
        for reason in &m.reasons {
            let _ = writeln!(out, "  {}", reason.text);
        }
    }
    for link in &r.chain {
        let witness = link.witness.as_deref().unwrap_or("NONE");
        let _ = writeln!(
            out,
            "chain {} -> {}: {} subsumed by {witness}",
            link.lower, link.upper, link.reason
        );
    }
    let _ = writeln!(out, "chain holds: {}", if r.chain_holds { "yes" } else { "no" });
    out
}
