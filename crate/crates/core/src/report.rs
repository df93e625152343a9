//! Machine-readable output documents (`--format structured`).
//!
//! Field names are stable. [`ExplainReport::parse`] and
//! [`CompareReport::parse`] validate a document against the schema,
//! including internal consistency (literal counts match `length`, length
//! statistics match the reasons).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constrained::{InstanceClass, Mode};
use crate::formula::{valid_identifier, VarUniverse};
use crate::pipeline::{Comparison, Explanation};
use crate::reasons::{FilterPolicy, ReasonSet, Term, TermStatus};

pub const EXPLAIN_SCHEMA: &str = "reasonkit.explain/1";
pub const COMPARE_SCHEMA: &str = "reasonkit.compare/1";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReportError {
    #[error("invalid JSON: {0}")]
    Json(String),
    #[error("unsupported schema {0:?}")]
    Schema(String),
    #[error("inconsistent document: {0}")]
    Inconsistent(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LiteralEntry {
    pub var: String,
    pub value: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReasonEntry {
    pub text: String,
    pub literals: Vec<LiteralEntry>,
    pub length: usize,
}

impl ReasonEntry {
    pub fn from_term(t: &Term, universe: &VarUniverse) -> Self {
        ReasonEntry {
            text: t.render(universe),
            literals: t
                .literals()
                .iter()
                .map(|l| LiteralEntry {
                    var: universe.name(l.var).to_string(),
                    value: u8::from(l.value),
                })
                .collect(),
            length: t.len(),
        }
    }

    fn validate(&self) -> Result<(), ReportError> {
        if self.length != self.literals.len() {
            return Err(ReportError::Inconsistent(format!(
                "reason {:?} has length {} but {} literals",
                self.text,
                self.length,
                self.literals.len()
            )));
        }
        for l in &self.literals {
            if l.value > 1 || !valid_identifier(&l.var) {
                return Err(ReportError::Inconsistent(format!("bad literal {}={}", l.var, l.value)));
            }
        }
        let mut vars: Vec<&str> = self.literals.iter().map(|l| l.var.as_str()).collect();
        vars.sort_unstable();
        if vars.windows(2).any(|w| w[0] == w[1]) {
            return Err(ReportError::Inconsistent(format!(
                "reason {:?} repeats a variable",
                self.text
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LengthStats {
    pub count: usize,
    pub min: Option<usize>,
    pub max: Option<usize>,
}

impl LengthStats {
    pub fn of(reasons: &[ReasonEntry]) -> Self {
        LengthStats {
            count: reasons.len(),
            min: reasons.iter().map(|r| r.length).min(),
            max: reasons.iter().map(|r| r.length).max(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilteredEntry {
    pub reason: ReasonEntry,
    pub status: TermStatus,
    /// The reason the status points at.
    pub by: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Ok,
    OutOfConstraint,
    Negative,
    ParseError,
    NodeBudget,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResultEntry {
    pub instance: String,
    pub outcome: Outcome,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    pub mode: Mode,
    pub dual: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<InstanceClass>,
    pub filter_policy: FilterPolicy,
    pub reasons: Vec<ReasonEntry>,
    pub lengths: LengthStats,
    /// Enumerated reasons removed by the filter policy.
    #[serde(default)]
    pub filtered: Vec<FilteredEntry>,
}

impl ResultEntry {
    pub fn from_explanation(e: &Explanation, universe: &VarUniverse) -> Self {
        let reasons: Vec<ReasonEntry> = e
            .reasons
            .reasons
            .iter()
            .map(|t| ReasonEntry::from_term(t, universe))
            .collect();
        ResultEntry {
            instance: e.instance.bitstring(),
            outcome: Outcome::Ok,
            message: None,
            mode: e.mode,
            dual: e.dual,
            class: Some(e.class),
            filter_policy: e.reasons.policy,
            lengths: LengthStats::of(&reasons),
            reasons,
            filtered: filtered_entries(&e.reasons, universe),
        }
    }

    /// An entry for an instance that could not be explained.
    pub fn failure(instance: String, outcome: Outcome, message: String, mode: Mode, filter: FilterPolicy) -> Self {
        ResultEntry {
            instance,
            outcome,
            message: Some(message),
            mode,
            dual: false,
            class: None,
            filter_policy: filter,
            reasons: Vec::new(),
            lengths: LengthStats::of(&[]),
            filtered: Vec::new(),
        }
    }

    fn validate(&self) -> Result<(), ReportError> {
        for r in self.reasons.iter().chain(self.filtered.iter().map(|f| &f.reason)) {
            r.validate()?;
        }
        if self.lengths != LengthStats::of(&self.reasons) {
            return Err(ReportError::Inconsistent(format!(
                "length statistics of {} do not match its reasons",
                self.instance
            )));
        }
        if self.outcome != Outcome::Ok && !self.reasons.is_empty() {
            return Err(ReportError::Inconsistent(format!(
                "failed result {} lists reasons",
                self.instance
            )));
        }
        if self.filtered.iter().any(|f| f.status == TermStatus::Kept) {
            return Err(ReportError::Inconsistent("filtered entry marked kept".into()));
        }
        Ok(())
    }
}

fn filtered_entries(rs: &ReasonSet, universe: &VarUniverse) -> Vec<FilteredEntry> {
    rs.trace
        .iter()
        .filter(|(_, s)| *s != TermStatus::Kept)
        .map(|(t, s)| {
            let by = match s {
                TermStatus::MergedInto(i) | TermStatus::DroppedSubsumed(i) => rs.trace[*i].0.render(universe),
                TermStatus::Kept => unreachable!(),
            };
            FilteredEntry {
                reason: ReasonEntry::from_term(t, universe),
                status: *s,
                by,
            }
        })
        .collect()
}

fn check_vars(vars: &[String]) -> Result<(), ReportError> {
    VarUniverse::new(vars.iter().cloned())
        .map(|_| ())
        .map_err(|e| ReportError::Inconsistent(e.to_string()))
}

fn check_instance(bits: &str, n: usize) -> Result<(), ReportError> {
    if bits.len() != n || !bits.bytes().all(|b| b == b'0' || b == b'1') {
        return Err(ReportError::Inconsistent(format!(
            "instance {bits:?} is not a {n}-bit string"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplainReport {
    pub schema: String,
    pub vars: Vec<String>,
    pub results: Vec<ResultEntry>,
}

impl ExplainReport {
    pub fn new(universe: &VarUniverse, results: Vec<ResultEntry>) -> Self {
        ExplainReport {
            schema: EXPLAIN_SCHEMA.to_string(),
            vars: universe.names().to_vec(),
            results,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn parse(text: &str) -> Result<Self, ReportError> {
        let report: ExplainReport = serde_json::from_str(text).map_err(|e| ReportError::Json(e.to_string()))?;
        if report.schema != EXPLAIN_SCHEMA {
            return Err(ReportError::Schema(report.schema));
        }
        check_vars(&report.vars)?;
        for r in &report.results {
            // unparsable instances are echoed verbatim
            if r.outcome != Outcome::ParseError {
                check_instance(&r.instance, report.vars.len())?;
            }
            r.validate()?;
        }
        Ok(report)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeEntry {
    pub mode: Mode,
    pub reasons: Vec<ReasonEntry>,
    pub lengths: LengthStats,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainEntry {
    pub lower: Mode,
    pub upper: Mode,
    pub reason: String,
    pub witness: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareReport {
    pub schema: String,
    pub vars: Vec<String>,
    pub instance: String,
    pub dual: bool,
    pub filter_policy: FilterPolicy,
    pub modes: Vec<ModeEntry>,
    pub chain: Vec<ChainEntry>,
    pub chain_holds: bool,
}

impl CompareReport {
    pub fn new(c: &Comparison, universe: &VarUniverse, filter: FilterPolicy) -> Self {
        let modes = c
            .per_mode
            .iter()
            .zip(Mode::ALL)
            .map(|(rs, mode)| {
                let reasons: Vec<ReasonEntry> =
                    rs.reasons.iter().map(|t| ReasonEntry::from_term(t, universe)).collect();
                ModeEntry {
                    mode,
                    lengths: LengthStats::of(&reasons),
                    reasons,
                }
            })
            .collect();
        let chain = c
            .chain
            .iter()
            .map(|l| ChainEntry {
                lower: l.lower,
                upper: l.upper,
                reason: l.term.render(universe),
                witness: l.witness.as_ref().map(|w| w.render(universe)),
            })
            .collect();
        CompareReport {
            schema: COMPARE_SCHEMA.to_string(),
            vars: universe.names().to_vec(),
            instance: c.instance.bitstring(),
            dual: c.dual,
            filter_policy: filter,
            modes,
            chain,
            chain_holds: c.chain_holds(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn parse(text: &str) -> Result<Self, ReportError> {
        let report: CompareReport = serde_json::from_str(text).map_err(|e| ReportError::Json(e.to_string()))?;
        if report.schema != COMPARE_SCHEMA {
            return Err(ReportError::Schema(report.schema));
        }
        check_vars(&report.vars)?;
        check_instance(&report.instance, report.vars.len())?;
        for m in &report.modes {
            for r in &m.reasons {
                r.validate()?;
            }
            if m.lengths != LengthStats::of(&m.reasons) {
                return Err(ReportError::Inconsistent(format!(
                    "length statistics of mode {}",
                    m.mode
                )));
            }
        }
        if report.chain_holds != report.chain.iter().all(|l| l.witness.is_some()) {
            return Err(ReportError::Inconsistent(
                "chain_holds disagrees with the witnesses".into(),
            ));
        }
        Ok(report)
    }
}
