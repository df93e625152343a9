//! A decision function paired with a hard domain constraint, and the total
//! functions whose reasons explain it.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::{Formula, Instance, VarUniverse};
use crate::obdd::{BddError, Manager, NodeRef};

/// How the constraint enters the explanation target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Explain `f` alone.
    Ignore,
    /// Explain `kappa -> f`: out-of-constraint instances are don't-cares.
    Implies,
    /// Explain `kappa & f`: out-of-constraint instances are negative.
    Conjoin,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Ignore, Mode::Implies, Mode::Conjoin];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Ignore => "ignore",
            Mode::Implies => "implies",
            Mode::Conjoin => "conjoin",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown mode {0:?} (expected ignore, implies or conjoin)")]
pub struct UnknownMode(pub String);

impl FromStr for Mode {
    type Err = UnknownMode;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ignore" => Ok(Mode::Ignore),
            "implies" => Ok(Mode::Implies),
            "conjoin" => Ok(Mode::Conjoin),
            other => Err(UnknownMode(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstanceClass {
    InCPositive,
    InCNegative,
    OutOfC,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("formula mentions variable {var} but the universe has {n}")]
pub struct UniverseMismatch {
    pub var: usize,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstrainedFn {
    universe: VarUniverse,
    f: Formula,
    kappa: Formula,
}

impl ConstrainedFn {
    pub fn new(universe: VarUniverse, f: Formula, kappa: Formula) -> Result<Self, UniverseMismatch> {
        let n = universe.len();
        for g in [&f, &kappa] {
            let bound = g.var_bound();
            if bound > n {
                return Err(UniverseMismatch { var: bound - 1, n });
            }
        }
        Ok(ConstrainedFn { universe, f, kappa })
    }

    /// `(f, true)`.
    pub fn unconstrained(universe: VarUniverse, f: Formula) -> Result<Self, UniverseMismatch> {
        Self::new(universe, f, Formula::Const(true))
    }

    pub fn universe(&self) -> &VarUniverse {
        &self.universe
    }

    pub fn f(&self) -> &Formula {
        &self.f
    }

    pub fn kappa(&self) -> &Formula {
        &self.kappa
    }

    pub fn build_target(&self, mode: Mode) -> Formula {
        compose(self.f.clone(), &self.kappa, mode)
    }

    /// Target for explaining negative decisions: `f` replaced by `!f`.
    pub fn dual_target(&self, mode: Mode) -> Formula {
        compose(self.f.clone().not(), &self.kappa, mode)
    }

    pub fn check_instance(&self, x: &Instance) -> InstanceClass {
        if !self.kappa.eval(x) {
            InstanceClass::OutOfC
        } else if self.f.eval(x) {
            InstanceClass::InCPositive
        } else {
            InstanceClass::InCNegative
        }
    }
}

fn compose(f: Formula, kappa: &Formula, mode: Mode) -> Formula {
    match mode {
        Mode::Ignore => f,
        Mode::Implies => kappa.clone().implies(f),
        Mode::Conjoin => kappa.clone().and(f),
    }
}

/// BDD-level counterpart of [`ConstrainedFn::build_target`]; pass `!f`
/// for the dual.
pub fn compose_nodes(m: &mut Manager, f: NodeRef, kappa: NodeRef, mode: Mode) -> Result<NodeRef, BddError> {
    match mode {
        Mode::Ignore => Ok(f),
        Mode::Implies => {
            let outside = m.negate(kappa)?;
            m.or(outside, f)
        }
        Mode::Conjoin => m.and(kappa, f),
    }
}

pub fn classify_nodes(m: &Manager, f: NodeRef, kappa: NodeRef, x: &Instance) -> InstanceClass {
    if !m.eval(kappa, x) {
        InstanceClass::OutOfC
    } else if m.eval(f, x) {
        InstanceClass::InCPositive
    } else {
        InstanceClass::InCNegative
    }
}
