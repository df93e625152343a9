//! End-to-end explanation of one decision: resolve the universe, compile
//! model and constraints into one manager, build the target for a mode,
//! enumerate and filter its reasons.

use thiserror::Error;

use crate::constrained::{classify_nodes, compose_nodes, InstanceClass, Mode};
use crate::formula::{self, Instance, InstanceError, ParseError, UniverseError, VarUniverse};
use crate::ingest::{self, DecisionTreeDoc, IngestError, OneHotGroup};
use crate::obdd::{BddError, Manager, NodeRef, DEFAULT_NODE_BUDGET};
use crate::reasons::{
    filter_representatives, subsumes, sufficient_reasons, FilterPolicy, ReasonError, ReasonSet, Term,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelSource {
    Formula { name: String, text: String },
    Tree { name: String, doc: DecisionTreeDoc },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConstraintSource {
    Formula { name: String, text: String },
    OneHot { name: String, groups: Vec<OneHotGroup> },
    TttCell,
    TttAlternation,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProblemError {
    #[error("{source_name}: {error}")]
    Parse { source_name: String, error: ParseError },
    #[error("{source_name}: {error}")]
    Ingest { source_name: String, error: IngestError },
    #[error("invalid variable list: {0}")]
    Universe(#[from] UniverseError),
    #[error(transparent)]
    Bdd(#[from] BddError),
}

impl ProblemError {
    pub fn is_resource_exhaustion(&self) -> bool {
        matches!(
            self,
            ProblemError::Bdd(BddError::NodeBudgetExceeded { .. })
                | ProblemError::Ingest {
                    error: IngestError::Bdd(BddError::NodeBudgetExceeded { .. }),
                    ..
                }
        )
    }
}

/// Everything needed to build a [`Problem`]; cheap to share across threads
/// so each worker can own its manager.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProblemSpec {
    pub model: ModelSource,
    pub constraints: Vec<ConstraintSource>,
    pub vars: Option<Vec<String>>,
    pub order: Option<Vec<String>>,
    pub node_budget: usize,
}

impl ProblemSpec {
    pub fn new(model: ModelSource) -> Self {
        ProblemSpec {
            model,
            constraints: Vec::new(),
            vars: None,
            order: None,
            node_budget: DEFAULT_NODE_BUDGET,
        }
    }

    /// Explicit `vars`, else the tree's declared `vars`, else every variable
    /// in first-occurrence order: model first, then each constraint.
    pub fn resolve_universe(&self) -> Result<VarUniverse, ProblemError> {
        if let Some(vars) = &self.vars {
            return Ok(VarUniverse::new(vars.iter().cloned())?);
        }
        let mut universe = match &self.model {
            ModelSource::Tree { name, doc } => {
                let declared = doc.declared_universe().map_err(|error| ProblemError::Ingest {
                    source_name: name.clone(),
                    error,
                })?;
                match declared {
                    Some(u) => return Ok(u),
                    None => VarUniverse::new(doc.tested_vars())?,
                }
            }
            ModelSource::Formula { name, text } => {
                formula::parse_infer(text)
                    .map(|(u, _)| u)
                    .map_err(|error| ProblemError::Parse {
                        source_name: name.clone(),
                        error,
                    })?
            }
        };
        for c in &self.constraints {
            let extra: Vec<String> = match c {
                ConstraintSource::Formula { name, text } => {
                    let (u, _) =
                        formula::parse_extending(text, universe.clone()).map_err(|error| ProblemError::Parse {
                            source_name: name.clone(),
                            error,
                        })?;
                    universe = u;
                    continue;
                }
                ConstraintSource::OneHot { groups, .. } => {
                    groups.iter().flat_map(|g| g.members.iter().cloned()).collect()
                }
                ConstraintSource::TttCell | ConstraintSource::TttAlternation => ingest::ttt_universe().names().to_vec(),
            };
            for name in extra {
                if universe.index_of(&name).is_none() {
                    universe.push(name)?;
                }
            }
        }
        Ok(universe)
    }

    pub fn build(&self) -> Result<Problem, ProblemError> {
        let universe = self.resolve_universe()?;
        let mut manager = match &self.order {
            None => Manager::new(universe.len()),
            Some(names) => {
                let names: Vec<&str> = names.iter().map(String::as_str).collect();
                Manager::with_order(Manager::order_from_names(&universe, &names)?)?
            }
        };
        manager.set_node_budget(self.node_budget);

        let f_formula = match &self.model {
            ModelSource::Formula { name, text } => {
                formula::parse(text, &universe).map_err(|error| ProblemError::Parse {
                    source_name: name.clone(),
                    error,
                })?
            }
            ModelSource::Tree { name, doc } => {
                ingest::tree_to_formula(doc, &universe).map_err(|error| ProblemError::Ingest {
                    source_name: name.clone(),
                    error,
                })?
            }
        };
        let f = manager.compile(&f_formula)?;

        let mut kappa = NodeRef::ONE;
        for c in &self.constraints {
            let node = match c {
                ConstraintSource::Formula { name, text } => {
                    let g = formula::parse(text, &universe).map_err(|error| ProblemError::Parse {
                        source_name: name.clone(),
                        error,
                    })?;
                    manager.compile(&g)?
                }
                ConstraintSource::OneHot { name, groups } => {
                    let g = ingest::onehot_constraint(groups, &universe).map_err(|error| ProblemError::Ingest {
                        source_name: name.clone(),
                        error,
                    })?;
                    manager.compile(&g)?
                }
                ConstraintSource::TttCell => {
                    let g = ingest::ttt_cell_constraint(&universe).map_err(|error| ProblemError::Ingest {
                        source_name: "builtin:ttt-cell".into(),
                        error,
                    })?;
                    manager.compile(&g)?
                }
                ConstraintSource::TttAlternation => {
                    ingest::ttt_alternation_node(&mut manager, &universe).map_err(|error| ProblemError::Ingest {
                        source_name: "builtin:ttt-alternation".into(),
                        error,
                    })?
                }
            };
            kappa = manager.and(kappa, node)?;
        }
        Ok(Problem {
            universe,
            manager,
            f,
            kappa,
        })
    }
}

/// A compiled constrained decision function.
#[derive(Debug, Clone)]
pub struct Problem {
    pub universe: VarUniverse,
    pub manager: Manager,
    pub f: NodeRef,
    pub kappa: NodeRef,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExplainOptions {
    pub mode: Mode,
    /// Explain negative decisions through the dual function.
    pub dual: bool,
    pub filter: FilterPolicy,
    /// Allow out-of-constraint instances; honoured for `Mode::Ignore` only.
    pub force: bool,
}

impl Default for ExplainOptions {
    fn default() -> Self {
        ExplainOptions {
            mode: Mode::Implies,
            dual: false,
            filter: FilterPolicy::None,
            force: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExplainError {
    #[error("instance {0} violates the constraints")]
    OutOfConstraint(String),
    #[error("instance {0} is a negative decision (use --dual to explain it)")]
    Negative(String),
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Bdd(#[from] BddError),
}

impl From<ReasonError> for ExplainError {
    fn from(e: ReasonError) -> Self {
        match e {
            ReasonError::Bdd(b) => ExplainError::Bdd(b),
            // the target is positive at x by construction
            ReasonError::NotPositive(x) => unreachable!("target negative at {x}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Explanation {
    pub instance: Instance,
    pub class: InstanceClass,
    pub mode: Mode,
    /// True when the reasons explain `f(x) = 0`.
    pub dual: bool,
    pub reasons: ReasonSet,
}

/// One step of the subsumption chain: `witness` subsumes `term`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainLink {
    pub lower: Mode,
    pub upper: Mode,
    pub term: Term,
    pub witness: Option<Term>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Comparison {
    pub instance: Instance,
    pub dual: bool,
    /// Ordered ignore, implies, conjoin.
    pub per_mode: Vec<ReasonSet>,
    pub chain: Vec<ChainLink>,
}

impl Comparison {
    pub fn for_mode(&self, mode: Mode) -> &ReasonSet {
        let i = Mode::ALL.iter().position(|&m| m == mode).unwrap();
        &self.per_mode[i]
    }

    pub fn chain_holds(&self) -> bool {
        self.chain.iter().all(|l| l.witness.is_some())
    }
}

impl Problem {
    pub fn parse_instance(&self, text: &str) -> Result<Instance, InstanceError> {
        Instance::parse(text, &self.universe)
    }

    pub fn classify(&self, x: &Instance) -> InstanceClass {
        classify_nodes(&self.manager, self.f, self.kappa, x)
    }

    pub fn kappa_satisfiable(&self) -> bool {
        self.kappa != NodeRef::ZERO
    }

    /// Checks the instance and returns `(class, explain-the-dual)`.
    fn admit(&self, x: &Instance, mode: Mode, dual: bool, force: bool) -> Result<(InstanceClass, bool), ExplainError> {
        let class = self.classify(x);
        if class == InstanceClass::OutOfC && !(force && mode == Mode::Ignore) {
            return Err(ExplainError::OutOfConstraint(x.bitstring()));
        }
        let positive = self.manager.eval(self.f, x);
        if !positive && !dual {
            return Err(ExplainError::Negative(x.bitstring()));
        }
        Ok((class, !positive))
    }

    fn target(&mut self, mode: Mode, use_dual: bool) -> Result<NodeRef, BddError> {
        let f = if use_dual { self.manager.negate(self.f)? } else { self.f };
        compose_nodes(&mut self.manager, f, self.kappa, mode)
    }

    fn reasons_for(
        &mut self,
        x: &Instance,
        mode: Mode,
        use_dual: bool,
        filter: FilterPolicy,
    ) -> Result<ReasonSet, ExplainError> {
        let target = self.target(mode, use_dual)?;
        let mut rs = sufficient_reasons(&mut self.manager, target, x)?;
        rs.query.mode = Some(mode);
        let mut rs = filter_representatives(&mut self.manager, &rs, self.kappa, filter)?;
        rs.query.mode = Some(mode);
        Ok(rs)
    }

    pub fn explain(&mut self, x: &Instance, opts: &ExplainOptions) -> Result<Explanation, ExplainError> {
        let (class, use_dual) = self.admit(x, opts.mode, opts.dual, opts.force)?;
        let reasons = self.reasons_for(x, opts.mode, use_dual, opts.filter)?;
        Ok(Explanation {
            instance: x.clone(),
            class,
            mode: opts.mode,
            dual: use_dual,
            reasons,
        })
    }

    /// Reasons under all three modes plus subsumption witnesses for
    /// conjoin → ignore → implies. Witnesses use the unfiltered sets.
    pub fn compare(&mut self, x: &Instance, dual: bool, filter: FilterPolicy) -> Result<Comparison, ExplainError> {
        let (_, use_dual) = self.admit(x, Mode::Implies, dual, false)?;
        let mut full = Vec::new();
        let mut per_mode = Vec::new();
        for mode in Mode::ALL {
            full.push(self.reasons_for(x, mode, use_dual, FilterPolicy::None)?);
            per_mode.push(self.reasons_for(x, mode, use_dual, filter)?);
        }
        let mut chain = Vec::new();
        // indices into Mode::ALL: conjoin=2, ignore=0, implies=1
        for (lo, hi) in [(2usize, 0usize), (0, 1)] {
            for t in &full[lo].reasons {
                let witness = full[hi].reasons.iter().find(|s| subsumes(s, t)).cloned();
                chain.push(ChainLink {
                    lower: Mode::ALL[lo],
                    upper: Mode::ALL[hi],
                    term: t.clone(),
                    witness,
                });
            }
        }
        Ok(Comparison {
            instance: x.clone(),
            dual: use_dual,
            per_mode,
            chain,
        })
    }
}

/// Instances file: one instance per line, blank lines and `#` comments ignored.
pub fn parse_instances(text: &str, universe: &VarUniverse) -> Result<Vec<Instance>, (usize, InstanceError)> {
    instance_lines(text)
        .into_iter()
        .map(|(no, line)| Instance::parse(line, universe).map_err(|e| (no, e)))
        .collect()
}

/// The `(line number, text)` entries of an instances file.
pub fn instance_lines(text: &str) -> Vec<(usize, &str)> {
    text.lines()
        .enumerate()
        .filter_map(|(i, line)| {
            let line = line.split('#').next().unwrap_or("").trim();
            (!line.is_empty()).then_some((i + 1, line))
        })
        .collect()
}
