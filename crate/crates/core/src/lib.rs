//! Sufficient reasons behind decisions of Boolean classifiers under hard
//! domain constraints.
//!
//! A decision function `f` and a constraint `kappa` are compiled into one
//! [`obdd::Manager`]; the explanation target for mode `implies` is
//! `kappa -> f`, whose prime implicants covering an instance are exactly
//! the reasons of the partial function that is `f` on `kappa` and
//! don't-care elsewhere.

pub mod constrained;
pub mod fixtures;
pub mod formula;
pub mod ingest;
pub mod obdd;
pub mod oracle;
pub mod pipeline;
pub mod random;
pub mod reasons;
pub mod report;

pub use constrained::{ConstrainedFn, InstanceClass, Mode};
pub use formula::{parse, parse_infer, Formula, Instance, VarUniverse};
pub use obdd::{BddError, Manager, NodeRef};
pub use reasons::{
    constraint_equivalent, constraint_subsumes, filter_representatives, is_implicant, subsumes, sufficient_reasons,
    FilterPolicy, Literal, ReasonSet, Term,
};
