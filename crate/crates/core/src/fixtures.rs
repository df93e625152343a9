//! Bundled demo inputs, also shipped as files under `fixtures/`.

use crate::ingest::DecisionTreeDoc;
use crate::pipeline::{ConstraintSource, ModelSource, ProblemSpec};

/// Shortlisting classifier over `L, K, P, A` as a decision tree.
pub const SHORTLIST_TREE: &str = include_str!("../fixtures/shortlist.tree");
/// The same classifier as a formula.
pub const SHORTLIST_FORMULA: &str = include_str!("../fixtures/shortlist.bool");
/// Course prerequisites for the shortlisting example.
pub const SHORTLIST_CONSTRAINTS: &str = include_str!("../fixtures/shortlist-constraints.bool");
/// `X1 <-> X2` as a tree over `X1, X2`.
pub const TOY_TREE: &str = include_str!("../fixtures/toy.tree");
pub const TOY_FORMULA: &str = include_str!("../fixtures/toy.bool");
pub const TOY_CONSTRAINT: &str = include_str!("../fixtures/toy-constraint.bool");
/// Hand-made stand-in tic-tac-toe classifier over `F0X, F0O, ..., F8O`.
pub const TTT_STANDIN_TREE: &str = include_str!("../fixtures/ttt-standin.tree");

fn tree_spec(name: &str, text: &str, constraints: Vec<ConstraintSource>) -> ProblemSpec {
    let doc = DecisionTreeDoc::parse(text).expect("bundled tree parses");
    let mut spec = ProblemSpec::new(ModelSource::Tree { name: name.into(), doc });
    spec.constraints = constraints;
    spec
}

pub fn shortlist_spec() -> ProblemSpec {
    tree_spec(
        "shortlist.tree",
        SHORTLIST_TREE,
        vec![ConstraintSource::Formula {
            name: "shortlist-constraints.bool".into(),
            text: SHORTLIST_CONSTRAINTS.into(),
        }],
    )
}

pub fn toy_spec() -> ProblemSpec {
    tree_spec(
        "toy.tree",
        TOY_TREE,
        vec![ConstraintSource::Formula {
            name: "toy-constraint.bool".into(),
            text: TOY_CONSTRAINT.into(),
        }],
    )
}

/// The stand-in tic-tac-toe model under the given constraints.
pub fn ttt_spec(constraints: Vec<ConstraintSource>) -> ProblemSpec {
    tree_spec("ttt-standin.tree", TTT_STANDIN_TREE, constraints)
}

/// The board `X X X / . . . / O . O` over the tic-tac-toe universe.
pub const TTT_DEMO_INSTANCE: &str = "101010000000010001";
