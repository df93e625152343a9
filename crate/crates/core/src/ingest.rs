//! Decision functions from serialized decision trees, and constraint
//! families: one-hot groups and the tic-tac-toe board rules.
//!
//! Tree documents are JSON:
//!
//! ```json
//! {
//!   "vars": ["A", "B"],
//!   "root": {"node": {"var": "A",
//!                     "if0": {"leaf": {"class": 0}},
//!                     "if1": {"leaf": {"class": 1}}}}
//! }
//! ```
//!
//! `vars` is optional and, when present, declares the universe order.
//! Group files hold one group per line, `name: v1 v2 v3`, with `#` comments.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::{valid_identifier, Formula, Instance, UniverseError, VarUniverse};
use crate::obdd::{BddError, Manager, NodeRef};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IngestError {
    #[error("malformed tree document: {0}")]
    Malformed(String),
    #[error("leaf class must be 0 or 1, got {0}")]
    BadClass(u64),
    #[error("unknown variable {0:?}")]
    UnknownVariable(String),
    #[error("variable {0:?} tested twice on one path")]
    RepeatedTest(String),
    #[error("line {line}: {message}")]
    Groups { line: usize, message: String },
    #[error("variable {0:?} belongs to more than one group")]
    Overlap(String),
    #[error("no one-hot groups given")]
    NoGroups,
    #[error("universe lacks tic-tac-toe variable {0:?}")]
    WrongUniverse(String),
    #[error(transparent)]
    Universe(#[from] UniverseError),
    #[error(transparent)]
    Bdd(#[from] BddError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecisionTreeDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vars: Option<Vec<String>>,
    pub root: TreeNode,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum TreeNode {
    #[serde(rename = "node")]
    Split(Split),
    #[serde(rename = "leaf")]
    Leaf(Leaf),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Split {
    pub var: String,
    pub if0: Box<TreeNode>,
    pub if1: Box<TreeNode>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Leaf {
    pub class: u64,
}

impl TreeNode {
    pub fn leaf(class: bool) -> Self {
        TreeNode::Leaf(Leaf {
            class: u64::from(class),
        })
    }

    pub fn split(var: impl Into<String>, if0: TreeNode, if1: TreeNode) -> Self {
        TreeNode::Split(Split {
            var: var.into(),
            if0: Box::new(if0),
            if1: Box::new(if1),
        })
    }
}

impl DecisionTreeDoc {
    pub fn parse(text: &str) -> Result<Self, IngestError> {
        serde_json::from_str(text).map_err(|e| IngestError::Malformed(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("tree documents serialize")
    }

    /// The declared universe, if the document has a `vars` list.
    pub fn declared_universe(&self) -> Result<Option<VarUniverse>, IngestError> {
        match &self.vars {
            None => Ok(None),
            Some(names) => Ok(Some(VarUniverse::new(names.iter().cloned())?)),
        }
    }

    /// Tested variables in first-occurrence (preorder) order.
    pub fn tested_vars(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        let mut stack = vec![&self.root];
        while let Some(node) = stack.pop() {
            if let TreeNode::Split(s) = node {
                if !out.contains(&s.var) {
                    out.push(s.var.clone());
                }
                stack.push(&s.if1);
                stack.push(&s.if0);
            }
        }
        out
    }

    /// Checks the document and resolves variable names against `universe`.
    pub fn validate(&self, universe: &VarUniverse) -> Result<(), IngestError> {
        let mut on_path = vec![false; universe.len()];
        validate_node(&self.root, universe, &mut on_path)
    }

    /// Follows the tree on `x`.
    pub fn classify(&self, universe: &VarUniverse, x: &Instance) -> Result<bool, IngestError> {
        let mut node = &self.root;
        loop {
            match node {
                TreeNode::Leaf(l) => return leaf_class(l),
                TreeNode::Split(s) => {
                    let v = universe
                        .index_of(&s.var)
                        .ok_or_else(|| IngestError::UnknownVariable(s.var.clone()))?;
                    node = if x.get(v) { &s.if1 } else { &s.if0 };
                }
            }
        }
    }
}

fn leaf_class(l: &Leaf) -> Result<bool, IngestError> {
    match l.class {
        0 => Ok(false),
        1 => Ok(true),
        other => Err(IngestError::BadClass(other)),
    }
}

fn validate_node(node: &TreeNode, universe: &VarUniverse, on_path: &mut [bool]) -> Result<(), IngestError> {
    match node {
        TreeNode::Leaf(l) => leaf_class(l).map(|_| ()),
        TreeNode::Split(s) => {
            let v = universe
                .index_of(&s.var)
                .ok_or_else(|| IngestError::UnknownVariable(s.var.clone()))?;
            if on_path[v] {
                return Err(IngestError::RepeatedTest(s.var.clone()));
            }
            on_path[v] = true;
            validate_node(&s.if0, universe, on_path)?;
            validate_node(&s.if1, universe, on_path)?;
            on_path[v] = false;
            Ok(())
        }
    }
}

/// Disjunction, over the class-1 leaves, of the conjunction of the literals
/// along the path to that leaf.
pub fn tree_to_formula(doc: &DecisionTreeDoc, universe: &VarUniverse) -> Result<Formula, IngestError> {
    doc.validate(universe)?;
    let mut paths = Vec::new();
    let mut path = Vec::new();
    collect_paths(&doc.root, universe, &mut path, &mut paths);
    Ok(Formula::disjunction(paths))
}

fn collect_paths(node: &TreeNode, universe: &VarUniverse, path: &mut Vec<(usize, bool)>, out: &mut Vec<Formula>) {
    match node {
        TreeNode::Leaf(l) => {
            if l.class == 1 {
                out.push(Formula::conjunction(path.iter().map(|&(v, b)| Formula::literal(v, b))));
            }
        }
        TreeNode::Split(s) => {
            let v = universe.index_of(&s.var).expect("validated");
            path.push((v, false));
            collect_paths(&s.if0, universe, path, out);
            path.last_mut().unwrap().1 = true;
            collect_paths(&s.if1, universe, path, out);
            path.pop();
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OneHotGroup {
    pub name: String,
    pub members: Vec<String>,
}

/// Parses a groups file, one `name: v1 v2 ...` per line.
pub fn parse_groups(text: &str) -> Result<Vec<OneHotGroup>, IngestError> {
    let mut groups = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let err = |message: String| IngestError::Groups { line: line_no, message };
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (name, rest) = line
            .split_once(':')
            .ok_or_else(|| err("expected `name: v1 v2 ...`".into()))?;
        let name = name.trim();
        if !valid_identifier(name) {
            return Err(err(format!("invalid group name {name:?}")));
        }
        let mut members: Vec<String> = Vec::new();
        for m in rest.split_whitespace() {
            if !valid_identifier(m) {
                return Err(err(format!("invalid variable {m:?}")));
            }
            if members.iter().any(|x| x == m) {
                return Err(err(format!("variable {m:?} listed twice")));
            }
            members.push(m.to_string());
        }
        if members.is_empty() {
            return Err(err(format!("group {name:?} has no members")));
        }
        groups.push(OneHotGroup {
            name: name.to_string(),
            members,
        });
    }
    Ok(groups)
}

/// Exactly-one-true per group, conjoined over groups.
pub fn onehot_constraint(groups: &[OneHotGroup], universe: &VarUniverse) -> Result<Formula, IngestError> {
    if groups.is_empty() {
        return Err(IngestError::NoGroups);
    }
    let mut owner: HashMap<usize, &str> = HashMap::new();
    let mut parts = Vec::new();
    for g in groups {
        let mut vars = Vec::with_capacity(g.members.len());
        for name in &g.members {
            let v = universe
                .index_of(name)
                .ok_or_else(|| IngestError::UnknownVariable(name.clone()))?;
            if owner.insert(v, &g.name).is_some() {
                return Err(IngestError::Overlap(name.clone()));
            }
            vars.push(v);
        }
        let at_least_one = Formula::disjunction(vars.iter().map(|&v| Formula::var(v)));
        let mut exclusions = Vec::new();
        for (i, &a) in vars.iter().enumerate() {
            for &b in &vars[i + 1..] {
                exclusions.push(Formula::var(a).and(Formula::var(b)).not());
            }
        }
        parts.push(if exclusions.is_empty() {
            at_least_one
        } else {
            at_least_one.and(Formula::conjunction(exclusions))
        });
    }
    Ok(Formula::conjunction(parts))
}

pub const TTT_CELLS: usize = 9;

/// Names of the marker variables of cell `i`: `(F{i}X, F{i}O)`.
pub fn ttt_names(cell: usize) -> (String, String) {
    (format!("F{cell}X"), format!("F{cell}O"))
}

/// `F0X, F0O, F1X, F1O, ..., F8X, F8O`.
pub fn ttt_universe() -> VarUniverse {
    VarUniverse::new((0..TTT_CELLS).flat_map(|i| {
        let (x, o) = ttt_names(i);
        [x, o]
    }))
    .expect("fixed names are valid")
}

/// Universe indices `(x, o)` for each cell.
pub fn ttt_cells(universe: &VarUniverse) -> Result<[(usize, usize); TTT_CELLS], IngestError> {
    let mut cells = [(0, 0); TTT_CELLS];
    for (i, cell) in cells.iter_mut().enumerate() {
        let (x, o) = ttt_names(i);
        let xi = universe.index_of(&x).ok_or(IngestError::WrongUniverse(x))?;
        let oi = universe.index_of(&o).ok_or(IngestError::WrongUniverse(o))?;
        *cell = (xi, oi);
    }
    Ok(cells)
}

/// No cell carries both an X and an O.
pub fn ttt_cell_constraint(universe: &VarUniverse) -> Result<Formula, IngestError> {
    let cells = ttt_cells(universe)?;
    Ok(Formula::conjunction(
        cells.iter().map(|&(x, o)| Formula::var(x).and(Formula::var(o)).not()),
    ))
}

/// Every board reachable by alternating moves with X first, as pairs
/// `(S, T)` of disjoint cell sets (bitmasks) with `0 <= |S| - |T| <= 1`.
pub fn ttt_alternation_boards() -> Vec<(u16, u16)> {
    let mut out = Vec::new();
    for s in 0u16..1 << TTT_CELLS {
        let mut t = 0u16;
        let free = !s & ((1 << TTT_CELLS) - 1);
        // submasks of the cells X left free
        loop {
            let diff = s.count_ones() as i32 - t.count_ones() as i32;
            if (0..=1).contains(&diff) {
                out.push((s, t));
            }
            if t == free {
                break;
            }
            t = (t.wrapping_sub(free)) & free;
        }
    }
    out
}

fn board_cube(cells: &[(usize, usize); TTT_CELLS], s: u16, t: u16) -> Vec<(usize, bool)> {
    cells
        .iter()
        .enumerate()
        .flat_map(|(i, &(x, o))| [(x, s >> i & 1 == 1), (o, t >> i & 1 == 1)])
        .collect()
}

/// X moves first and players alternate: the disjunction of the full board
/// cubes of [`ttt_alternation_boards`].
pub fn ttt_alternation_constraint(universe: &VarUniverse) -> Result<Formula, IngestError> {
    let cells = ttt_cells(universe)?;
    Ok(Formula::disjunction(ttt_alternation_boards().into_iter().map(
        |(s, t)| {
            Formula::conjunction(
                board_cube(&cells, s, t)
                    .into_iter()
                    .map(|(v, b)| Formula::literal(v, b)),
            )
        },
    )))
}

/// Same function as [`ttt_alternation_constraint`], built as a BDD union of
/// cubes without an intermediate formula.
pub fn ttt_alternation_node(m: &mut Manager, universe: &VarUniverse) -> Result<NodeRef, IngestError> {
    let cells = ttt_cells(universe)?;
    let mut acc = NodeRef::ZERO;
    for (s, t) in ttt_alternation_boards() {
        let cube = m.cube(&board_cube(&cells, s, t))?;
        acc = m.or(acc, cube)?;
    }
    Ok(acc)
}
