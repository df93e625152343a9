//! Turning command-line paths into model and constraint sources.

use std::fs;
use std::path::Path;

use reasonkit::ingest::{parse_groups, DecisionTreeDoc};
use reasonkit::pipeline::{ConstraintSource, ModelSource, ProblemError};

use crate::{Code, Failure};

pub fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::new(Code::Io, format!("{}: {e}", path.display())))
}

fn has_ext(path: &Path, exts: &[&str]) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| exts.iter().any(|x| e.eq_ignore_ascii_case(x)))
}

/// `.tree` and `.json` files are decision trees, anything else a formula.
pub fn model(path: &Path) -> Result<ModelSource, Failure> {
    let text = read(path)?;
    let name = path.display().to_string();
    if has_ext(path, &["tree", "json"]) {
        let doc = DecisionTreeDoc::parse(&text).map_err(|e| Failure::new(Code::Parse, format!("{name}: {e}")))?;
        Ok(ModelSource::Tree { name, doc })
    } else {
        Ok(ModelSource::Formula { name, text })
    }
}

pub fn constraint(arg: &str) -> Result<ConstraintSource, Failure> {
    if let Some(builtin) = arg.strip_prefix("builtin:") {
        return match builtin {
            "ttt-cell" => Ok(ConstraintSource::TttCell),
            "ttt-alternation" => Ok(ConstraintSource::TttAlternation),
            other => Err(Failure::new(
                Code::Parse,
                format!("unknown builtin constraint {other:?} (expected ttt-cell or ttt-alternation)"),
            )),
        };
    }
    let path = Path::new(arg);
    let text = read(path)?;
    let name = path.display().to_string();
    if has_ext(path, &["groups"]) {
        let groups = parse_groups(&text).map_err(|e| Failure::new(Code::Parse, format!("{name}: {e}")))?;
        Ok(ConstraintSource::OneHot { name, groups })
    } else {
        Ok(ConstraintSource::Formula { name, text })
    }
}

pub fn problem_failure(e: ProblemError) -> Failure {
    let code = if e.is_resource_exhaustion() {
        Code::NodeBudget
    } else {
        Code::Parse
    };
    Failure::new(code, e.to_string())
}
