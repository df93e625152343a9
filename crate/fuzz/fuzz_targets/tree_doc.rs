#![no_main]

use libfuzzer_sys::fuzz_target;
use reasonkit::formula::VarUniverse;
use reasonkit::ingest::{tree_to_formula, DecisionTreeDoc};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(doc) = DecisionTreeDoc::parse(text) else { return };
    assert_eq!(DecisionTreeDoc::parse(&doc.to_json()).as_ref(), Ok(&doc));
    let universe = match doc.declared_universe() {
        Ok(Some(u)) => u,
        Ok(None) => match VarUniverse::new(doc.tested_vars()) {
            Ok(u) => u,
            Err(_) => return,
        },
        Err(_) => return,
    };
    let _ = tree_to_formula(&doc, &universe);
});
