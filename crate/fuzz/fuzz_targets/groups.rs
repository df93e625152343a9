#![no_main]

use libfuzzer_sys::fuzz_target;
use reasonkit::formula::VarUniverse;
use reasonkit::ingest::{onehot_constraint, parse_groups};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(groups) = parse_groups(text) else { return };
    if groups.is_empty() {
        return;
    }
    let names = groups.iter().flat_map(|g| g.members.iter().cloned());
    if let Ok(u) = VarUniverse::new(names) {
        onehot_constraint(&groups, &u).expect("groups over their own members are valid");
    }
});
