#![no_main]

use libfuzzer_sys::fuzz_target;
use reasonkit::formula::VarUniverse;
use reasonkit::pipeline::{instance_lines, parse_instances};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let u = VarUniverse::new(["L", "K", "P", "A"]).unwrap();
    if let Ok(xs) = parse_instances(text, &u) {
        assert_eq!(xs.len(), instance_lines(text).len());
    }
});
