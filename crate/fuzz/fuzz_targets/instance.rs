#![no_main]

use libfuzzer_sys::fuzz_target;
use reasonkit::formula::{Instance, VarUniverse};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let u = VarUniverse::new(["L", "K", "P", "A"]).unwrap();
    if let Ok(x) = Instance::parse(text, &u) {
        assert_eq!(Instance::parse(&x.bitstring(), &u).as_ref(), Ok(&x));
    }
});
