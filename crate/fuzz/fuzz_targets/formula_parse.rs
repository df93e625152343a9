#![no_main]

use libfuzzer_sys::fuzz_target;
use reasonkit::formula::{parse, parse_infer};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok((u, f)) = parse_infer(text) {
        let again = parse(&f.render(&u), &u).expect("rendered formulas parse");
        assert_eq!(again, f);
    }
});
