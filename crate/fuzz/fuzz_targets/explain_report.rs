#![no_main]

use libfuzzer_sys::fuzz_target;
use reasonkit::report::ExplainReport;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(r) = ExplainReport::parse(text) {
        assert_eq!(ExplainReport::parse(&r.to_json()).as_ref(), Ok(&r));
    }
});
