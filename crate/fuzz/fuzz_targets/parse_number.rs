#![no_main]

use libfuzzer_sys::fuzz_target;
use thermocost::scenario_io::{format_number, parse_number};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(v) = parse_number(text) {
        assert!(v.is_finite());
        assert_eq!(parse_number(&format_number(v)).unwrap(), v);
    }
});
