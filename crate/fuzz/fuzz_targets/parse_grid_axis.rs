#![no_main]

use libfuzzer_sys::fuzz_target;
use thermocost::scenario_io::{parse_grid_axis, MAX_AXIS_POINTS};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok((key, values)) = parse_grid_axis(text) {
        assert!(!key.is_empty());
        assert!(!values.is_empty() && values.len() <= MAX_AXIS_POINTS);
        assert!(values.iter().all(|v| v.is_finite()));
    }
});
