#![no_main]

use libfuzzer_sys::fuzz_target;
use thermocost::scenario_io::parse_config;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(config) = parse_config(text) {
        // serialized configs parse back to the same value
        let again = parse_config(&config.to_json()).expect("round trip");
        assert_eq!(again, config);
        let _ = config.build_scenario();
    }
});
