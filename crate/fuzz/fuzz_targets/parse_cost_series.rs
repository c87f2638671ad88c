#![no_main]

use libfuzzer_sys::fuzz_target;
use thermocost::calibration::{fit, CostSeries};
use thermocost::model::CurveKind;
use thermocost::scenario_io::{parse_cost_series, series_to_csv};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(series) = parse_cost_series(text, "fuzz") {
        let again: CostSeries = parse_cost_series(&series_to_csv(&series), "fuzz").expect("round trip");
        assert_eq!(again, series);
        if series.len() <= 64 {
            for kind in CurveKind::ALL {
                let _ = fit(&series, kind);
            }
        }
    }
});
