#![no_main]

use adiabatic_cs::export::{parse_results_csv, to_csv_string};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(rows) = parse_results_csv(text) {
            let again = to_csv_string(&rows).expect("writable");
            assert_eq!(parse_results_csv(&again).expect("reparse").len(), rows.len());
        }
    }
});
