#![no_main]

use adiabatic_cs::export::{parse_record_json, to_json_string};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(rec) = parse_record_json(text) {
            let again = to_json_string(&rec).expect("serializable");
            let back = parse_record_json(&again).expect("reparse");
            assert_eq!(back.results.len(), rec.results.len());
        }
    }
});
