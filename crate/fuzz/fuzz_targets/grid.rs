#![no_main]

use adiabatic_cs::config::parse_grid;
use adiabatic_cs::quadrature::MIN_POINTS;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok([a, b]) = parse_grid(text) {
            assert!(a >= MIN_POINTS && b >= MIN_POINTS);
        }
    }
});
