#![no_main]

use adiabatic_cs::config::parse_eps_grid;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(grid) = parse_eps_grid(text) {
            assert!(!grid.is_empty());
            assert!(grid.iter().all(|e| e.is_finite() && *e > 0.0));
        }
    }
});
