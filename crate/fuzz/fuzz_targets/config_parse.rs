#![no_main]

use adiabatic_cs::config::parse_config;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(cfg) = parse_config(text) {
            for (k, _) in cfg.iter() {
                assert!(adiabatic_cs::config::KNOWN_KEYS.contains(&k));
            }
        }
    }
});
