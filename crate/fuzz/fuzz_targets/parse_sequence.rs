#![no_main]

use libfuzzer_sys::fuzz_target;
use paircorr_core::sequences::parse_sequence;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(values) = parse_sequence(text) {
            assert!(!values.is_empty());
            assert!(values.iter().all(|v| v.is_finite()));
        }
    }
});
