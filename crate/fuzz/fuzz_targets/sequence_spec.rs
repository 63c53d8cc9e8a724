#![no_main]

use libfuzzer_sys::fuzz_target;
use paircorr_core::SequenceSpec;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(spec) = text.parse::<SequenceSpec>() {
        // Display output must parse back to the same spec
        let again: SequenceSpec = spec.to_string().parse().expect("display round-trips");
        assert_eq!(again, spec);
    }
});
