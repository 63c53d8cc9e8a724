#![no_main]

use libfuzzer_sys::fuzz_target;
use paircorr_core::lattice::{count_s, parse_weights, SumChoice};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(weights) = parse_weights(text) else {
        return;
    };
    let entries = weights.entries();
    assert!(!entries.is_empty());
    assert!(entries.windows(2).all(|w| w[0].x < w[1].x));
    if entries.len() <= 64 {
        let _ = count_s(entries, 4, 1.0, SumChoice::Auto);
    }
});
