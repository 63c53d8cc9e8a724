#![no_main]

use libfuzzer_sys::fuzz_target;
use paircorr_core::verifier::ExperimentConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(config) = ExperimentConfig::parse(text) {
        for (key, value) in config.entries() {
            assert!(!key.is_empty() && !value.is_empty());
            assert_eq!(config.get(key), Some(value.as_str()));
        }
        let _ = config.battery();
        let _ = config.seed();
    }
});
