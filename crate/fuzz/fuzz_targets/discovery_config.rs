#![no_main]
use infoskel::DiscoveryConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(cfg) = serde_json::from_slice::<DiscoveryConfig>(data) {
        let _ = cfg.validate();
    }
});
