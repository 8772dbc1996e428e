#![no_main]
use infoskel::data::{BayesNetSpec, ExactModel};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(spec) = BayesNetSpec::from_json(text) else {
        return;
    };
    let Ok(net) = spec.compile() else {
        return;
    };
    let sample = net.sample(16, 0).expect("valid network samples");
    assert_eq!(sample.n_variables(), net.len());
    if let Ok(exact) = ExactModel::new(net, 1 << 12) {
        for v in 0..exact.net().len() {
            let total: f64 = exact.marginal(v).expect("marginal").iter().sum();
            assert!((total - 1.0).abs() < 1e-6);
        }
    }
});
