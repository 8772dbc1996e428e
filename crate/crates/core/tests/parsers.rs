use infoskel::data::{read_csv, BayesNetSpec, CsvOptions, ExactModel, NodeSpec};
use infoskel::DiscoveryConfig;
use proptest::prelude::*;

fn names() -> impl Strategy<Value = String> {
    prop::sample::select(vec!["A", "B", "C", "D"]).prop_map(String::from)
}

fn node() -> impl Strategy<Value = NodeSpec> {
    (
        names(),
        prop::collection::vec("[a-c]{1,2}", 0..4),
        prop::collection::vec(names(), 0..3),
        prop::collection::vec(prop::collection::vec(-0.5f64..1.5, 0..4), 0..9),
    )
        .prop_map(|(name, alphabet, parents, cpt)| NodeSpec {
            name,
            alphabet,
            parents,
            cpt,
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn csv_reader_never_panics(bytes in prop::collection::vec(any::<u8>(), 0..200)) {
        let _ = read_csv(bytes.as_slice(), &CsvOptions::default());
    }

    #[test]
    fn csv_reader_handles_textual_noise(text in "[a-c,\"\n ]{0,80}") {
        if let Ok(d) = read_csv(text.as_bytes(), &CsvOptions::default()) {
            prop_assert!(d.sample_count() > 0);
        }
    }

    #[test]
    fn compiled_networks_are_usable(nodes in prop::collection::vec(node(), 0..4)) {
        let spec = BayesNetSpec { nodes };
        if let Ok(net) = spec.compile() {
            let data = net.sample(10, 1).unwrap();
            prop_assert_eq!(data.n_variables(), net.len());
            let exact = ExactModel::new(net, 1 << 10).unwrap();
            for v in 0..exact.net().len() {
                let total: f64 = exact.marginal(v).unwrap().iter().sum();
                prop_assert!((total - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn spec_json_round_trips(nodes in prop::collection::vec(node(), 0..4)) {
        let spec = BayesNetSpec { nodes };
        let back = BayesNetSpec::from_json(&spec.to_json_pretty()).unwrap();
        prop_assert_eq!(back, spec);
    }

    #[test]
    fn config_parser_never_panics(text in "\\{(\"[a-z_]{1,12}\": ?(-?[0-9.e]{1,6}|true|null), ?){0,3}\\}") {
        if let Ok(cfg) = serde_json::from_str::<DiscoveryConfig>(&text) {
            let _ = cfg.validate();
        }
    }
}
