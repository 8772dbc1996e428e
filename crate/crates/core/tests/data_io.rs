use std::io::Write;

use infoskel::data::{exact_joint, load_csv, CsvOptions, ExactModel, JointSource};
use infoskel::{specs, Error};

#[test]
fn empirical_joints_converge_at_root_n_rate() {
    let spec = specs::lucas().unwrap();
    let net = spec.compile().unwrap();
    let exact = ExactModel::from_spec(&spec).unwrap();
    let pairs = [(2, 5), (5, 9), (4, 6), (9, 10)];
    let mean_dev = |n: usize| {
        let mut total = 0.0;
        for seed in 0..8 {
            let data = net.sample(n, seed).unwrap();
            for &(a, b) in &pairs {
                total += data.joint(&[a], &[b]).unwrap().max_abs_diff(&exact.joint(&[a], &[b]).unwrap());
            }
        }
        total / (8 * pairs.len()) as f64
    };
    let small = mean_dev(500);
    let large = mean_dev(50_000);
    // a hundredfold increase in n should shrink the error about tenfold
    let ratio = small / large;
    assert!((4.0..25.0).contains(&ratio), "ratio {ratio}, {small} vs {large}");
}

#[test]
fn chain_endpoints_form_composed_crossover() {
    let joint = exact_joint(&specs::chain().unwrap(), "X", "Z").unwrap();
    let p = joint.probabilities();
    assert!((p[0][1] - 0.13).abs() < 1e-15);
    assert!((p[0][0] - 0.37).abs() < 1e-15);
}

#[test]
fn lucas_sample_has_twelve_binary_columns() {
    let data = specs::lucas().unwrap().compile().unwrap().sample(500, 1).unwrap();
    assert_eq!(data.n_variables(), 12);
    for v in 0..12 {
        assert_eq!(data.alphabet(v).symbols(), ["0", "1"]);
    }
}

#[test]
fn loads_selected_columns_from_disk() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    writeln!(f, "id\tsmoker\tcancer").unwrap();
    for (i, row) in ["yes\tno", "no\tno", "yes\tyes", "no\tyes"].iter().enumerate() {
        writeln!(f, "{i}\t{row}").unwrap();
    }
    f.flush().unwrap();
    let opts = CsvOptions {
        delimiter: b'\t',
        columns: Some(vec!["cancer".into(), "smoker".into()]),
        ..CsvOptions::default()
    };
    let data = load_csv(f.path(), &opts).unwrap();
    assert_eq!(data.names(), ["cancer", "smoker"]);
    assert_eq!(data.alphabet(1).symbols(), ["no", "yes"]);
    assert_eq!(data.column(1), [1, 0, 1, 0]);
}

#[test]
fn missing_file_is_an_io_error() {
    let err = load_csv("/definitely/not/here.csv", &CsvOptions::default()).unwrap_err();
    assert!(err.is_io(), "{err}");
}

#[test]
fn unknown_selected_column_is_reported() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    writeln!(f, "a,b\n0,1").unwrap();
    let opts = CsvOptions {
        columns: Some(vec!["c".into()]),
        ..CsvOptions::default()
    };
    match load_csv(f.path(), &opts) {
        Err(Error::UnknownVariable(name)) => assert_eq!(name, "c"),
        other => panic!("unexpected {other:?}"),
    }
}
