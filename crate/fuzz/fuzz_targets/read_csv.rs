#![no_main]
use infoskel::data::{read_csv, CsvOptions};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let opts = CsvOptions {
        cardinality_cap: 16,
        ..CsvOptions::default()
    };
    let Ok(dataset) = read_csv(data, &opts) else {
        return;
    };
    // whatever loads must survive a write and reload unchanged
    let mut out = Vec::new();
    dataset.write_csv(&mut out, b',').expect("write loaded dataset");
    let again = read_csv(out.as_slice(), &opts).expect("reload written dataset");
    assert_eq!(again.names(), dataset.names());
    assert_eq!(again.sample_count(), dataset.sample_count());
});
