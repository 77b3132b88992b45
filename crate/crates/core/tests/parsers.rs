use std::path::Path;

use proptest::prelude::*;
use rsqueue::dist::CdfTable;
use rsqueue::harness::{parse_records_csv, ExperimentConfig};
use rsqueue::paths::GridPath;

fn seeds(target: &str) -> Vec<String> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<String> = std::fs::read_dir(&dir)
        .unwrap()
        .map(|e| std::fs::read_to_string(e.unwrap().path()).unwrap())
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds in {}", dir.display());
    out
}

#[test]
fn fuzz_seeds_parse() {
    for s in seeds("parse_config") {
        ExperimentConfig::from_toml_str(&s).unwrap();
    }
    for s in seeds("parse_cdf_table") {
        CdfTable::from_csv_str(&s).unwrap();
    }
    for s in seeds("parse_path_csv") {
        GridPath::from_csv_str(&s).unwrap();
    }
    for s in seeds("parse_records_csv") {
        assert!(!parse_records_csv(&s).unwrap().is_empty());
    }
}

fn csvish() -> impl Strategy<Value = String> {
    prop::collection::vec(
        prop_oneof![
            Just("t,value,mode\n".to_string()),
            Just("t,G\n".to_string()),
            Just("n,rep,metric,error,runtime_ms,seed\n".to_string()),
            "[0-9.eE+-]{0,6},[0-9.eE+-]{0,6},(step|linear|x)\n",
            "[0-9.-]{0,5},[0-9.-]{0,5}\n",
            "[0-9]{1,3},[0-9],(arrival|queue|kmt),[0-9.-]{1,4},[0-9.]{1,3},[0-9]\n",
            ".{0,8}",
        ],
        0..8,
    )
    .prop_map(|v| v.concat())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn parsers_never_panic(text in csvish()) {
        if let Ok(p) = GridPath::from_csv_str(&text) {
            let back = GridPath::from_csv_str(&p.to_csv()).unwrap();
            prop_assert_eq!(back.knots(), p.knots());
        }
        if let Ok(t) = CdfTable::from_csv_str(&text) {
            prop_assert!(t.quantile(0.5).is_finite());
        }
        let _ = parse_records_csv(&text);
    }

    #[test]
    fn config_parser_never_panics(text in "[a-z_\\[\\]=\" 0-9.,\n]{0,80}") {
        if let Ok(cfg) = ExperimentConfig::from_toml_str(&text) {
            prop_assert_eq!(ExperimentConfig::from_toml_str(&cfg.to_toml()).unwrap(), cfg);
        }
    }
}
