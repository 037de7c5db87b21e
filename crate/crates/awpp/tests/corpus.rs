use std::path::PathBuf;

use awpp::formats::{
    afftm_to_file, ntm_to_file, parse_circuit, parse_formulas, parse_machine, parse_machine_str, read_text,
    to_pretty_json, CircuitFile, LoadedMachine, MachineFile,
};
use awpp_core::corpus;
use awpp_core::rational::{format_fraction, frac, int};

fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus")
}

#[test]
fn machine_files_match_builders() {
    for (name, m) in corpus::afftms() {
        let loaded = parse_machine(&corpus_dir().join(format!("{name}.json"))).unwrap();
        assert_eq!(loaded, LoadedMachine::AffTm(m), "{name}");
    }
    for (name, m) in corpus::ntms() {
        let loaded = parse_machine(&corpus_dir().join(format!("{name}.json"))).unwrap();
        assert_eq!(loaded, LoadedMachine::Ntm(m), "{name}");
    }
}

#[test]
fn parse_serialize_parse_is_identity() {
    let names: Vec<&str> = corpus::afftms()
        .into_iter()
        .map(|(n, _)| n)
        .chain(corpus::ntms().into_iter().map(|(n, _)| n))
        .collect();
    for name in names {
        let text = read_text(&corpus_dir().join(format!("{name}.json"))).unwrap();
        let first = parse_machine_str(&text).unwrap();
        let rendered = match &first {
            LoadedMachine::AffTm(m) => to_pretty_json(&afftm_to_file(m)),
            LoadedMachine::Ntm(m) => to_pretty_json(&ntm_to_file(m)),
        };
        assert_eq!(rendered, text, "{name} is not in canonical form");
        assert_eq!(parse_machine_str(&rendered).unwrap(), first);
    }
}

#[test]
fn fair_coin_has_two_halves() {
    let LoadedMachine::AffTm(m) = parse_machine(&corpus_dir().join("fair-coin.json")).unwrap() else {
        panic!("fair-coin is affine");
    };
    let q = m.state_id("q").unwrap();
    for a in 0..m.alphabet().len() {
        let weights: Vec<_> = m.row(q, a).iter().map(|r| r.annotation.clone()).collect();
        assert_eq!(weights, [frac(1, 2), frac(1, 2)]);
    }
}

#[test]
fn branch_weights_file_carries_the_figure_weights() {
    let text = read_text(&corpus_dir().join("branch-weights.json")).unwrap();
    let file: MachineFile = serde_json::from_str(&text).unwrap();
    let mut weights: Vec<String> = file
        .transitions
        .iter()
        .filter(|t| t.from.1 == "_")
        .filter_map(|t| t.weight.clone())
        .collect();
    weights.sort();
    let mut expected: Vec<String> = [int(2), int(-1), int(5), int(-4), frac(1, 2), frac(1, 2)]
        .iter()
        .map(format_fraction)
        .collect();
    expected.sort();
    assert_eq!(weights, expected);
    assert!(matches!(parse_machine_str(&text).unwrap(), LoadedMachine::AffTm(_)));
}

#[test]
fn formulas_match_the_demo_list() {
    let entries = parse_formulas(&corpus_dir().join("formulas/unique-sat.json")).unwrap();
    let demo = corpus::demo_formulas();
    assert_eq!(entries.len(), demo.len());
    for (entry, (name, f)) in entries.iter().zip(demo) {
        assert_eq!(entry.name, name);
        assert_eq!(entry.to_cnf().unwrap(), f);
    }
}

#[test]
fn circuit_files_round_trip() {
    for entry in std::fs::read_dir(corpus_dir().join("circuits")).unwrap() {
        let path = entry.unwrap().path();
        let c = parse_circuit(&path).unwrap();
        let again = CircuitFile::from_circuit(&c).into_circuit().unwrap();
        assert_eq!(again, c, "{}", path.display());
    }
}
