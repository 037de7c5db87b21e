use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn corpus(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus").join(name)
}

fn awpp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_awpp")).args(args).output().expect("spawn awpp")
}

fn path(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}", String::from_utf8_lossy(&out.stdout))
    })
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn coin_run_on_empty_input() {
    let out = awpp(&["afftm", "run", path(&corpus("fair-coin.json")), "--input", ""]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let report = json(&out);
    assert_eq!(report["format_version"], 1);
    assert_eq!(report["rows"][0]["alpha"], "1/2");
    assert_eq!(report["rows"][0]["alpha_decimal"], "0.5");
    assert_eq!(report["rows"][0]["decision"], "undecided");
}

#[test]
fn acceptor_convention_flips() {
    let file = corpus("always-accept.json");
    let plain = json(&awpp(&["afftm", "run", path(&file)]));
    assert_eq!(plain["rows"][0]["acceptance"], "1/1");
    assert_eq!(plain["rows"][0]["decision"], "accept");
    let flipped = json(&awpp(&["afftm", "run", path(&file), "--accept-on-one"]));
    assert_eq!(flipped["rows"][0]["acceptance"], "0/1");
    assert_eq!(flipped["rows"][0]["decision"], "reject");
}

#[test]
fn verify_reductions_over_corpus() {
    let out = awpp(&["verify", "reductions", path(&corpus(""))]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let report = json(&out);
    let rows = report["rows"].as_array().unwrap();
    assert!(rows.len() > 20);
    assert!(rows.iter().all(|r| r["holds"] == true));
    let machines: std::collections::BTreeSet<&str> = rows.iter().map(|r| r["machine"].as_str().unwrap()).collect();
    assert_eq!(machines.len(), 7);
}

#[test]
fn crosscheck_single_file_csv() {
    let out = awpp(&["reduce", "crosscheck", path(&corpus("first-bit.json")), "--format", "csv", "--max-len", "1"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("machine,identity,input,parameters,lhs,rhs,holds\n"));
}

fn compile_coin(dir: &Path) -> PathBuf {
    let target = dir.join("coin.json");
    let out = awpp(&["compile", path(&corpus("fair-coin.json")), "--input", "1", "--out", path(&target)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    target
}

#[test]
fn compiled_circuit_runs_to_the_machine_weights() {
    let dir = tempfile::tempdir().unwrap();
    let circuit = compile_coin(dir.path());
    let out = awpp(&["circuit", "run", path(&circuit)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let rows = json(&out)["rows"].as_array().unwrap().clone();
    let values: Vec<&str> = rows.iter().map(|r| r["value"].as_str().unwrap()).collect();
    assert_eq!(values, ["1/2", "1/2"]);
    let out = awpp(&["circuit", "validate", path(&circuit)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
}

#[test]
fn tampered_circuit_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let circuit = compile_coin(dir.path());
    let mut file: Value = serde_json::from_str(&std::fs::read_to_string(&circuit).unwrap()).unwrap();
    let column = file["gates"][0]["matrix"].as_object_mut().unwrap().values_mut().next().unwrap();
    let entry = column.as_object_mut().unwrap().values_mut().next().unwrap();
    *entry = Value::String("7/2".into());
    let tampered = dir.path().join("tampered.json");
    std::fs::write(&tampered, serde_json::to_string(&file).unwrap()).unwrap();
    for sub in ["run", "validate"] {
        let out = awpp(&["circuit", sub, path(&tampered)]);
        assert_eq!(out.status.code(), Some(1), "{sub}");
        assert!(stderr(&out).contains("sums to"), "{}", stderr(&out));
    }
}

#[test]
fn decimal_weight_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(corpus("fair-coin.json")).unwrap().replace("\"1/2\"", "\"0.5\"");
    let bad = dir.path().join("decimal.json");
    std::fs::write(&bad, text).unwrap();
    let out = awpp(&["afftm", "run", path(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("transitions[0].weight"), "{}", stderr(&out));
}

#[test]
fn unknown_field_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(corpus("fair-coin.json"))
        .unwrap()
        .replacen('{', "{\n  \"colour\": \"red\",", 1);
    let bad = dir.path().join("extra.json");
    std::fs::write(&bad, text).unwrap();
    let out = awpp(&["afftm", "validate", path(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("colour"), "{}", stderr(&out));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(awpp(&["afftm", "frobnicate"]).status.code(), Some(2));
    assert_eq!(awpp(&["afftm", "run", "/nonexistent/machine.json"]).status.code(), Some(2));
    let wrong_kind = awpp(&["reduce", "gap-to-afftm", path(&corpus("fair-coin.json"))]);
    assert_eq!(wrong_kind.status.code(), Some(2));
    assert_eq!(awpp(&["--help"]).status.code(), Some(0));
}

#[test]
fn reports_are_deterministic_apart_from_timing() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let target = dir.path().join(name);
        let out = awpp(&[
            "afftm",
            "run",
            path(&corpus("cancellation.json")),
            "--max-len",
            "3",
            "--out",
            path(&target),
        ]);
        assert_eq!(out.status.code(), Some(0));
        let mut report: Value = serde_json::from_str(&std::fs::read_to_string(target).unwrap()).unwrap();
        for row in report["rows"].as_array_mut().unwrap() {
            row.as_object_mut().unwrap().remove("elapsed_us");
        }
        report
    };
    assert_eq!(run("a.json"), run("b.json"));
    let first = awpp(&["verify", "reductions", path(&corpus(""))]);
    let second = awpp(&["verify", "reductions", path(&corpus(""))]);
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn reduction_artifacts_chain() {
    let dir = tempfile::tempdir().unwrap();
    let aff = dir.path().join("aff.json");
    let out = awpp(&["reduce", "gap-to-afftm", path(&corpus("two-cell.json")), "--exponent", "2", "--out", path(&aff)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    // two-cell has gap 2 on "11", so alpha = 2 / 2^2
    let report = json(&awpp(&["afftm", "run", path(&aff), "--input", "11"]));
    assert_eq!(report["rows"][0]["alpha"], "1/2");
    let ntm = dir.path().join("ntm.json");
    let out = awpp(&["reduce", "afftm-to-gap", path(&corpus("fair-coin.json")), "--n", "0", "--out", path(&ntm)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let gap = json(&awpp(&["ntm", "gap", path(&ntm)]));
    // h = 4 * 2^1 and alpha = 1/2
    assert_eq!(gap["rows"][0]["gap"], "4");
}

#[test]
fn theory_commands_on_the_coin() {
    let coin = corpus("fair-coin.json");
    let veil = awpp(&["theory", "veil", path(&coin), "--cap", "40"]);
    assert_eq!(veil.status.code(), Some(0), "{}", stderr(&veil));
    let instance = json(&veil);
    assert_eq!(instance["p_nu"], "1/1");
    assert_eq!(instance["cap"], 40);
    assert_eq!(instance["catalogue"].as_object().unwrap().len(), 6);
    for sub in ["tomography", "causality"] {
        let out = awpp(&["theory", sub, path(&coin), "--cap", "40"]);
        assert_eq!(out.status.code(), Some(0), "{sub}: {}", stderr(&out));
    }
}

#[test]
fn validate_circuit_descriptor() {
    let dir = tempfile::tempdir().unwrap();
    let coin = corpus("fair-coin.json");
    let write = |name: &str, gates: &[usize], first: &str| {
        let mut measurements = vec!["u"; 15];
        measurements[0] = first;
        let body = serde_json::json!({ "gates": gates, "measurements": measurements });
        let p = dir.path().join(name);
        std::fs::write(&p, body.to_string()).unwrap();
        p
    };
    let ok = write("ok.json", &[0, 1], "noisy");
    let out = awpp(&["theory", "validate-circuit", path(&ok), "--machine", path(&coin)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(json(&out)["rows"][0]["allowed"], true);
    let gap = write("gap.json", &[1], "u");
    let out = awpp(&["theory", "validate-circuit", path(&gap), "--machine", path(&coin)]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["rows"][0]["allowed"], false);
}

#[test]
fn unique_sat_demo() {
    let out = awpp(&["demo", "unique-sat", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("and,1 & 2,2,1,1,true,true"), "{text}");
    assert!(text.contains("or,1 2,2,3,3,true,false"), "{text}");
    let single = json(&awpp(&["demo", "unique-sat", "--formula", "1 & -2 & 3", "--vars", "3"]));
    assert_eq!(single["rows"][0]["gap"], "1");
}

#[test]
fn layout_flag_prints_the_wire_map() {
    let out = awpp(&["compile", path(&corpus("fair-coin.json")), "--n", "0", "--layout"]);
    assert_eq!(out.status.code(), Some(0));
    let layout = json(&out);
    assert_eq!(layout["wires"], 15);
    assert_eq!(layout["cells"].as_array().unwrap().len(), 3);
    assert_eq!(layout["state_field"], serde_json::json!([2, 4]));
}
