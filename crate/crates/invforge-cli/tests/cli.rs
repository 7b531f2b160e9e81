//! End-to-end checks of the command-line surface: output determinism,
//! documented JSON schemas, and the exit-code contract.

use std::process::{Command, Output};

fn invforge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_invforge"))
        .args(args)
        .env_remove("INVFORGE_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn identical_runs_are_byte_identical() {
    let args = [
        "find",
        "--channel",
        "dephasing_qunit",
        "--dim",
        "3",
        "--seed",
        "12",
    ];
    let a = invforge(&args);
    let b = invforge(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    // a different seed changes the lambda samples
    let c = invforge(&[
        "find",
        "--channel",
        "dephasing_qunit",
        "--dim",
        "3",
        "--seed",
        "13",
    ]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn find_prints_the_expected_qubit_tokens() {
    let out = invforge(&["find", "--channel", "bit_flip", "--dim", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("<S(1,0)>"), "missing first-family token:\n{text}");
    assert!(
        text.contains("<A(1,0)>/<D(1,0)>"),
        "missing second-family ratio:\n{text}"
    );
    assert!(text.contains("[first ]"));
    assert!(text.contains("[second]"));
}

#[test]
fn find_json_round_trips_through_the_catalog_schema() {
    let out = invforge(&[
        "find", "--channel", "adc", "--dim", "2", "--seed", "5", "--json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["channel"], "adc");
    let invariants = doc["invariants"].clone();
    let raws: Vec<invforge::CatalogEntryRaw> = serde_json::from_value(invariants).unwrap();
    assert!(!raws.is_empty());
    for raw in &raws {
        let entry = invforge::CatalogEntry::from_raw(raw).unwrap();
        assert_eq!(entry.dim, 2);
    }
    // spectral report carries one lambda pair per draw
    let eigen = doc["eigenoperators"].as_array().unwrap();
    assert!(eigen.iter().any(|e| e["op"] == "S(1,0)"));
    for e in eigen {
        assert_eq!(e["lambdas"].as_array().unwrap().len(), 5);
    }
}

#[test]
fn tables_reports_pass_rows_and_exit_zero() {
    let out = invforge(&["tables", "--dims", "3,4,5"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let row = text
        .lines()
        .find(|l| l.starts_with("gen_flip") && l.contains(" 3 "))
        .expect("gen_flip N=3 row");
    assert!(row.contains('6'));
    assert!(row.ends_with("PASS"));
    // every row passes
    assert!(!text.contains("FAIL"));

    let out = invforge(&["tables", "--dims", "3", "--json"]);
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["pass"], true);
    assert_eq!(doc["rows"].as_array().unwrap().len(), 8);
}

#[test]
fn verify_handles_the_negative_control() {
    let out = invforge(&["verify", "--channel", "gadc", "--dim", "2", "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("<S(1,0)>/<A(1,0)>"));
    assert!(text.contains("PASS"));
    assert!(text.contains("FAIL (negative control, expected)"));

    let out = invforge(&[
        "verify", "--channel", "gadc", "--dim", "2", "--seed", "3", "--json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let entries = doc["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 2);
    assert_eq!(entries[0]["pass"], true);
    assert_eq!(entries[1]["pass"], false);
    assert_eq!(entries[1]["expected_fail"], true);
}

#[test]
fn usage_errors_exit_two() {
    // unknown flag
    let out = invforge(&["find", "--channel", "bit_flip", "--dim", "2", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
    // unknown family
    let out = invforge(&["find", "--channel", "nonsense", "--dim", "2"]);
    assert_eq!(out.status.code(), Some(2));
    // qubit-only family at the wrong dimension
    let out = invforge(&["find", "--channel", "adc", "--dim", "3"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn validate_spec_files() {
    let dir = std::env::temp_dir();
    let good = dir.join("invforge_cli_good_spec.json");
    std::fs::write(
        &good,
        r#"{"name": "bit_flip", "dim": 2, "family_params": {"p": 0.25}}"#,
    )
    .unwrap();
    let out = invforge(&["validate", "--spec", good.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("PASS"));

    // explicit non-trace-preserving Kraus set fails with exit 1
    let bad = dir.join("invforge_cli_bad_spec.json");
    std::fs::write(
        &bad,
        r#"{"name": "broken", "dim": 2, "kraus": [[[[1,0],[0,0]],[[0,0],[0.5,0]]]]}"#,
    )
    .unwrap();
    let out = invforge(&["validate", "--spec", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("FAIL"));

    let out = invforge(&["validate", "--spec", good.to_str().unwrap(), "--json"]);
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["pass"], true);
    assert_eq!(doc["kraus_count"], 2);
}

#[test]
fn transmit_reports_accuracy() {
    let out = invforge(&[
        "transmit",
        "--channel",
        "depolarizing",
        "--dim",
        "2",
        "--symbols",
        "4",
        "--shots",
        "100000",
        "--message-len",
        "20",
        "--param",
        "p=0.5",
        "--seed",
        "11",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("accuracy"), "{text}");

    let out = invforge(&[
        "transmit",
        "--channel",
        "depolarizing",
        "--dim",
        "2",
        "--symbols",
        "4",
        "--shots",
        "exact",
        "--message-len",
        "20",
        "--param",
        "p=0.5",
        "--seed",
        "11",
        "--json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["accuracy"], 1.0);
    assert_eq!(doc["transcripts"].as_array().unwrap().len(), 20);
    assert_eq!(doc["shots"], "exact");
}

#[test]
fn seed_env_var_is_honored() {
    let base = invforge(&["find", "--channel", "bit_flip", "--dim", "2"]);
    let with_env = Command::new(env!("CARGO_BIN_EXE_invforge"))
        .args(["find", "--channel", "bit_flip", "--dim", "2"])
        .env("INVFORGE_SEED", "12345")
        .output()
        .unwrap();
    let explicit = invforge(&[
        "find", "--channel", "bit_flip", "--dim", "2", "--seed", "12345",
    ]);
    assert_eq!(with_env.stdout, explicit.stdout);
    assert_ne!(base.stdout, with_env.stdout);
}

#[test]
fn channels_lists_every_family() {
    let out = invforge(&["channels"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    for name in [
        "bit_flip",
        "phase_flip",
        "bit_phase_flip",
        "dephasing_qubit",
        "depolarizing",
        "pauli",
        "equiprobable_pauli",
        "adc",
        "gadc",
        "gen_pauli_channel",
        "gen_flip",
        "gen_phase",
        "gen_flip_phase",
        "transposition_flip",
        "dephasing_qunit",
        "adc_qunit",
        "gadc_qunit",
    ] {
        assert!(text.lines().any(|l| l.starts_with(name)), "missing {name}");
    }
}
