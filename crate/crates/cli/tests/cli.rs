use std::path::PathBuf;
use std::process::Command as Proc;

use indextwo_cli::model::ExpectationSpec;
use indextwo_cli::{
    emit_model_file, emit_report, fixture_file_name, fixture_model, parse_model_file, run_command, CliError, Command,
    Flags, Format, Report, FIXTURE_NAMES,
};
use serde_json::Value;

fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data")
}

fn shipped(name: &str) -> Vec<u8> {
    std::fs::read(data_dir().join(fixture_file_name(name))).unwrap()
}

fn run(cmd: Command, name: &str) -> Report {
    let m = parse_model_file(&shipped(name)).unwrap();
    run_command(cmd, &m, &Flags::default())
}

fn payload<'a>(r: &'a Report, key: &str) -> &'a Value {
    r.payload.get(key).unwrap_or_else(|| panic!("missing payload key {key}"))
}

#[test]
fn fix_b_file_parses() {
    let m = parse_model_file(&shipped("B")).unwrap();
    assert_eq!(m.ambient_dim, 2);
    assert!(matches!(m.expectation, Some(ExpectationSpec::Involution { .. })));
}

#[test]
fn oversized_matrix_is_a_dimension_mismatch() {
    let text = r#"{
        "name": "bad",
        "ambient_dim": 2,
        "algebra_a": { "generators": [[[[1,0],[0,0],[0,0]],[[0,0],[1,0],[0,0]],[[0,0],[0,0],[1,0]]]] }
    }"#;
    assert!(matches!(
        parse_model_file(text.as_bytes()),
        Err(CliError::DimensionMismatch { .. })
    ));
}

#[test]
fn empty_and_malformed_files_are_parse_errors() {
    assert!(matches!(parse_model_file(b""), Err(CliError::Parse { .. })));
    assert!(matches!(parse_model_file(b"  \n"), Err(CliError::Parse { .. })));
    match parse_model_file(b"{\n  \"name\": \"x\",\n  oops\n}") {
        Err(CliError::Parse { line, .. }) => assert_eq!(line, 3),
        other => panic!("expected a parse error, got {other:?}"),
    }
    let unknown = br#"{"name": "x", "ambient_dim": 1, "algebra_a": {"generators": []}, "extra": 1}"#;
    assert!(matches!(parse_model_file(unknown), Err(CliError::Parse { .. })));
}

#[test]
fn incomplete_expectation_is_a_missing_field() {
    let text = r#"{
        "name": "half",
        "ambient_dim": 2,
        "algebra_a": { "generators": [] },
        "algebra_b": { "generators": [] },
        "expectation": { "kind": "involution" }
    }"#;
    assert!(matches!(parse_model_file(text.as_bytes()), Err(CliError::MissingField(_))));
}

#[test]
fn shipped_files_round_trip_and_match_the_generator() {
    for name in FIXTURE_NAMES {
        let bytes = shipped(name);
        let m = parse_model_file(&bytes).unwrap();
        let again = parse_model_file(emit_model_file(&m).as_bytes()).unwrap();
        assert_eq!(m, again, "{name}");
        assert_eq!(emit_model_file(&fixture_model(name, 0).unwrap()).as_bytes(), &bytes[..], "{name}");
    }
}

#[test]
fn index_on_fix_c_is_two() {
    let r = run(Command::Index, "C");
    assert!(r.pass());
    assert!(r.get("index_two").unwrap().residual < 1e-9);
    let idx = payload(&r, "index").as_array().unwrap();
    for (i, row) in idx.iter().enumerate() {
        for (j, z) in row.as_array().unwrap().iter().enumerate() {
            let want = if i == j { 2.0 } else { 0.0 };
            assert!((z[0].as_f64().unwrap() - want).abs() < 1e-9);
            assert!(z[1].as_f64().unwrap().abs() < 1e-9);
        }
    }
}

#[test]
fn classify_on_fix_c_is_all_false_and_consistent() {
    let r = run(Command::Classify, "C");
    assert!(r.pass());
    assert_eq!(payload(&r, "projections_equivalent"), &Value::Bool(false));
    assert_eq!(payload(&r, "unitary_quasi_basis"), &Value::Bool(false));
    assert_eq!(payload(&r, "two_z_inner"), &Value::Bool(false));
    assert_eq!(payload(&r, "consistent"), &Value::Bool(true));
}

#[test]
fn roundtrip_on_fix_a_passes_both_directions() {
    let r = run(Command::Roundtrip, "A");
    assert!(r.pass());
    assert!(r.records.iter().any(|c| c.name.starts_with("gf/")));
    assert!(r.records.iter().any(|c| c.name.starts_with("fg_xb/")));
    assert!(r.records.iter().any(|c| c.name.starts_with("fg_bminus/")));
}

#[test]
fn c3_control_fails_with_the_index() {
    let r = run(Command::Index, "C3");
    assert!(!r.pass());
    // |diag(2, 2, 1) - 2·1| = 1
    let idx = r.get("index_two").unwrap();
    assert!(!idx.pass && (idx.residual - 1.0).abs() < 1e-9);
}

#[test]
fn empty_report_is_valid_json() {
    let r = Report::new("validate", "none", 0);
    let v: Value = serde_json::from_str(&emit_report(&r, Format::Json)).unwrap();
    assert_eq!(v["records"], Value::Array(vec![]));
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["summary"]["pass"], true);
}

#[test]
fn fix_b_classify_report_carries_the_witness() {
    let r = run(Command::Classify, "B");
    let v: Value = serde_json::from_str(&emit_report(&r, Format::Json)).unwrap();
    let u = &v["payload"]["classification"]["unitary_quasi_basis"];
    let rows = u.as_array().expect("witness u serialized as a matrix");
    assert_eq!(rows.len(), 2);
    // off-diagonal symmetry: zero diagonal
    assert!(rows[0][0][0].as_f64().unwrap().abs() < 1e-9);
    assert!(rows[1][1][0].as_f64().unwrap().abs() < 1e-9);
}

#[test]
fn json_and_text_agree_on_pass_fail() {
    for (cmd, name) in [(Command::Index, "A"), (Command::Classify, "C"), (Command::Index, "C3")] {
        let r = run(cmd, name);
        let v: Value = serde_json::from_str(&emit_report(&r, Format::Json)).unwrap();
        let text = emit_report(&r, Format::Text);
        let lines: Vec<&str> = text.lines().filter(|l| l.starts_with("  PASS") || l.starts_with("  FAIL")).collect();
        let recs = v["records"].as_array().unwrap();
        assert_eq!(lines.len(), recs.len());
        for (l, rec) in lines.iter().zip(recs) {
            assert_eq!(l.starts_with("  PASS"), rec["pass"].as_bool().unwrap());
            assert!(l.contains(rec["name"].as_str().unwrap()));
        }
        let last = text.lines().last().unwrap();
        assert_eq!(last.starts_with("PASS"), v["summary"]["pass"].as_bool().unwrap());
    }
}

#[test]
fn pass_means_every_residual_is_within_tolerance() {
    let r = run(Command::Basic, "B");
    for c in &r.records {
        assert_eq!(c.pass, c.residual <= c.tolerance, "{}", c.name);
    }
}

fn bin() -> Proc {
    Proc::new(env!("CARGO_BIN_EXE_indextwo"))
}

#[test]
fn binary_is_deterministic_and_uses_exit_codes() {
    let out1 = bin().args(["classify", "--fixture", "D", "--seed", "7"]).output().unwrap();
    let out2 = bin().args(["classify", "--fixture", "D", "--seed", "7"]).output().unwrap();
    assert_eq!(out1.status.code(), Some(0));
    assert_eq!(out1.stdout, out2.stdout);

    let c3 = bin().args(["index", "--fixture", "C3"]).output().unwrap();
    assert_eq!(c3.status.code(), Some(1));
    let missing = bin().args(["index"]).output().unwrap();
    assert_eq!(missing.status.code(), Some(2));
    let path = data_dir().join("fix_b.json");
    let ok = bin()
        .args(["validate", "--model-file", path.to_str().unwrap(), "--format", "text"])
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0));
    assert!(String::from_utf8(ok.stdout).unwrap().starts_with("validate on fixture B"));
}

#[test]
fn fixture_all_writes_the_catalog() {
    let dir = std::env::temp_dir().join(format!("indextwo-catalog-{}", std::process::id()));
    let st = bin()
        .args(["fixture", "--all", "--out", dir.to_str().unwrap()])
        .status()
        .unwrap();
    assert!(st.success());
    for name in FIXTURE_NAMES {
        let written = std::fs::read(dir.join(fixture_file_name(name))).unwrap();
        assert_eq!(written, shipped(name), "{name}");
    }
    std::fs::remove_dir_all(&dir).unwrap();
}
