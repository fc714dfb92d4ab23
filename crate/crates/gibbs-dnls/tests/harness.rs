use std::fs;
use std::path::Path;
use std::process::Command;

use gibbs_dnls::record::{emit, Payload, RunRecord, RECORD_FILE};
use gibbs_dnls::{parse_config, run, Experiment, HarnessError, Parallel};
use gibbs_dnls_core::Sequential;

fn config_errors(text: &str) -> Vec<String> {
    match parse_config(text) {
        Err(HarnessError::Config(e)) => e,
        other => panic!("expected a configuration error, got {other:?}"),
    }
}

#[test]
fn minimal_sample_config_is_valid() {
    let c = parse_config(r#"{"experiment":"sample","parameters":{"N":4,"count":10,"seed":1}}"#)
        .unwrap();
    match c.experiment {
        Experiment::Sample(p) => assert_eq!((p.band, p.count, p.seed), (4, 10, 1)),
        other => panic!("{other:?}"),
    }
}

#[test]
fn unknown_experiment_names_the_field() {
    let e = config_errors(r#"{"experiment":"bogus"}"#);
    assert_eq!(e.len(), 1);
    assert!(e[0].starts_with("experiment:"), "{e:?}");
}

#[test]
fn small_rate_ensembles_are_rejected() {
    let e = config_errors(r#"{"experiment":"cauchy_rate","parameters":{"count":10}}"#);
    assert_eq!(
        e,
        vec!["parameters.count: 10 is below the minimum 100".to_string()]
    );
}

#[test]
fn every_violation_is_listed() {
    let e = config_errors(
        r#"{"experiment":"tails","extra":1,"parameters":{"theta":3,"count":"many","kappa":-1,"colour":"red"}}"#,
    );
    let joined = e.join("\n");
    for needle in ["extra", "theta", "count", "kappa", "colour"] {
        assert!(joined.contains(needle), "missing {needle} in {joined}");
    }
    assert_eq!(e.len(), 5, "{joined}");
    assert!(!config_errors("[1, 2]").is_empty());
    assert!(!config_errors("not json").is_empty());
}

#[test]
fn defaults_are_echoed_and_reparse_to_the_same_config() {
    for name in gibbs_dnls::config::EXPERIMENTS {
        let c = parse_config(&format!(r#"{{"experiment":"{name}"}}"#)).unwrap();
        let again = parse_config(&c.to_json().to_string()).unwrap();
        assert_eq!(c, again, "{name}");
    }
}

fn sample_record(threads: usize) -> RunRecord {
    let c = parse_config(r#"{"experiment":"sample","parameters":{"N":4,"count":10,"seed":1}}"#)
        .unwrap();
    run(&c, &Parallel::new(Some(threads)).unwrap()).unwrap()
}

#[test]
fn payloads_are_deterministic_and_thread_independent() {
    let a = sample_record(1);
    let b = sample_record(1);
    let c = sample_record(4);
    assert_eq!(a.payload_bytes(), b.payload_bytes());
    assert_eq!(a.payload_bytes(), c.payload_bytes());
    let cfg =
        parse_config(r#"{"experiment":"functionals","parameters":{"N":3,"count":40,"seed":9}}"#)
            .unwrap();
    let seq = run(&cfg, &Sequential).unwrap();
    let par = run(&cfg, &Parallel::new(Some(3)).unwrap()).unwrap();
    assert_eq!(seq.payload_bytes(), par.payload_bytes());
}

#[test]
fn records_reproduce_from_their_embedded_config() {
    let a = sample_record(2);
    let again = parse_config(&a.config.to_string()).unwrap();
    let b = run(&again, &Sequential).unwrap();
    assert_eq!(a.payload_bytes(), b.payload_bytes());
    assert_eq!(a.seeds[0].master_seed, 1);
    assert_eq!(a.seeds[0].streams, "0..10");
}

fn read_dir(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&p).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

#[test]
fn emit_is_idempotent_and_newline_terminated() {
    let dir = tempfile::tempdir().unwrap();
    let record = sample_record(1);
    emit(&record, dir.path()).unwrap();
    let first = read_dir(dir.path());
    emit(&record, dir.path()).unwrap();
    assert_eq!(first, read_dir(dir.path()));
    let names: Vec<&str> = first.iter().map(|(n, _)| n.as_str()).collect();
    assert_eq!(
        names,
        [
            "ensemble.jsonl",
            "manifest.json",
            RECORD_FILE,
            "samples.csv"
        ]
    );
    for (name, bytes) in &first {
        assert_eq!(bytes.last(), Some(&b'\n'), "{name}");
    }
    let json: serde_json::Value = serde_json::from_slice(&first[2].1).unwrap();
    assert_eq!(json["experiment"], "sample");
    assert_eq!(json["verdicts"][0]["pass"], true);
}

#[test]
fn empty_payload_emits_valid_json() {
    let dir = tempfile::tempdir().unwrap();
    let record = RunRecord {
        experiment: "sample".into(),
        config: serde_json::json!({}),
        generator: "none".into(),
        seeds: vec![],
        wall_time_seconds: 0.0,
        payload: Payload::default(),
        verdicts: vec![],
    };
    emit(&record, dir.path()).unwrap();
    let json: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join(RECORD_FILE)).unwrap()).unwrap();
    assert_eq!(json["payload"]["tables"], serde_json::json!([]));
    assert!(record.pass());
}

#[test]
fn emit_surfaces_io_errors() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let err = emit(&sample_record(1), &blocker.join("sub")).unwrap_err();
    assert!(matches!(err, HarnessError::Io { .. }), "{err}");
}

/// Column order and number formatting of the functionals table, frozen.
#[test]
fn functionals_table_matches_golden_file() {
    let cfg = parse_config(
        r#"{"experiment":"functionals","parameters":{"N":2,"count":3,"seed":1,"kappa":2.5}}"#,
    )
    .unwrap();
    let record = run(&cfg, &Sequential).unwrap();
    let dir = tempfile::tempdir().unwrap();
    emit(&record, dir.path()).unwrap();
    let got = fs::read_to_string(dir.path().join("functionals.csv")).unwrap();
    let golden = include_str!("golden/functionals_N2_count3_seed1.csv");
    assert_eq!(got, golden);
}

#[test]
fn kernel_experiment_tables() {
    let cfg = parse_config(
        r#"{"experiment":"kernel_sum","parameters":{"ns":[0,3],"bands":[2,4],"eps":[0.5]}}"#,
    )
    .unwrap();
    let record = run(&cfg, &Sequential).unwrap();
    let t = record.payload.table("kernel").unwrap();
    assert_eq!(t.columns, ["eps", "n", "N", "sum", "bound_ratio"]);
    assert_eq!(t.rows.len(), 4);
    assert!(record.seeds.is_empty());
}

#[test]
fn flow_experiment_records_trajectory_and_snapshots() {
    let cfg = parse_config(
        r#"{"experiment":"flow","parameters":{"N":3,"t":0.05,"step":0.01,"snapshot_every":2,"initial":"single_mode"}}"#,
    )
    .unwrap();
    let record = run(&cfg, &Sequential).unwrap();
    assert!(record.pass(), "{:?}", record.verdicts);
    assert_eq!(record.payload.table("trajectory").unwrap().rows.len(), 6);
    assert_eq!(record.payload.streams[0].lines.len(), 3);
    assert_eq!(
        record.payload.table("trajectory").unwrap().columns,
        ["t", "mass", "energy", "F_u"]
    );
}

#[test]
fn cli_exit_codes() {
    let exe = env!("CARGO_BIN_EXE_gibbs-dnls");
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.json");
    fs::write(
        &good,
        r#"{"experiment":"sample","parameters":{"N":2,"count":5,"seed":3}}"#,
    )
    .unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(
        &bad,
        r#"{"experiment":"cauchy_rate","parameters":{"count":10}}"#,
    )
    .unwrap();
    let failing = dir.path().join("failing.json");
    fs::write(
        &failing,
        r#"{"experiment":"cauchy_rate","parameters":{"bands":[2,4],"count":100,"slope_min":5,"slope_max":6}}"#,
    )
    .unwrap();
    let out = dir.path().join("out");

    let status = |args: &[&str]| Command::new(exe).args(args).output().unwrap();
    let ok = status(&[
        "run",
        "--config",
        good.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--threads",
        "2",
    ]);
    assert_eq!(
        ok.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&ok.stderr)
    );
    assert!(String::from_utf8_lossy(&ok.stdout).starts_with("PASS "));
    assert!(out.join(RECORD_FILE).exists());
    assert_eq!(
        status(&["validate", "--config", good.to_str().unwrap()])
            .status
            .code(),
        Some(0)
    );

    let invalid = status(&["validate", "--config", bad.to_str().unwrap()]);
    assert_eq!(invalid.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&invalid.stderr).contains("below the minimum 100"));

    let red = status(&[
        "run",
        "--config",
        failing.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(red.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&red.stdout).starts_with("FAIL "));

    let missing = status(&[
        "run",
        "--config",
        dir.path().join("nope.json").to_str().unwrap(),
    ]);
    assert_eq!(missing.status.code(), Some(2));
}
