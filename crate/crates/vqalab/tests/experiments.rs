//! Experiment runners, CSV contracts and the command-line interface.

use std::path::Path;
use std::process::Command;

use vqalab::experiments::{
    run, run_cknorm, run_learn, run_pauli_dist, run_variance, summary_path, to_csv_bytes, ExperimentConfig, Output,
};

fn config(json: &str) -> ExperimentConfig {
    ExperimentConfig::from_json(json).unwrap()
}

fn header(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).lines().next().unwrap_or("").to_string()
}

const VARIANCE: &str = r#"{
    "experiment": "variance",
    "ansatz": {"kind": "mps", "k": 2, "depth": 2},
    "n": [4, 5],
    "observables": ["global0", "local-avg"],
    "samples": 300,
    "seed": 42
}"#;

#[test]
fn variance_output_is_byte_identical_across_runs() {
    let cfg = config(VARIANCE);
    let a = to_csv_bytes(&run_variance(&cfg).unwrap()).unwrap();
    let b = to_csv_bytes(&run_variance(&cfg).unwrap()).unwrap();
    assert_eq!(a, b);
    assert_eq!(header(&a), "experiment_id,n,k,observable,statistic,value,se,samples,seed");
    let mut other = cfg.clone();
    other.seed = 43;
    assert_ne!(a, to_csv_bytes(&run_variance(&other).unwrap()).unwrap());
}

#[test]
fn variance_rows_have_positive_se_and_consistent_decomposition() {
    let rows = run_variance(&config(VARIANCE)).unwrap();
    for r in rows.iter().filter(|r| matches!(r.statistic.as_str(), "mean" | "second_moment" | "variance")) {
        assert!(r.se > 0.0, "{r:?}");
        assert_eq!(r.samples, 300);
    }
    for d in rows.iter().filter(|r| r.statistic == "z_decomposition") {
        let v = rows
            .iter()
            .find(|r| r.n == d.n && r.observable == d.observable && r.statistic == "variance")
            .unwrap();
        assert!((d.value - v.value).abs() <= 3.0 * d.se.hypot(v.se), "{d:?} vs {v:?}");
    }
    for e in rows.iter().filter(|r| r.statistic == "exact_variance") {
        let v = rows
            .iter()
            .find(|r| r.n == e.n && r.observable == e.observable && r.statistic == "variance")
            .unwrap();
        assert!((e.value - v.value).abs() <= 4.0 * v.se, "{e:?} vs {v:?}");
    }
}

#[test]
fn zero_samples_give_header_only() {
    let mut cfg = config(VARIANCE);
    cfg.samples = 0;
    let bytes = to_csv_bytes(&run_variance(&cfg).unwrap()).unwrap();
    assert_eq!(String::from_utf8(bytes).unwrap(), "experiment_id,n,k,observable,statistic,value,se,samples,seed\n");
}

#[test]
fn one_iteration_gives_one_row_per_seed() {
    let cfg = config(
        r#"{
        "experiment": "learn",
        "ansatz": {"kind": "mps", "k": 2, "depth": 1},
        "n": [4],
        "observables": ["local-avg"],
        "seeds": 3,
        "seed": 7,
        "spsa": {"iterations": 1}
    }"#,
    );
    let rows = run_learn(&cfg).unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r.iteration == 1 && (0.0..=1.0).contains(&r.infidelity)));
    let mut seeds: Vec<u64> = rows.iter().map(|r| r.seed).collect();
    seeds.dedup();
    assert_eq!(seeds.len(), 3);
}

#[test]
fn identity_ansatz_gives_unit_k_norm_for_z() {
    // Depth 0: no blocks, so every sample sees Z_n itself.
    let cfg = config(
        r#"{
        "experiment": "cknorm",
        "ansatz": {"kind": "mps", "k": 2, "depth": 0},
        "n": [4, 6],
        "observables": ["z:last"],
        "samples": 5,
        "seed": 1
    }"#,
    );
    let rows = run_cknorm(&cfg).unwrap();
    let k: Vec<_> = rows.iter().filter(|r| r.statistic == "k_norm").collect();
    assert_eq!(k.len(), 2);
    for r in k {
        assert_eq!(r.value, 1.0);
        assert_eq!(r.se, 0.0);
    }
}

#[test]
fn exhaustive_pauli_probabilities_sum_to_one() {
    let cfg = config(
        r#"{
        "experiment": "pauli-dist",
        "ansatz": {"kind": "mps", "k": 2, "depth": 2},
        "n": [4],
        "observables": ["proj0:last", "global0"],
        "queries": "all",
        "samples": 3,
        "seed": 9
    }"#,
    );
    let (rows, summary) = run_pauli_dist(&cfg).unwrap();
    for obs in ["proj0:4", "global0"] {
        for s in 0..3 {
            let total: f64 = rows
                .iter()
                .filter(|r| r.theta_sample_id == s && r.observable.starts_with(obs.split(':').next().unwrap()))
                .map(|r| r.probability)
                .sum();
            assert!((total - 1.0).abs() < 1e-9, "{obs} sample {s}: {total}");
        }
    }
    assert!(!summary.is_empty());
}

#[test]
fn pauli_summary_goes_to_sibling_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("dist.csv");
    let cfg = config(
        r#"{
        "experiment": "pauli-dist",
        "ansatz": {"kind": "mps", "k": 2, "depth": 1},
        "n": [5],
        "observables": ["proj0:last"],
        "samples": 2,
        "seed": 2
    }"#,
    );
    let o = run(&cfg, None).unwrap();
    assert!(matches!(o, Output::Pauli { .. }));
    o.write(&out).unwrap();
    assert!(out.exists());
    assert!(summary_path(&out).exists());
}

#[test]
fn schema_lists_every_config_field() {
    let schema: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schema/experiment.schema.json")).unwrap())
            .unwrap();
    let mut props: Vec<String> = schema["properties"].as_object().unwrap().keys().cloned().collect();
    props.sort();
    let full = config(VARIANCE);
    let mut fields: Vec<String> =
        serde_json::to_value(&full).unwrap().as_object().unwrap().keys().cloned().collect();
    fields.sort();
    assert_eq!(props, fields);
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut count = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let p = entry.unwrap().path();
        if p.extension().is_some_and(|e| e == "json") {
            ExperimentConfig::load(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
            count += 1;
        }
    }
    assert!(count >= 8);
}

fn cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_vqalab")).args(args).output().unwrap()
}

#[test]
fn cli_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.json");
    std::fs::write(&good, VARIANCE).unwrap();
    let out = dir.path().join("v.csv");
    let o = cli(&["variance", "--config", good.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(std::fs::read_to_string(&out).unwrap().starts_with("experiment_id,"));

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"experiment": "variance", "ansatz": {"kind": "mps", "k": 2, "depth": 2}, "bogus": 1}"#)
        .unwrap();
    let o = cli(&["variance", "--config", bad.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));

    let o = cli(&["learn", "--config", good.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));

    // Too few samples for the standard-error checks: verification fails.
    let verify = dir.path().join("verify.json");
    std::fs::write(
        &verify,
        r#"{"experiment": "verify", "suite": "design", "ansatz": {"kind": "mps", "k": 2, "depth": 2},
            "samples": 50, "seed": 1,
            "verify": {"families": [{"kind": "hea", "width": 2, "depth": 1}], "moments": [2], "design_tuples": 3}}"#,
    )
    .unwrap();
    let o = cli(&["verify", "--config", verify.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
}
