use std::path::Path;
use std::process::Command;

use proptest::prelude::*;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use irrlab::lab::{emit, render, run, Artifact, ExperimentConfig, ExperimentKind, Format, FormatChoice, RunManifest};

const KINDS: [ExperimentKind; 8] = [
    ExperimentKind::Simulate,
    ExperimentKind::Phi,
    ExperimentKind::Irregularity,
    ExperimentKind::Average,
    ExperimentKind::Ode,
    ExperimentKind::Geometry,
    ExperimentKind::Prevalence,
    ExperimentKind::Moments,
];

fn small(kind: ExperimentKind, dir: &Path) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(kind);
    cfg.grid.n = 512;
    cfg.grid.levels = 4;
    cfg.grid.j_max = 12;
    cfg.mc.samples = 2;
    cfg.mc.seed = 11;
    cfg.geometry.max_nodes = 256;
    cfg.geometry.eps = vec![0.125, 0.0625, 0.03125];
    cfg.output.dir = dir.to_path_buf();
    cfg
}

fn manifest(dir: &Path) -> RunManifest {
    serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn every_kind_runs_on_a_small_grid() {
    for kind in KINDS {
        if kind == ExperimentKind::Moments {
            continue;
        }
        let dir = tempfile::tempdir().unwrap();
        let m = run(&small(kind, dir.path())).unwrap();
        assert!(m.succeeded(), "{}: {:?}", kind.as_str(), m.stages);
        assert!(!m.files.is_empty());
        assert_eq!(manifest(dir.path()).files, m.files);
    }
}

#[test]
fn manifest_checksums_match_the_files() {
    let dir = tempfile::tempdir().unwrap();
    let m = run(&small(ExperimentKind::Irregularity, dir.path())).unwrap();
    for f in &m.files {
        let bytes = std::fs::read(dir.path().join(&f.name)).unwrap();
        let digest: String = Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect();
        assert_eq!(digest, f.sha256, "{}", f.name);
        assert_eq!(bytes.len() as u64, f.bytes);
    }
    let mut names: Vec<_> = m.files.iter().map(|f| f.name.clone()).collect();
    names.sort();
    assert_eq!(names, m.files.iter().map(|f| f.name.clone()).collect::<Vec<_>>());
}

#[test]
fn thread_count_does_not_change_output() {
    let one = tempfile::tempdir().unwrap();
    let four = tempfile::tempdir().unwrap();
    let pool = |k| rayon::ThreadPoolBuilder::new().num_threads(k).build().unwrap();
    let a = pool(1).install(|| run(&small(ExperimentKind::Prevalence, one.path())).unwrap());
    let b = pool(4).install(|| run(&small(ExperimentKind::Prevalence, four.path())).unwrap());
    assert_eq!(a.files, b.files);
}

#[test]
fn format_choice_selects_extensions() {
    for (choice, csv, json) in
        [(FormatChoice::Csv, true, false), (FormatChoice::Json, false, true), (FormatChoice::Both, true, true)]
    {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = small(ExperimentKind::Phi, dir.path());
        cfg.output.format = choice;
        let m = run(&cfg).unwrap();
        let has = |ext: &str| m.files.iter().any(|f| f.name == format!("phi_table.{ext}"));
        assert_eq!((has("csv"), has("json")), (csv, json), "{choice:?}");
        // summaries exist in every mode
        assert!(m.files.iter().any(|f| f.name == "phi_summary.json"));
    }
}

#[test]
fn config_files_are_strict() {
    let ok = "schema = 1\nkind = \"phi\"\n[grid]\nn = 1024\n";
    assert_eq!(ExperimentConfig::from_toml(ok).unwrap().grid.n, 1024);
    for bad in [
        "kind = \"phi\"\n",
        "schema = 2\nkind = \"phi\"\n",
        "schema = 1\nkind = \"phi\"\n[grid]\nnodes = 4\n",
        "schema = 1\nkind = \"phi\"\nverbose = true\n",
        "schema = 1\nkind = \"nope\"\n",
    ] {
        assert!(ExperimentConfig::from_toml(bad).is_err(), "{bad}");
    }
}

#[test]
fn config_round_trips_for_every_kind() {
    for kind in KINDS {
        let cfg = ExperimentConfig::new(kind);
        let back = ExperimentConfig::from_toml(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.hash(), cfg.hash());
    }
}

#[test]
fn json_output_is_sorted_with_seventeen_digits() {
    let dir = tempfile::tempdir().unwrap();
    let a = Artifact::summary("s", &json!({"zeta": 0.1, "alpha": 1, "mid": {"b": 2.0, "a": -1e-300}})).unwrap();
    let text = std::fs::read_to_string(emit(&a, Format::Json, dir.path()).unwrap()).unwrap();
    let keys: Vec<usize> =
        ["\"alpha\"", "\"mid\"", "\"zeta\"", "\"a\"", "\"b\""].iter().map(|k| text.find(k).unwrap()).collect();
    assert!(keys[0] < keys[1] && keys[1] < keys[2] && keys[3] < keys[4]);
    assert!(text.contains("1.0000000000000001e-1"));
    assert!(text.contains("-1.0000000000000000e-300"));
    let back: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(back["zeta"].as_f64(), Some(0.1));
}

proptest! {
    #[test]
    fn csv_floats_round_trip(x in prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO) {
        let a = Artifact::table("t", &["x"], vec![vec![json!(x)]]);
        let text = render(&a, Format::Csv).unwrap();
        let cell = text.lines().nth(1).unwrap();
        prop_assert_eq!(cell.parse::<f64>().unwrap(), x);
    }
}

fn cli() -> Command {
    Command::new(env!("CARGO_BIN_EXE_irrlab"))
}

#[test]
fn cli_runs_and_reports_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("run.toml");
    let mut cfg = small(ExperimentKind::Simulate, &dir.path().join("out"));
    cfg.output.format = FormatChoice::Json;
    std::fs::write(&cfg_path, cfg.to_toml().unwrap()).unwrap();
    let status = cli()
        .args(["simulate", "--config"])
        .arg(&cfg_path)
        .args(["--seed", "3", "--format", "csv", "--threads", "2", "--out"])
        .arg(dir.path().join("cli"))
        .status()
        .unwrap();
    assert!(status.success());
    let m = manifest(&dir.path().join("cli"));
    assert_eq!(m.seed, 3);
    assert!(m.files.iter().any(|f| f.name.ends_with(".csv")));

    let wrong_kind = cli().args(["phi", "--config"]).arg(&cfg_path).status().unwrap();
    assert_eq!(wrong_kind.code(), Some(2));
    std::fs::write(&cfg_path, "schema = 1\nkind = \"simulate\"\ntypo = 1\n").unwrap();
    let bad = cli().args(["simulate", "--config"]).arg(&cfg_path).status().unwrap();
    assert_eq!(bad.code(), Some(2));
}

#[test]
fn cli_exits_nonzero_on_failed_stage() {
    let dir = tempfile::tempdir().unwrap();
    let out = cli().args(["moments", "--out"]).arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAILED"));
    assert!(dir.path().join("manifest.json").exists());
}
