use hasimoto::harness::{
    content_hash, run_experiment, Mode, OutputFormat, Preset, ReferenceSpec, RunConfig, SchemeKind,
};

fn base(dir: &std::path::Path) -> RunConfig {
    RunConfig {
        n_modes: 32,
        step: 0.05,
        t_end: 0.2,
        out: dir.to_path_buf(),
        ..RunConfig::default()
    }
}

#[test]
fn manifest_hashes_match_files() {
    let d = tempfile::tempdir().unwrap();
    let cfg = RunConfig {
        mode: Mode::Simulate,
        ..base(d.path())
    };
    let run = run_experiment(&cfg).unwrap();
    assert_eq!(run.manifest.files.len(), 2);
    for entry in &run.manifest.files {
        let bytes = std::fs::read(d.path().join(&entry.path)).unwrap();
        assert_eq!(entry.bytes, bytes.len());
        assert_eq!(entry.sha256, content_hash(&bytes));
    }
    let text = std::fs::read_to_string(&run.manifest_path).unwrap();
    let m: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(m["config"]["scheme"], "scheme_a_4");
    assert_eq!(m["config_hash"], run.manifest.config_hash);
}

#[test]
fn converge_mode_second_order() {
    let d = tempfile::tempdir().unwrap();
    let cfg = RunConfig {
        mode: Mode::Converge,
        scheme: SchemeKind::SchemeA2,
        step: 1.0 / 256.0,
        sweep: 4,
        t_end: 0.5,
        ..base(d.path())
    };
    let run = run_experiment(&cfg).unwrap();
    let slope = run.manifest.summary["slope"].as_f64().unwrap();
    assert!((1.75..=2.25).contains(&slope), "{slope}");
    let csv = std::fs::read_to_string(d.path().join("convergence.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
}

#[test]
fn rough_scheme_b_conserve_json() {
    let d = tempfile::tempdir().unwrap();
    let cfg = RunConfig {
        mode: Mode::Conserve,
        preset: Preset::Rough,
        scheme: SchemeKind::SchemeB,
        format: OutputFormat::Json,
        ..base(d.path())
    };
    let run = run_experiment(&cfg).unwrap();
    let s = &run.manifest.summary;
    assert!(s["max_unit_defect"].as_f64().unwrap() < 1e-12);
    assert!(s["max_fp_iterations"].as_u64().unwrap() >= 1);
    let table: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.path().join("conserved.json")).unwrap())
            .unwrap();
    assert!(!table.is_null());
}

#[test]
fn reference_on_a_finer_grid() {
    let d = tempfile::tempdir().unwrap();
    let cfg = RunConfig {
        mode: Mode::Converge,
        preset: Preset::Rough,
        scheme: SchemeKind::SchemeB,
        step: 0.1,
        sweep: 2,
        reference: ReferenceSpec {
            scheme: None,
            step: Some(0.0125),
            n_modes: Some(64),
        },
        ..base(d.path())
    };
    let run = run_experiment(&cfg).unwrap();
    let s = &run.manifest.summary;
    assert_eq!(s["reference_modes"], 64);
    assert_eq!(s["reference_scheme"], "scheme_b");
    let rows = s["rows"].as_array().unwrap();
    assert!(rows.iter().all(|r| r["error"].as_f64().unwrap() > 0.0));
}

#[test]
fn circle_is_stationary() {
    // A great circle has κ = 1, τ = 0 and its tangent only rotates in its own plane.
    let d = tempfile::tempdir().unwrap();
    let cfg = RunConfig {
        mode: Mode::Filament,
        preset: Preset::Circle,
        ..base(d.path())
    };
    let run = run_experiment(&cfg).unwrap();
    assert!(run.files.iter().any(|f| f.ends_with("filament.csv")));
    let base_csv = std::fs::read_to_string(d.path().join("base_point.csv")).unwrap();
    for line in base_csv.lines().skip(1) {
        let gap: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert!(gap < 1e-8);
    }
}
