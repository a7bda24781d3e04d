use std::path::Path;
use std::process::Command;

fn hasimoto() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_hasimoto"));
    c.env_remove("HASIMOTO_THREADS");
    c
}

fn header(path: &Path) -> String {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .next()
        .unwrap()
        .to_string()
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn simulate_writes_tables_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("sim");
    let st = hasimoto()
        .args([
            "simulate",
            "--n-modes",
            "32",
            "--step",
            "0.01",
            "--t-end",
            "0.05",
            "--out",
        ])
        .arg(&out)
        .status()
        .unwrap();
    assert!(st.success());
    assert_eq!(
        header(&out.join("conserved.csv")),
        "t,energy_e,action_i,nls_mass,unit_defect,frame_defect"
    );
    assert_eq!(
        header(&out.join("final_state.csv")),
        "x,t_x,t_y,t_z,e1_x,e1_y,e1_z,e2_x,e2_y,e2_z,u_re,u_im"
    );
    let m = manifest(&out);
    assert_eq!(m["config"]["mode"], "simulate");
    assert_eq!(m["config"]["n_modes"], 32);
    assert_eq!(m["files"].as_array().unwrap().len(), 2);
    assert_eq!(m["summary"]["steps"], 5);
}

#[test]
fn flags_override_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.toml");
    std::fs::write(
        &cfg,
        "preset = \"circle\"\nscheme = \"scheme_b\"\nn_modes = 64\nstep = 0.05\nt_end = 0.1\nformat = \"json\"\n\n[reference]\nstep = 0.001\n",
    )
    .unwrap();
    let out = tmp.path().join("cons");
    let st = hasimoto()
        .args(["conserve", "--n-modes", "16", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(st.success());
    let m = manifest(&out);
    assert_eq!(m["config"]["preset"], "circle");
    assert_eq!(m["config"]["scheme"], "scheme_b");
    assert_eq!(m["config"]["n_modes"], 16);
    assert_eq!(m["config"]["reference"]["step"], 0.001);
    let table: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("conserved.json")).unwrap())
            .unwrap();
    assert!(table.is_object() || table.is_array());
}

#[test]
fn converge_reports_slope() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("conv");
    let st = hasimoto()
        .args([
            "converge",
            "--scheme",
            "scheme_a_2",
            "--n-modes",
            "32",
            "--step",
            "0.125",
            "--sweep",
            "3",
            "--t-end",
            "0.5",
            "--ref-step",
            "0.001953125",
            "--out",
        ])
        .arg(&out)
        .status()
        .unwrap();
    assert!(st.success());
    let csv = std::fs::read_to_string(out.join("convergence.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "h,steps,error,local_slope,slope");
    assert_eq!(lines.count(), 3);
    let slope = manifest(&out)["summary"]["slope"].as_f64().unwrap();
    assert!(slope > 1.0, "{slope}");
}

#[test]
fn filament_mode() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("fil");
    let st = hasimoto()
        .args([
            "filament",
            "--preset",
            "rough",
            "--scheme",
            "scheme_b",
            "--n-modes",
            "32",
            "--step",
            "0.05",
        ])
        .args(["--t-end", "0.1", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(st.success());
    assert_eq!(header(&out.join("filament.csv")), "t,x,X,Y,Z");
    assert_eq!(header(&out.join("base_point.csv")), "t,X,Y,Z,closure_gap");
}

#[test]
fn file_preset_and_threads_env() {
    let tmp = tempfile::tempdir().unwrap();
    let samples = tmp.path().join("t.txt");
    let n = 16;
    let text: String = (0..n)
        .map(|i| {
            let x = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
            format!("{} {} 0\n", x.cos(), x.sin())
        })
        .collect();
    std::fs::write(&samples, format!("# great circle\n{text}")).unwrap();
    let out = tmp.path().join("file");
    let st = hasimoto()
        .env("HASIMOTO_THREADS", "1")
        .args(["simulate", "--preset", "file", "--input-file"])
        .arg(&samples)
        .args(["--step", "0.1", "--t-end", "0.2", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(st.success());
    let rows = std::fs::read_to_string(out.join("final_state.csv"))
        .unwrap()
        .lines()
        .count();
    assert_eq!(rows, n + 1);
}

#[test]
fn errors_exit_nonzero() {
    let tmp = tempfile::tempdir().unwrap();
    let o = hasimoto()
        .args(["simulate", "--scheme", "scheme_c", "--out"])
        .arg(tmp.path())
        .output()
        .unwrap();
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("scheme_c"));

    let o = hasimoto()
        .args(["simulate", "--step", "2", "--t-end", "1"])
        .output()
        .unwrap();
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("step"));

    let o = hasimoto()
        .args([
            "simulate",
            "--preset",
            "file",
            "--input-file",
            "/nonexistent/t.txt",
            "--out",
        ])
        .arg(tmp.path())
        .output()
        .unwrap();
    assert!(!o.status.success());
}

#[test]
fn identical_runs_are_bit_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = tmp.path().join(name);
        assert!(hasimoto()
            .args([
                "conserve",
                "--preset",
                "rough",
                "--scheme",
                "scheme_b",
                "--n-modes",
                "32",
                "--step",
                "0.05"
            ])
            .args(["--t-end", "0.2", "--out"])
            .arg(&out)
            .status()
            .unwrap()
            .success());
        std::fs::read(out.join("conserved.csv")).unwrap()
    };
    assert_eq!(run("a"), run("b"));
}
