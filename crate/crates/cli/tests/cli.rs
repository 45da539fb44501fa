use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_incoherence"))
}

fn bundled(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn run(config: &Path, out: &Path, extra: &[&str]) -> Output {
    bin().arg("run")
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .unwrap()
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn read_json(path: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

#[test]
fn bundled_configs_validate() {
    for name in ["eq4_demo.json", "table1.json", "recover3q.json"] {
        let out = bin().arg("validate").arg("--config").arg(bundled(name)).output().unwrap();
        assert_eq!(out.status.code(), Some(0), "{name}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok: "));
    }
}

#[test]
fn correlated_demo_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&bundled("eq4_demo.json"), dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0));
    let report = read_json(&dir.path().join("report.json"));
    let s = &report["scenarios"][0]["superoperator"];
    assert!((s[1][1][1].as_f64().unwrap() - 1.2).abs() < 1e-12);
    assert!((s[2][2][1].as_f64().unwrap() + 1.2).abs() < 1e-12);
    assert!((s[0][0][0].as_f64().unwrap() - 1.0).abs() < 1e-12);
    let choi: Vec<f64> = report["scenarios"][0]["choi_eigenvalues"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    assert!((choi[0] - 2.2).abs() < 1e-12 && (choi[3] + 0.2).abs() < 1e-12);
    assert_eq!(report["scenarios"][0]["min_choi_eigenvalue"]["pass"], false);
    assert_eq!(report["tolerances"]["cp_tol"], 1e-9);
}

#[test]
fn table_rows() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&bundled("table1.json"), dir.path(), &[]).status.code(), Some(0));
    let table = std::fs::read_to_string(dir.path().join("table.csv")).unwrap();
    let rows: Vec<&str> = table.lines().skip(1).map(|l| l.split_once(',').unwrap().1).collect();
    assert_eq!(
        rows,
        [
            "false,true,false,",
            "true,true,true,1",
            "false,false,true,2",
            "false,true,true,1",
            "false,false,true,2"
        ]
    );
    let manifest = read_json(&dir.path().join("manifest.json"));
    let paths: Vec<&str> = manifest["files"].as_array().unwrap().iter().map(|f| f["path"].as_str().unwrap()).collect();
    assert_eq!(paths, ["report.json", "table.csv"]);
    assert_eq!(manifest["version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn recovery_artifacts_and_manifest_hashes() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&bundled("recover3q.json"), dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest = read_json(&dir.path().join("manifest.json"));
    for f in manifest["files"].as_array().unwrap() {
        let bytes = std::fs::read(dir.path().join(f["path"].as_str().unwrap())).unwrap();
        assert_eq!(f["sha256"], incoherence_cli::artifacts::sha256_hex(&bytes));
    }
    let samples = std::fs::read_to_string(dir.path().join("samples.csv")).unwrap();
    assert!(samples.starts_with("k,f_real,f_imag"));
    assert_eq!(samples.lines().count(), 58);
    let report = read_json(&dir.path().join("report.json"));
    assert_eq!(report["model_spectrum"]["unit_eigenvalues"], 8);
    assert_eq!(report["model_spectrum"]["conjugate_pairs"], 28);
    for key in ["mean_error", "std_relative_error", "clipped_mass"] {
        assert_eq!(report["comparison"][key]["pass"], true, "{key}");
    }
    assert_eq!(report["comparison"]["skewness_sign_matches"], true);
}

#[test]
fn overrides_change_config_hash_and_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert_eq!(run(&bundled("recover3q.json"), &a, &[]).status.code(), Some(0));
    let out = run(&bundled("recover3q.json"), &b, &["--method", "least_squares", "--seed", "7", "--tol", "0.1"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let ma = read_json(&a.join("manifest.json"));
    let mb = read_json(&b.join("manifest.json"));
    assert_ne!(ma["config_hash"], mb["config_hash"]);
    let report = read_json(&b.join("report.json"));
    assert_eq!(report["method"], "least_squares");
    assert_eq!(report["seed"], 7);
    assert_eq!(report["tolerances"]["match_tol"], 0.1);
}

#[test]
fn config_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("unknown_field.json", r#"{"mode": "qpt_demo", "u_ab": {"generator": "ZZ", "angle": 1}, "scenarios": [], "extra": 1}"#),
        ("bad_mode.json", r#"{"mode": "simulate"}"#),
        ("no_seed.json", r#"{"mode": "rud_build", "source": {"kind": "random", "qubits": 2, "members": 3}}"#),
        (
            "noise_no_seed.json",
            r#"{"mode": "recover_profile", "system": {"fixture": "3q"}, "measurement_noise": 1e-4,
                "truth": {"kind": "gaussian", "center": 0, "width": 0.02}}"#,
        ),
        ("bad_pauli.json", r#"{"mode": "qpt_demo", "u_ab": {"generator": "ZQ", "angle": 1}, "scenarios": [{"label": "x", "alpha": 0.5, "beta": 0.5, "gamma": 0.6, "correlated": true}]}"#),
        ("unphysical.json", r#"{"mode": "qpt_demo", "u_ab": {"generator": "ZZ", "angle": 1}, "scenarios": [{"label": "x", "alpha": 0.5, "beta": 0.5, "gamma": 3.0, "correlated": true}]}"#),
        ("not_json.json", "mode: qpt_demo"),
    ];
    for (name, text) in cases {
        let cfg = write_config(dir.path(), name, text);
        let out = run(&cfg, &dir.path().join("out"), &[]);
        assert_eq!(out.status.code(), Some(1), "{name}: {}", String::from_utf8_lossy(&out.stderr));
        let v = bin().arg("validate").arg("--config").arg(&cfg).output().unwrap();
        assert_eq!(v.status.code(), Some(1), "{name}");
    }
    let missing = run(&dir.path().join("nope.json"), &dir.path().join("out"), &[]);
    assert_eq!(missing.status.code(), Some(1));
    let method_on_qpt = run(&bundled("eq4_demo.json"), &dir.path().join("out"), &["--method", "least_squares"]);
    assert_eq!(method_on_qpt.status.code(), Some(1));
    let bad_method = run(&bundled("recover3q.json"), &dir.path().join("out"), &["--method", "fft"]);
    assert_eq!(bad_method.status.code(), Some(1));
    assert!(!dir.path().join("out").join("manifest.json").exists());
}

#[test]
fn numerical_failure_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    // K has no diagonal part in the H0 basis, so every K_jm vanishes.
    let cfg = write_config(
        dir.path(),
        "anticommuting.json",
        r#"{"mode": "recover_profile", "system": {"h0t": "0.9 * ZI + 0.4 * IZ", "k": "0.01 * XI"},
            "truth": {"kind": "gaussian", "center": 0, "width": 0.02}}"#,
    );
    assert_eq!(bin().arg("validate").arg("--config").arg(&cfg).output().unwrap().status.code(), Some(0));
    let out = run(&cfg, &dir.path().join("out"), &[]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("numerical failure"));
}

#[test]
fn usage() {
    assert_eq!(bin().arg("--help").output().unwrap().status.code(), Some(0));
    assert_eq!(bin().arg("--version").output().unwrap().status.code(), Some(0));
    assert_eq!(bin().arg("frobnicate").output().unwrap().status.code(), Some(1));
    assert_eq!(bin().args(["run", "--config", "x.json"]).output().unwrap().status.code(), Some(1));
}

#[test]
fn rud_build_modes() {
    let dir = tempfile::tempdir().unwrap();
    let configs = [
        (
            "explicit.json",
            r#"{"mode": "rud_build", "source": {"kind": "explicit", "members": [
                {"weight": 0.75, "generator": "Z", "angle": 0.0},
                {"weight": 0.25, "generator": "Z", "angle": 1.5707963267948966}]}}"#,
        ),
        ("random.json", r#"{"mode": "rud_build", "seed": 11, "source": {"kind": "random", "qubits": 2, "members": 4}}"#),
        (
            "rf.json",
            r#"{"mode": "rud_build", "source": {"kind": "rf", "system": {"fixture": "3q"},
                "profile": {"kind": "uniform", "center": 0, "width": 0.05, "n_points": 11}}}"#,
        ),
    ];
    for (name, text) in configs {
        let cfg = write_config(dir.path(), name, text);
        let out_dir = dir.path().join(name.trim_end_matches(".json"));
        let out = run(&cfg, &out_dir, &[]);
        assert_eq!(out.status.code(), Some(0), "{name}: {}", String::from_utf8_lossy(&out.stderr));
        let report = read_json(&out_dir.join("report.json"));
        for key in [
            "unitality_defect",
            "trace_preservation_defect",
            "min_choi_eigenvalue",
            "max_eigenvalue_modulus_excess",
            "conjugate_pair_defect",
        ] {
            assert_eq!(report[key]["pass"], true, "{name} {key}: {}", report[key]);
        }
    }
    let explicit = read_json(&dir.path().join("explicit/report.json"));
    assert_eq!(explicit["kraus_count"], 2);
}

#[test]
fn csv_profile_is_resolved_relative_to_config() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("p.csv"), "delta_omega,weight\n-0.02,0.25\n0,0.5\n0.02,0.25\n").unwrap();
    let cfg = write_config(
        dir.path(),
        "csv.json",
        r#"{"mode": "rud_build", "source": {"kind": "rf", "system": {"fixture": "3q"},
            "profile": {"kind": "csv", "path": "p.csv"}}}"#,
    );
    let out = run(&cfg, &dir.path().join("out"), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(read_json(&dir.path().join("out/report.json"))["members"], 3);
}
