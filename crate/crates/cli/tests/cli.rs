use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn ssahm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ssahm"))
        .args(args)
        .env("SSAHM_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn out_flag(dir: &Path) -> String {
    dir.to_str().unwrap().to_string()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn column(header: &[String], rows: &[Vec<String>], name: &str) -> Vec<f64> {
    let j = header.iter().position(|h| h == name).unwrap();
    rows.iter().map(|r| r[j].parse().unwrap()).collect()
}

#[test]
fn forward_writes_unitary_table_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("f");
    let o = ssahm(&["forward", "--profile", "sech", "--lambda", "1", "--n", "1..5", "--out", &out_flag(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = read_csv(&out.join("forward.csv"));
    assert_eq!(
        header,
        ["lambda", "n", "ReT", "ImT", "ReL", "ImL", "ReR", "ImR", "unitarity_residual"]
    );
    assert_eq!(rows.len(), 5);
    assert!(column(&header, &rows, "unitarity_residual").iter().all(|r| *r < 1e-8));
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "forward");
    assert_eq!(manifest["config"]["lambda"], 1.0);
    assert!(manifest["files"].as_array().unwrap().iter().any(|f| f == "forward.csv"));
}

#[test]
fn output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        let o = ssahm(&["cam", "--profile", "sech", "--box", "0,0,2,2", "--resolution", "5,5", "--out", &out_flag(out)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let ta = fs::read(a.join("cam.csv")).unwrap();
    let tb = fs::read(b.join("cam.csv")).unwrap();
    assert!(!ta.is_empty());
    assert_eq!(ta, tb);
}

#[test]
fn misspelled_config_key_is_a_configuration_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "[forward]\nlamda = 1.0\n").unwrap();
    let out = dir.path().join("o");
    let o = ssahm(&["--config", cfg.to_str().unwrap(), "forward", "--out", &out_flag(&out)]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("lamda"), "{err}");
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "[forward]\nprofile = \"sech\"\nlambda = 0.5\nn = \"1..3\"\n").unwrap();
    let out = dir.path().join("o");
    let o = ssahm(&["--config", cfg.to_str().unwrap(), "forward", "--lambda", "2", "--out", &out_flag(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = read_csv(&out.join("forward.csv"));
    assert_eq!(rows.len(), 3);
    assert!(column(&header, &rows, "lambda").iter().all(|l| *l == 2.0));
}

#[test]
fn zeros_at_zero_energy_sit_on_the_imaginary_axis() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("z");
    let o = ssahm(&["zeros", "--profile", "sech", "--lambda", "0", "--box", "0,0.5,1,5.5", "--out", &out_flag(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = read_csv(&out.join("zeros.csv"));
    let im = column(&header, &rows, "Im_z");
    let re = column(&header, &rows, "Re_z");
    assert_eq!(im.len(), 5);
    for (k, (x, y)) in re.iter().zip(&im).enumerate() {
        assert!(x.abs() < 1e-8);
        assert!((y - (k + 1) as f64).abs() < 1e-8);
    }
}

#[test]
fn black_hole_recovery_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bh");
    let o = ssahm(&["bh", "--M", "1", "--Q", "0.5", "--Lambda", "0.05", "--recover", "--out", &out_flag(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = read_csv(&out.join("horizons.csv"));
    assert_eq!(header, ["root", "r", "kappa"]);
    assert_eq!(rows.len(), 4);
    let (header, rows) = read_csv(&out.join("recovery.csv"));
    assert!(column(&header, &rows, "relative_error").iter().all(|e| *e < 1e-3));
}

#[test]
fn invalid_black_hole_parameters_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bh");
    let o = ssahm(&["bh", "--M", "-1", "--out", &out_flag(&out)]);
    assert_eq!(o.status.code(), Some(2));
}
