use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn robot_config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/robot.toml")
}

fn robot_text() -> String {
    std::fs::read_to_string(robot_config()).unwrap()
}

fn fauio(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fauio")).arg("--out").arg(out).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn text(o: &Output) -> String {
    format!("{}{}", String::from_utf8_lossy(&o.stdout), String::from_utf8_lossy(&o.stderr))
}

#[test]
fn validate_robot_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let o = fauio(dir.path(), &["validate", robot_config().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", text(&o));
    assert!(dir.path().join("validation.csv").exists());
}

#[test]
fn zero_sensor_fault_matrix_fails_validation() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = robot_text().replace("D_f = [[1.0], [0.0], [0.0]]", "D_f = [[0.0], [0.0], [0.0]]");
    let path = write(dir.path(), "bad.toml", &cfg);
    let o = fauio(dir.path(), &["validate", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1), "{}", text(&o));
    assert!(text(&o).contains("assumption-2"), "{}", text(&o));
}

#[test]
fn shape_mismatch_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = robot_text().replace("B = [[0.0], [21.6], [0.0], [0.0]]", "B = [[0.0], [21.6], [0.0]]");
    let path = write(dir.path(), "bad.toml", &cfg);
    let o = fauio(dir.path(), &["validate", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", text(&o));
    assert!(text(&o).contains('B'));
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = robot_text().replace("[solver]", "[solver]\nmax_iterations = 3");
    let path = write(dir.path(), "bad.toml", &cfg);
    let o = fauio(dir.path(), &["validate", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", text(&o));
}

#[test]
fn disturbance_design_needs_delta() {
    let dir = tempfile::tempdir().unwrap();
    let o = fauio(dir.path(), &["synth", robot_config().to_str().unwrap(), "--theorem", "2", "--epsilon", "0.1"]);
    assert_eq!(o.status.code(), Some(2), "{}", text(&o));
    assert!(text(&o).contains("delta"));
}

#[test]
fn report_lists_missing_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let o = fauio(dir.path(), &["report", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let msg = text(&o);
    for name in ["validation.csv", "synthesis.csv", "gains"] {
        assert!(msg.contains(name), "{msg}");
    }
}

#[test]
fn simulate_without_gains_fails_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let o = fauio(dir.path(), &["simulate", robot_config().to_str().unwrap(), "--preset", "robot-case2"]);
    assert_eq!(o.status.code(), Some(2), "{}", text(&o));
}

#[test]
fn full_pipeline_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    let cfg = robot_config();
    let cfg = cfg.to_str().unwrap();
    let o = fauio(out, &["validate", cfg]);
    assert_eq!(o.status.code(), Some(0), "{}", text(&o));
    let o = fauio(out, &["synth", cfg, "--theorem", "2", "--epsilon", "0.0112", "--delta", "5"]);
    assert_eq!(o.status.code(), Some(0), "{}", text(&o));
    for name in ["N", "J", "L1", "F", "K", "L2", "beta", "P1", "P2", "mu"] {
        assert!(out.join("gains").join(format!("{name}.mat")).exists(), "{name}");
    }
    for preset in ["robot-5.1", "robot-case1", "robot-case2", "robot-case3"] {
        let o = fauio(out, &["simulate", cfg, "--preset", preset, "--stride", "500"]);
        assert_eq!(o.status.code(), Some(0), "{preset}: {}", text(&o));
        let sim = out.join("sim").join(preset);
        for f in ["trajectory.csv", "metrics.csv", "fa.svg", "fs.svg", "manifest.toml"] {
            assert!(sim.join(f).exists(), "{preset}/{f}");
        }
        let csv = std::fs::read_to_string(sim.join("trajectory.csv")).unwrap();
        assert!(csv.starts_with("# manifest "));
        // 500 001 steps at stride 500.
        assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 1 + 1001);
    }
    let o = fauio(out, &["report"]);
    assert_eq!(o.status.code(), Some(0), "{}", text(&o));
    let md = std::fs::read_to_string(out.join("report.md")).unwrap();
    assert!(md.contains("robot-case3"));
}

#[test]
fn quiet_scenario_file_has_no_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    let cfg = robot_config();
    let cfg = cfg.to_str().unwrap();
    let o = fauio(out, &["synth", cfg, "--theorem", "1", "--epsilon", "0.1"]);
    assert_eq!(o.status.code(), Some(0), "{}", text(&o));
    let scenario = write(
        out,
        "quiet.toml",
        r#"schema_version = 1
name = "quiet"
horizon = 2.0
dt = 1e-4
x0 = [0.0, 0.0, 0.0, 0.0]
fa_hat0 = [0.0]
fault_a = [{ pieces = [] }]
fault_s = [{ pieces = [] }]
input = [{ pieces = [{ expr = { kind = "sin", amp = 0.5, freq = 3.0 } }] }]
"#,
    );
    let o = fauio(out, &["simulate", cfg, "--scenario", scenario.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", text(&o));
    let metrics = std::fs::read_to_string(out.join("sim/quiet/metrics.csv")).unwrap();
    for key in ["rmse_fa_err1", "rmse_fs_err1"] {
        let line = metrics.lines().find(|l| l.starts_with(key)).unwrap_or_else(|| panic!("{key} in {metrics}"));
        let v: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!(v <= 1e-9, "{key} = {v}");
    }
}
