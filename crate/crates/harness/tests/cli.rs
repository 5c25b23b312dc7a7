use std::path::Path;
use std::process::{Command, Output};

fn hyperstat(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hyperstat")).args(args).current_dir(cwd).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

#[test]
fn list_problems_prints_every_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let out = hyperstat(&["list-problems"], dir.path());
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    for name in hyperstat::PROBLEM_NAMES {
        assert!(text.contains(name), "{name} missing");
    }
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&hyperstat(&[], d)), 1);
    assert_eq!(code(&hyperstat(&["frobnicate"], d)), 1);
    assert_eq!(code(&hyperstat(&["check", "--problem", "nope", "--property", "lipschitz"], d)), 1);
    assert_eq!(code(&hyperstat(&["check", "--problem", "P1-line", "--property", "sideways"], d)), 1);
    let wrong_dim = ["certify", "--problem", "P1-line", "--x", "1,2", "--method", "envelope"];
    assert_eq!(code(&hyperstat(&wrong_dim, d)), 1);
    let stray = ["certify", "--problem", "P1-line", "--x", "1", "--method", "envelope", "--eps", "0.1"];
    assert_eq!(code(&hyperstat(&stray, d)), 1);
    assert_eq!(code(&hyperstat(&["--help"], d)), 0);
}

#[test]
fn runtime_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&hyperstat(&["run", "--config", "missing.json"], d)), 2);
    assert_eq!(code(&hyperstat(&["rates", "--report", "missing.json"], d)), 2);
    // the graph-line fixture has no objectives
    let args = ["check", "--problem", "P4-graphline", "--property", "secant-convexity", "--samples", "10"];
    assert_eq!(code(&hyperstat(&args, d)), 2);
}

#[test]
fn box_counterexample_check_exits_three_and_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["check", "--problem", "P3-box-counterexample", "--property", "secant-convexity", "--samples", "5000"];
    let out = hyperstat(&args, dir.path());
    assert_eq!(code(&out), 3);
    let text = std::fs::read_to_string(dir.path().join("check_secant-convexity.json")).unwrap();
    let report: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(report["verdict"], "no-finite-modulus");
}

#[test]
fn satisfied_checks_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    for (problem, property) in [
        ("P1-line", "lipschitz"),
        ("P2-sin-interval", "set-smoothness"),
        ("P1-line-coercive", "secant-convexity"),
        ("P1-line-coercive", "secant-concavity"),
    ] {
        let args = ["check", "--problem", problem, "--property", property, "--samples", "2000", "--seed", "3"];
        let out = hyperstat(&args, dir.path());
        assert_eq!(code(&out), 0, "{problem} {property}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(dir.path().join(format!("check_{property}.json")).exists());
    }
}

#[test]
fn certify_prints_a_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["certify", "--problem", "P1-line-coercive", "--x", "2", "--method", "envelope", "--gamma", "0.1"];
    let out = hyperstat(&args, dir.path());
    assert_eq!(code(&out), 0);
    let cert: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    // φ = √(1+x²) + 1 is smooth, so the envelope gradient is close to φ'(2) = 2/√5
    let eps = cert["epsilon"].as_f64().unwrap();
    assert!((eps - 2.0 / 5f64.sqrt()).abs() < 0.05, "{eps}");

    let args = ["certify", "--problem", "P2-sin-interval", "--x", "-0.5", "--method", "goldstein", "--delta", "0.1"];
    let out = hyperstat(&args, dir.path());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let cert: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(cert["kind"], "goldstein");
    assert_eq!(cert["delta"].as_f64().unwrap(), 0.1);
}

#[test]
fn run_then_rates_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let config = serde_json::json!({
        "problem": "P1-line-coercive",
        "t_list": [50, 100, 200],
        "seeds": 3,
        "measurement": "envelope",
        "output_dir": "out",
    });
    std::fs::write(dir.path().join("c.json"), config.to_string()).unwrap();
    let out = hyperstat(&["run", "--config", "c.json"], dir.path());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let out = hyperstat(&["rates", "--report", "out/report_P1-line-coercive.json"], dir.path());
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8(out.stdout).unwrap().contains("slope "));
}

#[test]
fn invalid_config_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.json"), r#"{"problem": "P1-line", "bogus": 1}"#).unwrap();
    assert_eq!(code(&hyperstat(&["run", "--config", "bad.json"], dir.path())), 1);
    let unknown = r#"{"problem":"nope","t_list":[10],"seeds":1,"measurement":"envelope","output_dir":"o"}"#;
    std::fs::write(dir.path().join("unknown.json"), unknown).unwrap();
    assert_eq!(code(&hyperstat(&["run", "--config", "unknown.json"], dir.path())), 1);
}
