use std::fs;
use std::path::Path;

use hyperstat::Mode;
use hyperstat_harness::{run_experiment_with, ExperimentConfig, HarnessError, Measurement, RunSummary};

fn config(dir: &Path, t_list: Vec<usize>, seeds: usize) -> ExperimentConfig {
    ExperimentConfig::new("P1-line-coercive", t_list, seeds, Measurement::Envelope, dir)
}

fn read(path: impl AsRef<Path>) -> Vec<u8> {
    fs::read(path.as_ref()).unwrap_or_else(|e| panic!("{}: {e}", path.as_ref().display()))
}

#[test]
fn reruns_are_byte_identical_across_thread_counts() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run_experiment_with(&config(a.path(), vec![30, 60, 120], 4), Some(1)).unwrap();
    let mut cfg = config(b.path(), vec![30, 60, 120], 4);
    cfg.output_dir = b.path().to_path_buf();
    run_experiment_with(&cfg, Some(3)).unwrap();
    let mut names: Vec<_> = fs::read_dir(a.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| !n.starts_with("timing_"))
        .collect();
    names.sort();
    assert!(names.len() > 20);
    for name in names {
        if name.starts_with("report_") {
            // the config echo records each run's own output directory
            let strip = |p: &Path| {
                let mut v: serde_json::Value = serde_json::from_slice(&read(p.join(&name))).unwrap();
                v["config"]["output_dir"] = serde_json::Value::Null;
                v
            };
            assert_eq!(strip(a.path()), strip(b.path()));
        } else {
            assert_eq!(read(a.path().join(&name)), read(b.path().join(&name)), "{name}");
        }
    }
}

#[test]
fn report_means_agree_with_run_files_and_traces() {
    let dir = tempfile::tempdir().unwrap();
    let t_list = vec![20, 40, 80];
    let report = run_experiment_with(&config(dir.path(), t_list.clone(), 3), Some(2)).unwrap();
    assert!(report.slope.is_some());
    for (point, &t) in report.points.iter().zip(&t_list) {
        let mut sum = 0.0;
        for seed in 0..3 {
            let run: RunSummary =
                serde_json::from_slice(&read(dir.path().join(format!("run_P1-line-coercive_{seed}_{t}.json"))))
                    .unwrap();
            sum += run.measure * run.measure;

            let mut rdr =
                csv::Reader::from_path(dir.path().join(format!("trace_P1-line-coercive_{seed}_{t}.csv"))).unwrap();
            let header: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
            assert_eq!(header, ["t", "x", "phi_tilde", "eta", "eps", "w"]);
            let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
            assert_eq!(rows.len(), t + 1);
            // the selected iterate is one of the logged rows, bit for bit
            let x: f64 = rows[run.selected_index][1].parse().unwrap();
            assert_eq!(x, run.selected_x[0]);
            assert_eq!(rows[0][1].parse::<f64>().unwrap(), 2.0);
            let eta: f64 = rows[0][3].parse().unwrap();
            assert_eq!(eta, point.step_size);
        }
        let mean = sum / 3.0;
        assert!((mean - point.mean_sq_measure).abs() <= 1e-12 * (1.0 + mean), "T={t}");
    }
    let rates = fs::read_to_string(dir.path().join("rates_P1-line-coercive.tsv")).unwrap();
    assert_eq!(rates.lines().count(), 4);
    assert!(rates.starts_with("T\tmean\tstderr"));
    let trajectory = dir.path().join("trajectory_P1-line-coercive_0_80.tsv");
    assert!(fs::read_to_string(trajectory).unwrap().lines().count() > 10);
}

#[test]
fn single_point_sweep_has_no_slope() {
    let dir = tempfile::tempdir().unwrap();
    let report = run_experiment_with(&config(dir.path(), vec![100], 1), Some(1)).unwrap();
    assert_eq!(report.points.len(), 1);
    assert_eq!(report.points[0].stderr, 0.0);
    assert!(report.slope.is_none() && report.intercept.is_none());
}

#[test]
fn unknown_problem_is_rejected_before_any_output() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(&dir.path().join("out"), vec![10], 1);
    cfg.problem = "nope".into();
    let err = run_experiment_with(&cfg, Some(1)).unwrap_err();
    assert!(matches!(err, HarnessError::Core { source: hyperstat::Error::UnknownProblem(_), .. }));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn optimistic_smoothing_reports_certificate_radius() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(dir.path(), vec![100, 400, 1600], 2);
    cfg.mode = Some(Mode::Optimistic);
    cfg.measurement = Measurement::ClarkeSmoothing;
    cfg.n_mc = 1000;
    let report = run_experiment_with(&cfg, Some(2)).unwrap();
    assert_eq!(report.mode, Mode::Optimistic);
    for w in report.points.windows(2) {
        let ratio = w[1].certificate_delta.unwrap() / w[0].certificate_delta.unwrap();
        assert!((ratio - 0.25f64.powf(0.25)).abs() < 1e-12);
        // the optimistic gap carries the 2M_φε smoothing bias
        assert!(w[1].delta_gap < w[0].delta_gap);
    }
}

#[test]
fn mismatched_start_point_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(dir.path(), vec![10], 1);
    cfg.x0 = Some(vec![1.0, 2.0]);
    assert!(matches!(run_experiment_with(&cfg, Some(1)), Err(HarnessError::InvalidConfig(_))));
}
