use std::path::Path;
use std::time::Instant;

use hyperstat::rng::run_stream;
use hyperstat::stationarity::Certificate;
use hyperstat::zeroth_order::{izom_run, schedule_for, Schedule};
use hyperstat::{registry_get, IzomConfig, Mode, Problem};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::artifacts::{emit_artifacts, write_json, write_tsv, RunArtifact};
use crate::config::{ExperimentConfig, Measurement};
use crate::error::{HarnessError, Result};
use crate::fit::fit_rate;
use crate::measure::{measure_at, smoothing_delta, MeasureSettings};
use crate::pool::worker_pool;

/// Iterates at which the trajectory plot data is measured.
const TRAJECTORY_POINTS: usize = 100;

/// Outcome of one (T, seed) run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub problem: String,
    pub seed: u64,
    #[serde(rename = "T")]
    pub t: usize,
    pub selected_index: usize,
    pub selected_x: Vec<f64>,
    /// The stationarity measure at the selected iterate.
    pub measure: f64,
    pub measure_sq: f64,
    pub phi_x0: f64,
    /// Smallest φ̃ observed along the run.
    pub best_value: f64,
    pub certificate: Certificate<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    #[serde(rename = "T")]
    pub t: usize,
    pub seeds: usize,
    /// Mean over seeds of the squared measure.
    pub mean_sq_measure: f64,
    pub stderr: f64,
    pub step_size: f64,
    pub radius: f64,
    pub inner_tol: f64,
    /// Certificate radius √(2εM_φ) for smoothing measurements.
    pub certificate_delta: Option<f64>,
    /// φ(x₀) − best observed value, plus 2M_φε when optimistic.
    pub delta_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub problem: String,
    pub mode: Mode,
    pub measurement: Measurement,
    pub m: usize,
    pub hyper_lipschitz: f64,
    pub points: Vec<RatePoint>,
    /// Least-squares slope of ln(mean square measure) on ln T.
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    /// Largest gap Δ over the sweep.
    pub delta_o_or_p: f64,
    pub config: ExperimentConfig,
    /// Kept out of the report so that reruns are byte-identical; written to
    /// a separate timing file.
    #[serde(skip)]
    pub wall_clock_secs: f64,
}

impl RateReport {
    pub fn refit(&self) -> Result<(f64, f64)> {
        let pts: Vec<(f64, f64)> = self.points.iter().map(|p| (p.t as f64, p.mean_sq_measure)).collect();
        fit_rate(&pts)
    }
}

struct Task {
    t: usize,
    seed: u64,
    /// Also record the trajectory plot data.
    trajectory: bool,
}

fn x0_for(cfg: &ExperimentConfig, p: &Problem) -> Result<Vec<f64>> {
    match &cfg.x0 {
        Some(x) if x.len() == p.m => Ok(x.clone()),
        Some(x) => Err(HarnessError::InvalidConfig(format!("x0 has length {}, problem needs {}", x.len(), p.m))),
        None => Ok(vec![2.0; p.m]),
    }
}

fn settings_for(cfg: &ExperimentConfig, schedule: &Schedule<f64>) -> MeasureSettings {
    MeasureSettings {
        measurement: cfg.measurement,
        gamma: cfg.gamma,
        rho: cfg.rho,
        eps: schedule.radius,
        inner_tol: schedule.inner_tol,
        n_mc: cfg.n_mc,
        goldstein_samples: cfg.goldstein_samples,
        goldstein_delta: cfg.goldstein_delta,
    }
}

fn run_task(cfg: &ExperimentConfig, p: &Problem, x0: &[f64], task: &Task) -> Result<RunSummary> {
    let schedule = schedule_for(p.m, p.hyper_lipschitz(), task.t, &cfg.schedule.constants());
    let mut izom = IzomConfig::from_schedule(&schedule, task.t, task.seed, x0.to_vec(), p.mode);
    izom.log_values = true;
    izom.directions_per_step = cfg.directions_per_step;
    let trace = izom_run(p, &izom)
        .map_err(|source| HarnessError::Core { context: format!("run seed {} T {}", task.seed, task.t), source })?;
    emit_artifacts(&trace, &cfg.output_dir)?;

    let settings = settings_for(cfg, &schedule);
    let mut rng = run_stream(task.seed, task.t as u64);
    let certificate = measure_at(p, &trace.selected_x, &settings, &mut rng)?;
    let summary = RunSummary {
        problem: p.name.clone(),
        seed: task.seed,
        t: task.t,
        selected_index: trace.selected_index,
        selected_x: trace.selected_x.clone(),
        measure: certificate.epsilon,
        measure_sq: certificate.epsilon * certificate.epsilon,
        phi_x0: trace.values[0],
        best_value: trace.values.iter().copied().fold(f64::INFINITY, f64::min),
        certificate,
    };
    emit_artifacts(&RunArtifact(&summary), &cfg.output_dir)?;

    if task.trajectory {
        let mut rows = Vec::new();
        let mut last = usize::MAX;
        for k in 0..TRAJECTORY_POINTS {
            // log-spaced iterate indices in [0, T]
            let t = ((task.t as f64 + 1.0).powf(k as f64 / (TRAJECTORY_POINTS - 1) as f64) - 1.0).round() as usize;
            if t == last {
                continue;
            }
            last = t;
            let mut rng = run_stream(task.seed ^ 0x7472_616a, t as u64);
            let c = measure_at(p, &trace.iterates[t], &settings, &mut rng)?;
            rows.push(vec![t as f64, c.epsilon]);
        }
        let name = format!("trajectory_{}_{}_{}.tsv", p.name, task.seed, task.t);
        write_tsv(&cfg.output_dir.join(name), &["t", "measure"], &rows)?;
    }
    Ok(summary)
}

/// Runs the sweep with the pool size taken from `HYPERSTAT_THREADS`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RateReport> {
    run_experiment_with(cfg, None)
}

/// Runs every (T, seed) pair, writes per-run artifacts, then the report.
/// Per-run files of successful runs are kept when another run fails.
pub fn run_experiment_with(cfg: &ExperimentConfig, threads: Option<usize>) -> Result<RateReport> {
    let start = Instant::now();
    cfg.validate()?;
    let mut p: Problem = registry_get(&cfg.problem)?;
    if let Some(mode) = cfg.mode {
        p = p.with_mode(mode);
    }
    let x0 = x0_for(cfg, &p)?;
    std::fs::create_dir_all(&cfg.output_dir).map_err(crate::error::io_err(&cfg.output_dir))?;

    let t_max = *cfg.t_list.last().expect("validated non-empty");
    let tasks: Vec<Task> = cfg
        .t_list
        .iter()
        .flat_map(|&t| {
            (0..cfg.seeds as u64).map(move |i| Task { t, seed: cfg.base_seed + i, trajectory: t == t_max && i == 0 })
        })
        .collect();
    let pool = worker_pool(threads)?;
    let results: Vec<Result<RunSummary>> =
        pool.install(|| tasks.par_iter().map(|task| run_task(cfg, &p, &x0, task)).collect());
    let summaries = results.into_iter().collect::<Result<Vec<_>>>()?;

    let m_phi = p.hyper_lipschitz();
    let consts = cfg.schedule.constants();
    let mut points = Vec::with_capacity(cfg.t_list.len());
    for (k, &t) in cfg.t_list.iter().enumerate() {
        let runs = &summaries[k * cfg.seeds..(k + 1) * cfg.seeds];
        let n = runs.len() as f64;
        let mean = runs.iter().map(|r| r.measure_sq).sum::<f64>() / n;
        let var = if runs.len() > 1 {
            runs.iter().map(|r| (r.measure_sq - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        let schedule = schedule_for(p.m, m_phi, t, &consts);
        let best = runs.iter().map(|r| r.best_value).fold(f64::INFINITY, f64::min);
        let mut delta_gap = runs[0].phi_x0 - best;
        if p.mode == Mode::Optimistic {
            delta_gap += 2.0 * m_phi * schedule.radius;
        }
        let certificate_delta = match cfg.measurement {
            Measurement::Envelope => None,
            _ => Some(smoothing_delta(&p, schedule.radius)),
        };
        points.push(RatePoint {
            t,
            seeds: runs.len(),
            mean_sq_measure: mean,
            stderr: (var / n).sqrt(),
            step_size: schedule.step_size,
            radius: schedule.radius,
            inner_tol: schedule.inner_tol,
            certificate_delta,
            delta_gap,
        });
    }
    let fit = if points.len() >= 3 {
        let pts: Vec<(f64, f64)> = points.iter().map(|q| (q.t as f64, q.mean_sq_measure)).collect();
        fit_rate(&pts).ok()
    } else {
        None
    };
    let report = RateReport {
        problem: p.name.clone(),
        mode: p.mode,
        measurement: cfg.measurement,
        m: p.m,
        hyper_lipschitz: m_phi,
        delta_o_or_p: points.iter().map(|q| q.delta_gap).fold(f64::NEG_INFINITY, f64::max),
        points,
        slope: fit.map(|f| f.0),
        intercept: fit.map(|f| f.1),
        config: cfg.clone(),
        wall_clock_secs: start.elapsed().as_secs_f64(),
    };
    emit_artifacts(&report, &cfg.output_dir)?;
    Ok(report)
}

/// Loads a report written by [`run_experiment`].
pub fn load_report(path: &Path) -> Result<RateReport> {
    let text = std::fs::read_to_string(path).map_err(crate::error::io_err(path))?;
    serde_json::from_str(&text).map_err(|source| HarnessError::Json { path: path.to_path_buf(), source })
}

pub(crate) fn timing_json(report: &RateReport) -> serde_json::Value {
    serde_json::json!({ "problem": report.problem, "wall_clock_secs": report.wall_clock_secs })
}

pub(crate) fn write_timing(report: &RateReport, dir: &Path) -> Result<std::path::PathBuf> {
    let path = dir.join(format!("timing_{}.json", report.problem));
    write_json(&path, &timing_json(report))?;
    Ok(path)
}
