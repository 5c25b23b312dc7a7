//! Flat-file outputs: run traces (CSV), reports (JSON) and plot data (TSV).

use std::fs;
use std::path::{Path, PathBuf};

use hyperstat::structure::PropertyReport;
use hyperstat::RunTrace;
use serde::Serialize;

use crate::error::{io_err, HarnessError, Result};
use crate::experiment::{write_timing, RateReport, RunSummary};

/// 17 significant digits; round-trips every f64.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_json<S: Serialize + ?Sized>(path: &Path, value: &S) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|source| HarnessError::Json { path: path.to_path_buf(), source })?;
    text.push('\n');
    fs::write(path, text).map_err(io_err(path))
}

pub fn write_tsv(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let csv_err = |source| HarnessError::Csv { path: path.to_path_buf(), source };
    let mut w = csv::WriterBuilder::new().delimiter(b'\t').from_path(path).map_err(csv_err)?;
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(row.iter().map(|&v| fmt_float(v))).map_err(csv_err)?;
    }
    w.flush().map_err(io_err(path))
}

/// Something that can be written to an output directory.
pub trait Artifact {
    /// Writes the files, overwriting existing ones, and returns their paths.
    fn write_into(&self, dir: &Path) -> Result<Vec<PathBuf>>;
}

/// Creates `dir` if needed and writes `item` into it.
pub fn emit_artifacts(item: &impl Artifact, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    item.write_into(dir)
}

pub fn trace_file_name(problem: &str, seed: u64, t: usize) -> String {
    format!("trace_{problem}_{seed}_{t}.csv")
}

impl Artifact for RunTrace<f64> {
    /// `t, x, phi_tilde, eta, eps, w` with `x` components joined by `;` and
    /// `phi_tilde` empty when values were not logged. T+1 rows.
    fn write_into(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        let c = &self.config;
        let path = dir.join(trace_file_name(&self.problem, c.seed, c.iterations));
        let csv_err = |source| HarnessError::Csv { path: path.clone(), source };
        let mut w = csv::Writer::from_path(&path).map_err(csv_err)?;
        w.write_record(["t", "x", "phi_tilde", "eta", "eps", "w"]).map_err(csv_err)?;
        let (eta, eps, tol) = (fmt_float(c.step_size), fmt_float(c.radius), fmt_float(c.inner_tol));
        for (t, x) in self.iterates.iter().enumerate() {
            let xs: Vec<String> = x.iter().map(|&v| fmt_float(v)).collect();
            let phi = self.values.get(t).map(|&v| fmt_float(v)).unwrap_or_default();
            w.write_record([t.to_string(), xs.join(";"), phi, eta.clone(), eps.clone(), tol.clone()])
                .map_err(csv_err)?;
        }
        w.flush().map_err(io_err(&path))?;
        Ok(vec![path])
    }
}

/// Per-run summary `run_<problem>_<seed>_<T>.json`.
pub struct RunArtifact<'a>(pub &'a RunSummary);

impl Artifact for RunArtifact<'_> {
    fn write_into(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        let s = self.0;
        let path = dir.join(format!("run_{}_{}_{}.json", s.problem, s.seed, s.t));
        write_json(&path, s)?;
        Ok(vec![path])
    }
}

impl Artifact for RateReport {
    /// `report_<problem>.json`, `rates_<problem>.tsv` (T, mean, stderr) and
    /// `timing_<problem>.json`.
    fn write_into(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        let report = dir.join(format!("report_{}.json", self.problem));
        write_json(&report, self)?;
        let rates = dir.join(format!("rates_{}.tsv", self.problem));
        let rows: Vec<Vec<f64>> = self.points.iter().map(|p| vec![p.t as f64, p.mean_sq_measure, p.stderr]).collect();
        write_tsv(&rates, &["T", "mean", "stderr"], &rows)?;
        let timing = write_timing(self, dir)?;
        Ok(vec![report, rates, timing])
    }
}

impl Artifact for PropertyReport {
    /// `check_<property>.json`
    fn write_into(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        let path = dir.join(format!("check_{}.json", self.property));
        write_json(&path, self)?;
        Ok(vec![path])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            let s = fmt_float(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
        }
        assert_eq!(fmt_float(0.1), "1.0000000000000001e-1");
    }
}
