use std::fs;
use std::path::{Path, PathBuf};

use hyperstat::{Mode, ScheduleConstants};
use serde::{Deserialize, Serialize};

use crate::error::{io_err, HarnessError, Result};

/// Stationarity measure evaluated at the selected iterate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Measurement {
    /// ‖∇φ_γ(x̄)‖
    Envelope,
    /// Smoothing certificate ε
    ClarkeSmoothing,
    /// Sampled Goldstein gap
    Goldstein,
}

impl Measurement {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Envelope => "envelope",
            Self::ClarkeSmoothing => "clarke-smoothing",
            Self::Goldstein => "goldstein",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ScheduleOverrides {
    #[serde(default)]
    pub c_eta: Option<f64>,
    #[serde(default)]
    pub c_eps: Option<f64>,
    #[serde(default)]
    pub c_w: Option<f64>,
}

impl ScheduleOverrides {
    pub fn constants(&self) -> ScheduleConstants<f64> {
        let base = ScheduleConstants::default();
        ScheduleConstants {
            c_eta: self.c_eta.or(base.c_eta),
            c_eps: self.c_eps.unwrap_or(base.c_eps),
            c_w: self.c_w.unwrap_or(base.c_w),
        }
    }
}

fn default_gamma() -> f64 {
    0.1
}
fn default_n_mc() -> usize {
    1_000
}
fn default_goldstein_samples() -> usize {
    100
}
fn default_directions() -> usize {
    1
}

/// A sweep over iteration counts and seeds. See the README for the JSON
/// layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: String,
    /// Defaults to the problem's registered mode.
    #[serde(default)]
    pub mode: Option<Mode>,
    pub t_list: Vec<usize>,
    pub seeds: usize,
    /// Runs use seeds `base_seed, base_seed + 1, …`.
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default)]
    pub schedule: ScheduleOverrides,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    /// Declared weak-convexity/concavity modulus. Envelope runs then require
    /// γ < 1/(ρ+1); smoothing certificates use it for the transport term
    /// (theory ρ when absent).
    #[serde(default)]
    pub rho: Option<f64>,
    pub measurement: Measurement,
    pub output_dir: PathBuf,
    /// Starting point; defaults to 2 in every coordinate.
    #[serde(default)]
    pub x0: Option<Vec<f64>>,
    #[serde(default = "default_n_mc")]
    pub n_mc: usize,
    #[serde(default = "default_goldstein_samples")]
    pub goldstein_samples: usize,
    /// Goldstein radius; defaults to √(2εM_φ).
    #[serde(default)]
    pub goldstein_delta: Option<f64>,
    #[serde(default = "default_directions")]
    pub directions_per_step: usize,
}

impl ExperimentConfig {
    pub fn new(
        problem: &str,
        t_list: Vec<usize>,
        seeds: usize,
        measurement: Measurement,
        output_dir: impl Into<PathBuf>,
    ) -> Self {
        Self {
            problem: problem.to_string(),
            mode: None,
            t_list,
            seeds,
            base_seed: 0,
            schedule: ScheduleOverrides::default(),
            gamma: default_gamma(),
            rho: None,
            measurement,
            output_dir: output_dir.into(),
            x0: None,
            n_mc: default_n_mc(),
            goldstein_samples: default_goldstein_samples(),
            goldstein_delta: None,
            directions_per_step: default_directions(),
        }
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        serde_json::from_str(&text).map_err(|source| HarnessError::Json { path: path.to_path_buf(), source })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(HarnessError::InvalidConfig(msg));
        if self.t_list.is_empty() {
            return bad("t_list is empty".into());
        }
        if self.t_list[0] == 0 || self.t_list.windows(2).any(|w| w[0] >= w[1]) {
            return bad(format!("t_list must be positive and strictly increasing, got {:?}", self.t_list));
        }
        if self.seeds == 0 {
            return bad("seeds must be at least 1".into());
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return bad(format!("gamma must be positive, got {}", self.gamma));
        }
        if let Some(rho) = self.rho {
            if !(rho >= 0.0 && rho.is_finite()) {
                return bad(format!("rho must be finite and non-negative, got {rho}"));
            }
            if self.measurement == Measurement::Envelope && self.gamma * (rho + 1.0) >= 1.0 {
                return bad(format!("gamma = {} must be below 1/(rho + 1) = {}", self.gamma, 1.0 / (rho + 1.0)));
            }
        }
        if self.directions_per_step == 0 {
            return bad("directions_per_step must be at least 1".into());
        }
        for (name, v) in [
            ("c_eta", self.schedule.c_eta),
            ("c_eps", self.schedule.c_eps),
            ("c_w", self.schedule.c_w),
            ("goldstein_delta", self.goldstein_delta),
        ] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return bad(format!("{name} must be positive, got {v}"));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> ExperimentConfig {
        ExperimentConfig::new("P1-line", vec![10, 100, 1000], 2, Measurement::Envelope, "out")
    }

    #[test]
    fn parses_minimal_json_with_defaults() {
        let cfg: ExperimentConfig = serde_json::from_str(
            r#"{"problem": "P1-line", "t_list": [10, 100], "seeds": 3,
                "measurement": "clarke-smoothing", "output_dir": "o"}"#,
        )
        .unwrap();
        assert_eq!(cfg.gamma, 0.1);
        assert_eq!(cfg.n_mc, 1_000);
        assert_eq!(cfg.schedule.constants().c_eps, 1.0);
        cfg.validate().unwrap();
    }

    #[test]
    fn rejects_unknown_fields() {
        let r: std::result::Result<ExperimentConfig, _> = serde_json::from_str(
            r#"{"problem": "P1-line", "t_list": [10], "seeds": 1, "measurement": "envelope",
                "output_dir": "o", "gamma_typo": 1}"#,
        );
        assert!(r.is_err());
    }

    #[test]
    fn t_list_must_increase() {
        let mut cfg = base();
        cfg.t_list = vec![100, 100];
        assert!(cfg.validate().is_err());
        cfg.t_list = vec![];
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn gamma_checked_against_declared_rho() {
        let mut cfg = base();
        cfg.rho = Some(35.6);
        assert!(cfg.validate().is_err());
        cfg.gamma = 0.02;
        cfg.validate().unwrap();
        cfg.measurement = Measurement::ClarkeSmoothing;
        cfg.gamma = 0.5;
        cfg.validate().unwrap();
    }

    #[test]
    fn seeds_must_be_positive() {
        let mut cfg = base();
        cfg.seeds = 0;
        assert!(cfg.validate().is_err());
    }
}
