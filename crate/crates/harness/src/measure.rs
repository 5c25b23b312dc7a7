use hyperstat::rng::StreamRng;
use hyperstat::stationarity::{default_fd_step, Certificate};
use hyperstat::{
    clarke_certificate, envelope_gradient_norm, goldstein_gap, ClarkeConfig, EnvelopeConfig, HyperObjective, Problem,
};

use crate::config::Measurement;
use crate::error::{HarnessError, Result};

/// Parameters of a stationarity measurement at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasureSettings {
    pub measurement: Measurement,
    /// Envelope parameter γ.
    pub gamma: f64,
    /// Declared weak-convexity/concavity modulus.
    pub rho: Option<f64>,
    /// Smoothing radius ε (certificate and default Goldstein radius).
    pub eps: f64,
    /// Inner accuracy for problems without a closed form.
    pub inner_tol: f64,
    pub n_mc: usize,
    pub goldstein_samples: usize,
    pub goldstein_delta: Option<f64>,
}

impl MeasureSettings {
    pub fn new(measurement: Measurement) -> Self {
        Self {
            measurement,
            gamma: 0.1,
            rho: None,
            eps: 0.01,
            inner_tol: 1e-8,
            n_mc: 1_000,
            goldstein_samples: 100,
            goldstein_delta: None,
        }
    }
}

/// √(2εM_φ)
pub fn smoothing_delta(p: &Problem, eps: f64) -> f64 {
    (2.0 * eps * p.hyper_lipschitz()).sqrt()
}

pub fn measure_at(p: &Problem, x: &[f64], s: &MeasureSettings, rng: &mut StreamRng) -> Result<Certificate<f64>> {
    let exact = p.exact_hyper().is_some();
    let oracle = HyperObjective::exact_or_tol(p, s.inner_tol);
    match s.measurement {
        Measurement::Envelope => {
            let mut cfg = EnvelopeConfig::new(s.gamma).with_lipschitz(p.hyper_lipschitz());
            if !exact {
                // prox queries ask for accuracy prox_tol²
                cfg = cfg.with_prox_tol(cfg.prox_tol.max(s.inner_tol.sqrt()));
            }
            if let Some(rho) = s.rho {
                cfg = cfg.with_rho(rho);
            }
            let g = envelope_gradient_norm(&oracle, x, &cfg)?;
            let mut cert = Certificate::from_envelope(x, &g, s.gamma);
            cert.details.insert("non_unimodal_warning".into(), f64::from(u8::from(g.non_unimodal_warning)));
            Ok(cert)
        }
        Measurement::ClarkeSmoothing => {
            let rho = match s.rho {
                Some(r) => r,
                None => {
                    let r = p.theory_moduli().weak_modulus;
                    if !r.is_finite() {
                        return Err(HarnessError::InvalidConfig(format!(
                            "{} has no finite theory modulus; declare rho",
                            p.name
                        )));
                    }
                    r
                }
            };
            let mut cfg = ClarkeConfig::new(s.eps, rho, s.n_mc);
            cfg.inner_tol = if exact { 0.0 } else { s.inner_tol };
            Ok(clarke_certificate(p, x, &cfg, rng)?)
        }
        Measurement::Goldstein => {
            let delta = s.goldstein_delta.unwrap_or_else(|| smoothing_delta(p, s.eps));
            Ok(goldstein_gap(&oracle, x, delta, s.goldstein_samples, default_fd_step(x), rng)?)
        }
    }
}
