use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Certificate, CertificateKind};
use crate::error::{Error, Result};
use crate::inner::InnerOptions;
use crate::linalg;
use crate::problem::ProblemSpec;
use crate::scalar::Scalar;
use crate::zeroth_order::{sample_unit_sphere, two_point_estimate_with};

/// Standard errors added to the Monte Carlo mean norm.
pub const CONFIDENCE_INFLATION: f64 = 3.0;

pub const MIN_MC_SAMPLES: usize = 1_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ClarkeConfig<T: Scalar> {
    /// Smoothing radius ε.
    pub eps: T,
    /// Weak-convexity/concavity modulus ρ used in the transport term.
    pub rho: T,
    pub n_mc: usize,
    /// Inner accuracy `w` for each value query (0 = exact when available).
    pub inner_tol: T,
}

impl<T: Scalar> ClarkeConfig<T> {
    pub fn new(eps: T, rho: T, n_mc: usize) -> Self {
        Self { eps, rho, n_mc, inner_tol: T::zero() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps > T::zero()) || !self.eps.is_finite() {
            return Err(Error::InvalidArgument("smoothing radius eps must be positive".into()));
        }
        if !(self.rho >= T::zero()) || !self.rho.is_finite() {
            return Err(Error::InvalidArgument("rho must be finite and non-negative".into()));
        }
        if self.n_mc < MIN_MC_SAMPLES {
            return Err(Error::InvalidArgument(format!("n_mc must be at least {MIN_MC_SAMPLES}")));
        }
        if !(self.inner_tol >= T::zero()) {
            return Err(Error::InvalidArgument("inner_tol must be non-negative".into()));
        }
        Ok(())
    }
}

/// Clarke certificate from the smoothed gradient:
/// `ε = ‖mean G‖ + (ρ+1)√ν + 3·stderr (+ m·w/ε)`, `δ = √ν`, `ν = 2εM_φ`.
pub fn clarke_certificate<T: Scalar, R: Rng + ?Sized>(
    p: &ProblemSpec<T>,
    x: &[T],
    cfg: &ClarkeConfig<T>,
    rng: &mut R,
) -> Result<Certificate<T>> {
    cfg.validate()?;
    crate::error::check_dim("x", p.m, x.len())?;
    let m = p.m;
    let opts = InnerOptions::default();
    let mut sum = vec![0.0f64; m];
    let mut sum_sq = 0.0f64;
    for _ in 0..cfg.n_mc {
        let u: Vec<T> = sample_unit_sphere(rng, m);
        let g = two_point_estimate_with(p, x, &u, cfg.eps, cfg.inner_tol, &opts)?;
        for (s, gi) in sum.iter_mut().zip(&g) {
            *s += gi.as_f64();
        }
        sum_sq += linalg::norm_sq(&g).as_f64();
    }
    let n = cfg.n_mc as f64;
    let mean: Vec<f64> = sum.iter().map(|s| s / n).collect();
    let mean_norm = linalg::norm(&mean);
    // total variance of the vector estimator, trace of the covariance
    let variance = ((sum_sq / n - linalg::norm_sq(&mean)) * n / (n - 1.0)).max(0.0);
    let stderr = (variance / n).sqrt();

    let m_phi = p.hyper_lipschitz().as_f64();
    let eps = cfg.eps.as_f64();
    let nu = 2.0 * eps * m_phi;
    let transport = (cfg.rho.as_f64() + 1.0) * nu.sqrt();
    let inexact = m as f64 * cfg.inner_tol.as_f64() / eps;
    let epsilon = mean_norm + transport + CONFIDENCE_INFLATION * stderr + inexact;

    let mut details = BTreeMap::new();
    details.insert("n_mc".into(), n);
    details.insert("mc_mean_norm".into(), mean_norm);
    details.insert("mc_stderr".into(), stderr);
    details.insert("confidence_inflation".into(), CONFIDENCE_INFLATION);
    details.insert("transport".into(), transport);
    details.insert("inexactness".into(), inexact);
    details.insert("smoothing_radius".into(), eps);
    details.insert("rho".into(), cfg.rho.as_f64());
    details.insert("inner_tol".into(), cfg.inner_tol.as_f64());
    Ok(Certificate {
        kind: CertificateKind::ClarkeSmoothing,
        epsilon: T::lit(epsilon),
        delta: T::lit(nu.sqrt()),
        at_x: x.to_vec(),
        nu: Some(T::lit(nu)),
        details,
    })
}
