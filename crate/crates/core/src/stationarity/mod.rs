//! Stationarity measures for the (nonsmooth) hyper-objective.
//!
//! * Moreau envelope: `‖∇φ_γ(x)‖ = ‖x − prox_γ(x)‖/γ` certifies that some point
//!   within `γ·ε` of `x` has a Clarke subgradient of norm ≤ ε.
//! * Randomized smoothing: for a ρ-weakly concave φ, the gradient of the
//!   ball-smoothed φ^ε bounds the Clarke distance on `B(x, √ν)`, `ν = 2εM_φ`.
//! * Goldstein: min-norm element of the convex hull of sampled gradients in
//!   `B(x, δ)`. Strictly weaker than the Clarke notions.

mod clarke;
mod goldstein;
pub mod hull;
mod prox;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

pub use clarke::{clarke_certificate, ClarkeConfig, CONFIDENCE_INFLATION};
pub use goldstein::{default_fd_step, goldstein_gap};
pub use prox::{envelope_gradient_norm, moreau_prox, EnvelopeConfig, EnvelopeGradient, ProxPoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertificateKind {
    ClarkeEnvelope,
    ClarkeSmoothing,
    Goldstein,
}

/// `(ε, δ)` stationarity statement at a point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Certificate<T: Scalar> {
    pub kind: CertificateKind,
    pub epsilon: T,
    pub delta: T,
    pub at_x: Vec<T>,
    /// ν = 2εM_φ for smoothing certificates.
    pub nu: Option<T>,
    /// Sample counts, tolerances and intermediate quantities.
    pub details: BTreeMap<String, f64>,
}

impl<T: Scalar> Certificate<T> {
    /// Clarke certificate implied by an envelope-gradient norm: some point of
    /// `B(x, γ·norm)` has a subgradient of norm ≤ `norm`.
    pub fn from_envelope(x: &[T], gradient: &EnvelopeGradient<T>, gamma: T) -> Self {
        let mut details = BTreeMap::new();
        details.insert("gamma".into(), gamma.as_f64());
        details.insert("prox_evals".into(), gradient.evals as f64);
        Self {
            kind: CertificateKind::ClarkeEnvelope,
            epsilon: gradient.norm,
            delta: gamma * gradient.norm,
            at_x: x.to_vec(),
            nu: None,
            details,
        }
    }
}
