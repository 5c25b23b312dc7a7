//! Empirical checks of the structural theory: Lipschitz continuity of the
//! solution map, set smoothness with explicit witnesses, and secant moduli of
//! the hyper-objectives.

mod secant;
mod witness;

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::linalg;
use crate::oracle::ValueOracle;
use crate::problem::{Bounds, ConstantsBundle, ProblemSpec, SetMapDescriptor};
use crate::scalar::Scalar;

pub use secant::{
    secant_modulus, secant_modulus_with, secant_quotient, SecantOptions, Sense, ZOOM_GROWTH, ZOOM_SCALES,
};
pub use witness::{
    backfill_witness, default_witness_mode, pairing_boundary, set_smoothness_check, Backfill, WitnessMode, WitnessTuple,
};

/// Slack allowed between an empirical and a theoretical modulus.
pub const REPORT_TOLERANCE: f64 = 1e-9;

/// Pairs closer than this are skipped by the Lipschitz checks.
const MIN_PAIR_DISTANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct TheoryModuli<T: Scalar> {
    /// M_S = L_f τ
    pub solution_lipschitz: T,
    /// M_φ = M_F (1 + L_f τ)
    pub hyper_lipschitz: T,
    /// L_S = max{2 H_f τ (1 + 9 L_f² τ²), 4 L_f² τ²}
    pub set_smoothness: T,
    /// ρ = M_F L_S + L_F (1 + L_S)
    pub weak_modulus: T,
}

/// Product with the convention `0 · ∞ = 0`.
fn mul<T: Scalar>(a: T, b: T) -> T {
    if a == T::zero() || b == T::zero() {
        T::zero()
    } else {
        a * b
    }
}

pub fn theory_moduli<T: Scalar>(c: &ConstantsBundle<T>) -> TheoryModuli<T> {
    let two = T::lit(2.0);
    let lf_tau = mul(c.lower_smoothness, c.error_bound);
    let lf_tau_sq = lf_tau * lf_tau;
    let hyper_lipschitz = mul(c.upper_lipschitz, T::one() + lf_tau);
    let curvature = mul(two * c.lower_hessian_lipschitz, c.error_bound * (T::one() + T::lit(9.0) * lf_tau_sq));
    let set_smoothness = curvature.max(T::lit(4.0) * lf_tau_sq);
    let weak_modulus = mul(c.upper_lipschitz, set_smoothness) + mul(c.upper_smoothness, T::one() + set_smoothness);
    TheoryModuli { solution_lipschitz: lf_tau, hyper_lipschitz, set_smoothness, weak_modulus }
}

pub fn hausdorff_distance<T: Scalar>(d: &SetMapDescriptor<T>, x1: &[T], x2: &[T]) -> T {
    d.hausdorff(x1, x2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Satisfied,
    Violated,
    NoFiniteModulus,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Satisfied => "satisfied",
            Self::Violated => "violated",
            Self::NoFiniteModulus => "no-finite-modulus",
        })
    }
}

/// The extremal sample of a check.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct WorstCase {
    pub points: BTreeMap<String, Vec<f64>>,
    /// The sample's modulus estimate.
    pub value: f64,
    /// Excess over the theory modulus (0 when within it or when no theory
    /// modulus is known).
    pub violation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub property: String,
    pub samples: usize,
    pub empirical_modulus: f64,
    pub theory_modulus: Option<f64>,
    pub tolerance: f64,
    pub worst_case: WorstCase,
    pub verdict: Verdict,
    pub details: BTreeMap<String, f64>,
}

impl PropertyReport {
    fn new(property: &str, samples: usize, empirical: f64, theory: Option<f64>, worst_case: WorstCase) -> Self {
        let mut report = Self {
            property: property.to_string(),
            samples,
            empirical_modulus: empirical,
            theory_modulus: theory,
            tolerance: REPORT_TOLERANCE,
            worst_case,
            verdict: Verdict::Satisfied,
            details: BTreeMap::new(),
        };
        report.reassess();
        report
    }

    /// Attach (or replace) the theory modulus and recompute the verdict.
    /// A `NoFiniteModulus` verdict is kept.
    pub fn with_theory(mut self, theory: f64) -> Self {
        self.theory_modulus = Some(theory);
        self.reassess();
        self
    }

    fn reassess(&mut self) {
        if self.verdict == Verdict::NoFiniteModulus {
            return;
        }
        let within = self.theory_modulus.is_none_or(|t| self.empirical_modulus <= t + self.tolerance);
        self.verdict = if within { Verdict::Satisfied } else { Verdict::Violated };
        self.worst_case.violation = self.theory_modulus.map_or(0.0, |t| (self.worst_case.value - t).max(0.0));
    }

    pub fn is_satisfied(&self) -> bool {
        self.verdict == Verdict::Satisfied
    }
}

pub(crate) fn to_f64<T: Scalar>(v: &[T]) -> Vec<f64> {
    v.iter().map(|x| x.as_f64()).collect()
}

/// Sampled Hausdorff slopes `d_H(S(x1), S(x2)) / ‖x1 − x2‖` over the working
/// box against `M_S = L_f τ`.
pub fn lipschitz_check<T: Scalar, R: Rng + ?Sized>(
    p: &ProblemSpec<T>,
    n_pairs: usize,
    rng: &mut R,
) -> Result<PropertyReport> {
    let d = p.descriptor()?;
    let bx = &p.constants.working_box;
    let theory = p.theory_moduli().solution_lipschitz.as_f64();
    let (best, worst, skipped) = slope_scan(bx, n_pairs, rng, |x1, x2| Ok(d.hausdorff(x1, x2)))?;
    let mut report = PropertyReport::new("lipschitz", n_pairs, best, Some(theory), worst);
    report.details.insert("skipped_pairs".into(), skipped as f64);
    Ok(report)
}

/// Sampled slopes `|φ(x1) − φ(x2)| / ‖x1 − x2‖` of a hyper-objective oracle
/// against `M_φ`. `value_tol` is the oracle's additive accuracy and widens
/// the report tolerance accordingly.
pub fn hyper_lipschitz_check<T: Scalar, O: ValueOracle<T> + ?Sized, R: Rng + ?Sized>(
    p: &ProblemSpec<T>,
    phi: &O,
    n_pairs: usize,
    value_tol: T,
    rng: &mut R,
) -> Result<PropertyReport> {
    let bx = &p.constants.working_box;
    let theory = p.theory_moduli().hyper_lipschitz.as_f64();
    let (best, worst, skipped) = slope_scan(bx, n_pairs, rng, |x1, x2| {
        Ok(T::lit(0.0).max((phi.value(x1)? - phi.value(x2)?).abs() - value_tol - value_tol))
    })?;
    let mut report = PropertyReport::new("hyper-lipschitz", n_pairs, best, Some(theory), worst);
    report.details.insert("skipped_pairs".into(), skipped as f64);
    report.details.insert("value_tol".into(), value_tol.as_f64());
    Ok(report)
}

fn slope_scan<T: Scalar, R: Rng + ?Sized>(
    bx: &Bounds<T>,
    n_pairs: usize,
    rng: &mut R,
    mut gap: impl FnMut(&[T], &[T]) -> Result<T>,
) -> Result<(f64, WorstCase, usize)> {
    let mut best = 0.0;
    let mut worst = WorstCase::default();
    let mut skipped = 0;
    for _ in 0..n_pairs {
        let x1 = bx.sample(rng);
        let x2 = bx.sample(rng);
        let dx = linalg::dist(&x1, &x2).as_f64();
        if dx < MIN_PAIR_DISTANCE {
            skipped += 1;
            continue;
        }
        let slope = gap(&x1, &x2)?.as_f64() / dx;
        if slope > best || worst.points.is_empty() {
            best = slope.max(best);
            worst.value = best;
            worst.points = BTreeMap::from([("x1".to_string(), to_f64(&x1)), ("x2".to_string(), to_f64(&x2))]);
        }
    }
    Ok((best, worst, skipped))
}
