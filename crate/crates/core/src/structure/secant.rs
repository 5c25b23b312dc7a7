use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{to_f64, PropertyReport, Verdict, WorstCase};
use crate::error::{check_dim, Error, Result};
use crate::linalg;
use crate::oracle::ValueOracle;
use crate::problem::Bounds;
use crate::rng;
use crate::scalar::Scalar;

/// Triples with `θ(1−θ)‖x1−x2‖²` below this are resampled.
const MIN_DENOMINATOR: f64 = 1e-8;
/// Relative inner accuracy for each value: `w ≤ 1e-10·θ(1−θ)‖x1−x2‖²`.
const VALUE_ACCURACY: f64 = 1e-10;

/// Pair distances of the shrinking-scale probe.
pub const ZOOM_SCALES: [f64; 3] = [1e-1, 1e-2, 1e-3];
/// Growth of the probe maximum per decade that signals an unbounded modulus.
pub const ZOOM_GROWTH: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sense {
    Convexity,
    Concavity,
}

impl Sense {
    fn sign<T: Scalar>(self) -> T {
        match self {
            Self::Convexity => T::one(),
            Self::Concavity => -T::one(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecantOptions {
    /// Worst triples whose midpoints seed the shrinking-scale probe.
    pub anchors: usize,
    pub theory: Option<f64>,
}

impl Default for SecantOptions {
    fn default() -> Self {
        Self { anchors: 100, theory: None }
    }
}

/// `2[φ(x^θ) − θφ(x1) − (1−θ)φ(x2)] / (θ(1−θ)‖x1−x2‖²)`, applied to `−φ` for
/// concavity. Values are requested to accuracy `1e-10·θ(1−θ)‖x1−x2‖²`.
pub fn secant_quotient<T: Scalar, O: ValueOracle<T> + ?Sized>(
    phi: &O,
    x1: &[T],
    x2: &[T],
    theta: T,
    sense: Sense,
) -> Result<T> {
    check_dim("x1", phi.dim(), x1.len())?;
    check_dim("x2", phi.dim(), x2.len())?;
    let denom = theta * (T::one() - theta) * linalg::norm_sq(&linalg::sub(x1, x2));
    if !(denom > T::zero()) {
        return Err(Error::InvalidArgument("degenerate secant triple".into()));
    }
    let w = T::lit(VALUE_ACCURACY) * denom;
    let mid = phi.value_within(&linalg::lerp(theta, x1, x2), w)?;
    let f1 = phi.value_within(x1, w)?;
    let f2 = phi.value_within(x2, w)?;
    let mut gap = mid - theta * f1 - (T::one() - theta) * f2;
    // below the rounding floor of the three values the sign is meaningless
    let floor = T::lit(8.0) * T::epsilon() * (mid.abs() + theta * f1.abs() + (T::one() - theta) * f2.abs());
    if gap.abs() <= floor {
        gap = T::zero();
    }
    Ok(sense.sign::<T>() * T::lit(2.0) * gap / denom)
}

pub fn secant_modulus<T: Scalar, O: ValueOracle<T> + ?Sized, R: Rng + ?Sized>(
    phi: &O,
    sense: Sense,
    n_triples: usize,
    bx: &Bounds<T>,
    rng: &mut R,
) -> Result<PropertyReport> {
    secant_modulus_with(phi, sense, n_triples, bx, rng, &SecantOptions::default())
}

/// Sampled weak-convexity (or concavity) modulus over a box, followed by a
/// shrinking-scale probe around the worst triples. At each scale `s` the
/// probe evaluates `(c − s/2·d, c + s/2·d, θ = ½)` on centers `c` spaced
/// `s/4` within `2s` of the anchor's current center, then moves that center to
/// the best one. A probe maximum growing by at least [`ZOOM_GROWTH`] per
/// decade gives `NoFiniteModulus`.
pub fn secant_modulus_with<T: Scalar, O: ValueOracle<T> + ?Sized, R: Rng + ?Sized>(
    phi: &O,
    sense: Sense,
    n_triples: usize,
    bx: &Bounds<T>,
    rng: &mut R,
    opts: &SecantOptions,
) -> Result<PropertyReport> {
    check_dim("box", phi.dim(), bx.dim())?;
    if n_triples == 0 {
        return Err(Error::InvalidArgument("at least one triple is required".into()));
    }
    let property = match sense {
        Sense::Convexity => "secant-convexity",
        Sense::Concavity => "secant-concavity",
    };
    let mut best = f64::NEG_INFINITY;
    let mut worst = WorstCase::default();
    let mut resamples = 0usize;
    // (quotient, midpoint, unit direction)
    let mut ranked: Vec<(f64, Vec<T>, Vec<T>)> = Vec::with_capacity(n_triples);
    for _ in 0..n_triples {
        let (x1, x2, theta) = loop {
            let x1 = bx.sample(rng);
            let x2 = bx.sample(rng);
            let theta: T = rng::uniform(rng, T::zero(), T::one());
            let denom = theta * (T::one() - theta) * linalg::norm_sq(&linalg::sub(&x1, &x2));
            if denom.as_f64() >= MIN_DENOMINATOR {
                break (x1, x2, theta);
            }
            resamples += 1;
        };
        let q = secant_quotient(phi, &x1, &x2, theta, sense)?.as_f64();
        if q > best {
            best = q;
            worst.value = q;
            worst.points = BTreeMap::from([
                ("x1".to_string(), to_f64(&x1)),
                ("x2".to_string(), to_f64(&x2)),
                ("theta".to_string(), vec![theta.as_f64()]),
            ]);
        }
        if opts.anchors > 0 {
            let mid = linalg::lerp(theta, &x1, &x2);
            if let Some(dir) = linalg::normalized(&linalg::sub(&x2, &x1)) {
                ranked.push((q, mid, dir));
            }
        }
    }
    ranked.sort_by(|a, b| b.0.total_cmp(&a.0));
    ranked.truncate(opts.anchors);

    // each anchor's center follows the best center of the previous scale
    let mut centers: Vec<Vec<T>> = ranked.iter().map(|(_, c, _)| c.clone()).collect();
    let mut probe = [0.0f64; ZOOM_SCALES.len()];
    for (k, &s) in ZOOM_SCALES.iter().enumerate() {
        let s = T::lit(s);
        let half = s / T::lit(2.0);
        let mut q_max = f64::NEG_INFINITY;
        for (center, (_, _, dir)) in centers.iter_mut().zip(&ranked) {
            let mut best_c = center.clone();
            let mut best_q = f64::NEG_INFINITY;
            for j in -8i32..=8 {
                let c = linalg::axpy(center, T::lit(f64::from(j)) * s / T::lit(4.0), dir);
                let x1 = linalg::axpy(&c, -half, dir);
                let x2 = linalg::axpy(&c, half, dir);
                let q = secant_quotient(phi, &x1, &x2, T::lit(0.5), sense)?.as_f64();
                if q > best_q {
                    best_q = q;
                    best_c = c;
                }
            }
            *center = best_c;
            q_max = q_max.max(best_q);
        }
        probe[k] = q_max;
    }
    let unbounded =
        !ranked.is_empty() && probe.iter().all(|&q| q > 0.0) && probe.windows(2).all(|w| w[1] >= ZOOM_GROWTH * w[0]);

    let mut report = PropertyReport::new(property, n_triples, best.max(0.0), opts.theory, worst);
    if unbounded {
        report.verdict = Verdict::NoFiniteModulus;
    }
    report.details.insert("raw_modulus".into(), best);
    report.details.insert("resamples".into(), resamples as f64);
    report.details.insert("anchors".into(), ranked.len() as f64);
    for (s, q) in ZOOM_SCALES.iter().zip(probe) {
        report.details.insert(format!("zoom_{s:e}"), q);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::FnOracle;
    use crate::problem::{registry_get, ProblemSpec};
    use crate::rng::seeded;

    fn exact(name: &str) -> (ProblemSpec<f64>, impl ValueOracle<f64>) {
        let p: ProblemSpec<f64> = registry_get(name).unwrap();
        let phi = p.exact_hyper().unwrap().clone();
        (p, FnOracle::new(1, move |x: &[f64]| phi(x)))
    }

    #[test]
    fn convex_function_has_zero_modulus() {
        let abs = FnOracle::new(1, |x: &[f64]| x[0].abs());
        let r = secant_modulus(&abs, Sense::Convexity, 20_000, &Bounds::cube(1, -2.0, 2.0), &mut seeded(1)).unwrap();
        assert_eq!(r.empirical_modulus, 0.0);
        assert_eq!(r.verdict, Verdict::Satisfied);
    }

    #[test]
    fn box_counterexample_quotient_is_inverse_width() {
        let (_, phi) = exact("P3-box-counterexample");
        for h in [1e-1, 1e-2, 1e-3] {
            let q = secant_quotient(&phi, &[-h], &[h], 0.5, Sense::Convexity).unwrap();
            assert!((q - 1.0 / h).abs() <= 1e-9 / h, "h = {h}: {q}");
        }
    }

    #[test]
    fn box_counterexample_has_no_finite_modulus() {
        let (p, phi) = exact("P3-box-counterexample");
        let r = secant_modulus(&phi, Sense::Convexity, 20_000, &p.constants.working_box, &mut seeded(2)).unwrap();
        assert_eq!(r.verdict, Verdict::NoFiniteModulus, "{r:?}");
    }

    #[test]
    fn smooth_concave_function_is_not_flagged() {
        let f = FnOracle::new(1, |x: &[f64]| -(1.0 + x[0] * x[0]).sqrt());
        let r = secant_modulus(&f, Sense::Convexity, 20_000, &Bounds::cube(1, -5.0, 5.0), &mut seeded(3)).unwrap();
        assert!(r.empirical_modulus <= 1.0 && r.empirical_modulus > 0.9);
        assert_eq!(r.verdict, Verdict::Satisfied);
    }

    #[test]
    fn concavity_flips_sign() {
        let f = FnOracle::new(1, |x: &[f64]| 0.5 * 3.0 * x[0] * x[0]);
        let q = secant_quotient(&f, &[0.0], &[1.0], 0.3, Sense::Convexity).unwrap();
        assert!((q + 3.0).abs() < 1e-12);
        let q = secant_quotient(&f, &[0.0], &[1.0], 0.3, Sense::Concavity).unwrap();
        assert!((q - 3.0).abs() < 1e-12);
    }
}
