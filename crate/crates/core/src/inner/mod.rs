//! Inexact evaluation of the hyper-objective: returns φ̃(x) with a certified
//! bound `|φ̃(x) − φ(x)| ≤ w`.

pub mod search;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg;
use crate::problem::ProblemSpec;
use crate::scalar::Scalar;

use search::{certified_maximize, MaximizeSettings};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct InnerResult<T: Scalar> {
    /// φ̃(x)
    pub value: T,
    /// Optimal lower-level point found; `None` when the closed form answered.
    pub witness_y: Option<Vec<T>>,
    /// Certified bound on |φ̃(x) − φ(x)|.
    pub achieved_tol: T,
    /// Objective evaluations spent.
    pub evals: usize,
    /// Parameter bound applied to unbounded fibers, if any were cut.
    pub truncation: Option<T>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnerOptions<T> {
    /// Answer from the closed-form hyper-objective when one exists.
    pub use_exact: bool,
    pub budget: usize,
    /// Unbounded fibers are cut to parameter range `[−truncation, truncation]`.
    pub truncation: T,
    pub starts: usize,
}

impl<T: Scalar> Default for InnerOptions<T> {
    fn default() -> Self {
        Self { use_exact: true, budget: 200_000, truncation: T::lit(4.0) * T::PI(), starts: 16 }
    }
}

impl<T: Scalar> InnerOptions<T> {
    pub fn descriptor_only() -> Self {
        Self { use_exact: false, ..Self::default() }
    }
}

fn check_tol<T: Scalar>(w: T) -> Result<()> {
    if w >= T::zero() && w.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("accuracy must be finite and ≥ 0, got {w}")))
    }
}

/// φ̃(x) within `w` of the mode's hyper-objective.
pub fn inner_value<T: Scalar>(p: &ProblemSpec<T>, x: &[T], w: T) -> Result<InnerResult<T>> {
    inner_value_with(p, x, w, &InnerOptions::default())
}

pub fn inner_value_with<T: Scalar>(
    p: &ProblemSpec<T>,
    x: &[T],
    w: T,
    opts: &InnerOptions<T>,
) -> Result<InnerResult<T>> {
    check_dim("x", p.m, x.len())?;
    check_tol(w)?;
    if opts.use_exact {
        if let Some(phi) = p.exact_hyper() {
            return Ok(InnerResult {
                value: phi(x),
                witness_y: None,
                achieved_tol: T::zero(),
                evals: 1,
                truncation: None,
            });
        }
    }
    if p.descriptor.is_none() {
        return Err(Error::NoOracle(p.name.clone()));
    }
    solve_on_descriptor(p, x, w, opts)
}

/// As [`inner_value`], but always solves over the descriptor so that the
/// optimal `y` is returned.
pub fn inner_argopt<T: Scalar>(p: &ProblemSpec<T>, x: &[T], w: T) -> Result<InnerResult<T>> {
    check_dim("x", p.m, x.len())?;
    check_tol(w)?;
    if p.descriptor.is_none() {
        return Err(Error::NoOracle(p.name.clone()));
    }
    solve_on_descriptor(p, x, w, &InnerOptions::descriptor_only())
}

fn solve_on_descriptor<T: Scalar>(p: &ProblemSpec<T>, x: &[T], w: T, opts: &InnerOptions<T>) -> Result<InnerResult<T>> {
    let descriptor = p.descriptor()?;
    let upper = p.upper.as_ref().ok_or_else(|| Error::MissingObjective(p.name.clone(), "upper"))?;
    let pieces = descriptor.pieces(x, opts.truncation)?;
    if w == T::zero() && pieces.iter().any(|pc| !pc.is_degenerate()) {
        return Err(Error::InvalidArgument("w = 0 needs a closed-form hyper-objective".into()));
    }
    let truncated = pieces.iter().any(|pc| pc.truncated_lo || pc.truncated_hi);
    let sign: T = p.mode.sign();
    let c = &p.constants;
    let settings = MaximizeSettings {
        lipschitz: c.upper_lipschitz,
        smoothness: c.upper_smoothness.is_finite().then_some(c.upper_smoothness),
        tol: w,
        budget: opts.budget,
        starts: opts.starts,
    };
    let (best, shortfall) = certified_maximize(&pieces, |y| sign * upper(x, y), &settings)?;
    if let Some(shortfall) = shortfall {
        let slack = (T::lit(4.0) * w).max(T::epsilon().sqrt() * (T::one() + best.value.abs()));
        if shortfall > slack {
            return Err(Error::UnboundedInner { bound: opts.truncation.as_f64() });
        }
    }
    Ok(InnerResult {
        value: sign * best.value,
        witness_y: Some(best.point),
        achieved_tol: best.gap,
        evals: best.evals,
        truncation: truncated.then_some(opts.truncation),
    })
}

/// Gradient descent on `f(x, ·)` (projected onto the lower box when present)
/// until the error bound certifies `dist(y, S(x)) ≤ tol`, i.e. until the
/// (projected) gradient norm drops to `tol / τ`. Starts from `y0`, or from a
/// standard normal draw.
pub fn lower_level_solve<T: Scalar, R: Rng + ?Sized>(
    p: &ProblemSpec<T>,
    x: &[T],
    y0: Option<&[T]>,
    tol: T,
    rng: &mut R,
) -> Result<Vec<T>> {
    check_dim("x", p.m, x.len())?;
    if !(tol > T::zero()) {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    const MAX_STEPS: usize = 100_000;
    let mut y = match y0 {
        Some(y0) => {
            check_dim("y", p.n, y0.len())?;
            y0.to_vec()
        }
        None => crate::rng::gaussian_vec(rng, p.n),
    };
    if let Some(b) = &p.lower_box {
        y = b.clamp(&y);
    }
    let c = &p.constants;
    let lip = if c.lower_smoothness > T::zero() { c.lower_smoothness } else { T::one() };
    let target = tol / c.error_bound;
    let mut stationarity = T::infinity();
    for _ in 0..=MAX_STEPS {
        let g = p.lower_grad_y(x, &y)?;
        let next = linalg::axpy(&y, -T::one() / lip, &g);
        let next = match &p.lower_box {
            Some(b) => b.clamp(&next),
            None => next,
        };
        // gradient mapping L·(y − y⁺); equals ∇_y f without a box
        stationarity = lip * linalg::dist(&y, &next);
        if stationarity <= target {
            return Ok(y);
        }
        y = next;
    }
    Err(Error::BudgetExceeded {
        budget: MAX_STEPS,
        best_value: p.eval_lower(x, &y)?.as_f64(),
        achieved_tol: (stationarity * c.error_bound).as_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{registry_get, Mode};
    use crate::rng::seeded;
    use std::f64::consts::PI;

    fn fixture(name: &str) -> ProblemSpec<f64> {
        registry_get(name).unwrap()
    }

    #[test]
    fn box_counterexample_inner_value() {
        let p = fixture("P3-box-counterexample");
        let r = inner_value_with(&p, &[0.5], 1e-9, &InnerOptions::descriptor_only()).unwrap();
        assert_eq!(r.value, -1.5);
        assert_eq!(r.witness_y.unwrap(), vec![0.5, 1.0]);
        assert_eq!(r.achieved_tol, 0.0);
    }

    #[test]
    fn line_pessimistic_by_descriptor() {
        let p = fixture("P1-line");
        let r = inner_value_with(&p, &[0.0], 1e-6, &InnerOptions::descriptor_only()).unwrap();
        assert!((r.value - 1.0).abs() <= 1e-6, "{}", r.value);
        assert!(r.achieved_tol <= 1e-6);
        assert_eq!(r.truncation, Some(4.0 * PI));
    }

    #[test]
    fn sin_interval_pessimistic_by_descriptor() {
        let p = fixture("P2-sin-interval");
        let r = inner_value_with(&p, &[1.0], 1e-8, &InnerOptions::descriptor_only()).unwrap();
        assert!((r.value - (1.0 - 1.0f64.sin())).abs() <= 1e-8);
        assert!((r.value - 0.158529).abs() < 1e-6);
    }

    #[test]
    fn argopt_examples() {
        let p = fixture("P3-box-counterexample");
        let r = inner_argopt(&p, &[2.0], 1e-9).unwrap();
        assert_eq!(r.value, -2.0);
        assert_eq!(r.witness_y.unwrap(), vec![1.0, 1.0]);

        let p = fixture("P2-sin-interval").with_mode(Mode::Optimistic);
        let r = inner_argopt(&p, &[0.0], 1e-9).unwrap();
        assert_eq!(r.value, 0.0);
        let y = r.witness_y.unwrap()[0];
        assert!((-1.0..=1.0).contains(&y));

        let p = fixture("P1-line").with_mode(Mode::Optimistic);
        let r = inner_argopt(&p, &[1.0], 1e-6).unwrap();
        assert!(r.value.abs() <= 1e-6);
        let y = r.witness_y.unwrap();
        assert!((y[0] + y[1] - 1.0).abs() < 1e-12);
        // sin(y₁ − y₂) = −1 at the witness
        assert!(((y[0] - y[1]).sin() + 1.0).abs() < 1e-6);
    }

    #[test]
    fn zero_tolerance_needs_closed_form() {
        let p = fixture("P1-line");
        assert_eq!(inner_value(&p, &[0.3], 0.0).unwrap().value, 1.3);
        assert!(matches!(
            inner_value_with(&p, &[0.3], 0.0, &InnerOptions::descriptor_only()),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(inner_value(&p, &[0.3], -1.0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn no_oracle_without_descriptor_or_closed_form() {
        let mut p = fixture("P1-line").without_exact();
        p.descriptor = None;
        assert_eq!(inner_value(&p, &[0.0], 1e-3).unwrap_err(), Error::NoOracle("P1-line".into()));
    }

    #[test]
    fn unbounded_inner_is_reported() {
        // F grows linearly along the line, so the pessimistic sup is +∞
        let p = fixture("P1-line").without_exact().with_upper(|_, y| y[0] - y[1]);
        assert!(matches!(inner_value(&p, &[0.0], 1e-6), Err(Error::UnboundedInner { .. })));
    }

    #[test]
    fn lower_level_solve_examples() {
        let mut rng = seeded(0);
        let p = fixture("P1-line");
        let tol = 1e-8;
        let y = lower_level_solve(&p, &[2.0], Some(&[0.0, 0.0]), tol, &mut rng).unwrap();
        assert!((y[0] + y[1] - 2.0).abs() <= tol * 2f64.sqrt());

        let on_line = [0.7, -0.7];
        assert_eq!(lower_level_solve(&p, &[0.0], Some(&on_line), tol, &mut rng).unwrap(), on_line);

        let p = fixture("P2-sin-interval");
        let y = lower_level_solve(&p, &[0.0], Some(&[5.0]), tol, &mut rng).unwrap();
        assert!(y[0] <= 1.0 + tol && y[0] >= -1.0 - tol);
        assert!(p.solution_set_distance(&[0.0], &y).unwrap() <= tol);
    }

    #[test]
    fn lower_level_solve_respects_box() {
        let mut rng = seeded(1);
        let p = fixture("P3-box-counterexample");
        let y = lower_level_solve(&p, &[0.3], None, 1e-9, &mut rng).unwrap();
        assert!((y[0] - 0.3).abs() < 1e-8 && (y[1] - 1.0).abs() < 1e-8);
    }
}
