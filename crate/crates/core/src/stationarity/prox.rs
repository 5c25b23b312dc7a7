use std::cell::RefCell;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inner::search::golden_section;
use crate::linalg;
use crate::oracle::ValueOracle;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct EnvelopeConfig<T: Scalar> {
    pub gamma: T,
    pub prox_tol: T,
    /// Search radius around x. Defaults to `2γM/(1 − γρ)` when a Lipschitz
    /// modulus is known, else 1.
    pub bracket_radius: Option<T>,
    /// Declared weak-convexity modulus ρ. Requires γ < 1/(ρ+1).
    pub rho: Option<T>,
    pub lipschitz: Option<T>,
}

impl<T: Scalar> EnvelopeConfig<T> {
    pub fn new(gamma: T) -> Self {
        Self {
            gamma,
            prox_tol: T::lit(1e-10).max(T::epsilon() * T::lit(16.0)),
            bracket_radius: None,
            rho: None,
            lipschitz: None,
        }
    }

    pub fn with_rho(mut self, rho: T) -> Self {
        self.rho = Some(rho);
        self
    }

    pub fn with_lipschitz(mut self, lipschitz: T) -> Self {
        self.lipschitz = Some(lipschitz);
        self
    }

    pub fn with_prox_tol(mut self, tol: T) -> Self {
        self.prox_tol = tol;
        self
    }

    pub fn with_bracket_radius(mut self, radius: T) -> Self {
        self.bracket_radius = Some(radius);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > T::zero()) || !(self.prox_tol > T::zero()) {
            return Err(Error::InvalidArgument("gamma and prox_tol must be positive".into()));
        }
        if let Some(rho) = self.rho {
            if !(self.gamma * (rho + T::one()) < T::one()) {
                return Err(Error::InvalidArgument(format!(
                    "gamma = {} must be below 1/(rho + 1) = {}",
                    self.gamma,
                    T::one() / (rho + T::one())
                )));
            }
        }
        Ok(())
    }

    /// Whether the prox objective is certified strongly convex.
    fn certified(&self) -> bool {
        self.rho.is_some_and(|rho| self.gamma * rho < T::one())
    }

    fn radius(&self) -> T {
        if let Some(r) = self.bracket_radius {
            return r;
        }
        match self.lipschitz {
            Some(m) => {
                let contraction = T::one() - self.gamma * self.rho.unwrap_or(T::zero());
                (T::lit(2.0) * self.gamma * m / contraction).max(T::lit(16.0) * self.prox_tol)
            }
            None => T::one(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ProxPoint<T: Scalar> {
    pub point: Vec<T>,
    /// The objective was not certified unimodal (no ρ declared).
    pub non_unimodal_warning: bool,
    /// The bracket had to be widened once.
    pub expanded: bool,
    pub radius: T,
    pub evals: usize,
}

/// Approximate `prox_{γ,φ}(x) = argmin_z φ(z) + ‖x − z‖²/(2γ)` for m ≤ 2.
pub fn moreau_prox<T: Scalar, O: ValueOracle<T> + ?Sized>(
    phi: &O,
    x: &[T],
    cfg: &EnvelopeConfig<T>,
) -> Result<ProxPoint<T>> {
    cfg.validate()?;
    crate::error::check_dim("x", phi.dim(), x.len())?;
    if x.len() > 2 {
        return Err(Error::InvalidArgument("prox solves are limited to m ≤ 2".into()));
    }
    let mut radius = cfg.radius();
    for attempt in 0..2 {
        let (point, evals) = if x.len() == 1 { prox_1d(phi, x, cfg, radius)? } else { prox_2d(phi, x, cfg, radius)? };
        let slack = radius - T::lit(4.0) * cfg.prox_tol;
        let on_boundary = point.iter().zip(x).any(|(&z, &c)| (z - c).abs() >= slack);
        if !on_boundary {
            return Ok(ProxPoint {
                point,
                non_unimodal_warning: !cfg.certified(),
                expanded: attempt > 0,
                radius,
                evals,
            });
        }
        radius *= T::lit(4.0);
    }
    Err(Error::BracketTooSmall { radius: (radius / T::lit(4.0)).as_f64() })
}

/// Line search of `s ↦ φ(z with coordinate i = s) + (s − x_i)²/(2γ)`
/// (other quadratic terms are constant along the line).
fn line_prox<T: Scalar, O: ValueOracle<T> + ?Sized>(
    phi: &O,
    base: &[T],
    coord: usize,
    center: T,
    lo: T,
    hi: T,
    cfg: &EnvelopeConfig<T>,
) -> Result<(T, usize)> {
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let mut probe = base.to_vec();
    let mut value = |s: T| -> T {
        probe[coord] = s;
        match phi.value_within(&probe, cfg.prox_tol * cfg.prox_tol) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                T::nan()
            }
        }
    };
    let two_gamma = cfg.gamma + cfg.gamma;
    let quad_diff = |a: T, b: T| (a - b) * (a + b - center - center) / two_gamma;
    let tol = cfg.prox_tol / T::lit(4.0);
    let (lo, hi, mut evals) = if cfg.certified() {
        (lo, hi, 0)
    } else {
        // coarse scan first; the objective may have several local minima
        let cells = 64;
        let step = (hi - lo) / T::from_usize_lossy(cells);
        let grid: Vec<T> = (0..=cells).map(|i| lo + step * T::from_usize_lossy(i)).collect();
        let vals: Vec<T> = grid.iter().map(|&s| value(s)).collect();
        let mut best = 0;
        for i in 1..grid.len() {
            if vals[i] - vals[best] + quad_diff(grid[i], grid[best]) < T::zero() {
                best = i;
            }
        }
        (grid[best.saturating_sub(1)], grid[(best + 1).min(cells)], grid.len())
    };
    let g = golden_section(lo, hi, tol, 400, &mut value, quad_diff);
    evals += g.evals;
    let (point, polish_evals) = newton_polish(&mut value, g.point, center, cfg.gamma, lo, hi);
    evals += polish_evals;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok((point, evals))
}

/// Value comparisons resolve a smooth minimizer only to about √ε. Where φ is
/// smooth at the golden-section point, two finite-difference Newton steps on
/// `φ(s) + (s − c)²/(2γ)` recover full accuracy; the result is kept only if
/// the steps are small and contracting, so kink minimizers are left alone.
fn newton_polish<T: Scalar>(value: &mut impl FnMut(T) -> T, start: T, center: T, gamma: T, lo: T, hi: T) -> (T, usize) {
    let mut z = start;
    let mut steps = [T::zero(); 2];
    let mut evals = 0;
    for step in steps.iter_mut() {
        let h = T::lit(1e-5) * (T::one() + z.abs());
        let (fp, f0, fm) = (value(z + h), value(z), value(z - h));
        evals += 3;
        let slope = (fp - fm) / (h + h) + (z - center) / gamma;
        let curvature = (fp - f0 - f0 + fm) / (h * h) + T::one() / gamma;
        if !(curvature > T::zero()) || !slope.is_finite() {
            return (start, evals);
        }
        *step = slope / curvature;
        z -= *step;
    }
    let small = steps[0].abs() <= T::lit(1e-6) * (T::one() + start.abs());
    let floor = T::lit(64.0) * T::epsilon() * (T::one() + start.abs());
    let contracting = steps[1].abs() <= T::lit(0.5) * steps[0].abs() + floor;
    if small && contracting && z >= lo && z <= hi {
        (z, evals)
    } else {
        (start, evals)
    }
}

fn prox_1d<T: Scalar, O: ValueOracle<T> + ?Sized>(
    phi: &O,
    x: &[T],
    cfg: &EnvelopeConfig<T>,
    radius: T,
) -> Result<(Vec<T>, usize)> {
    let (s, evals) = line_prox(phi, x, 0, x[0], x[0] - radius, x[0] + radius, cfg)?;
    Ok((vec![s], evals))
}

/// Nested coordinate golden section: three sweeps, then further sweeps until
/// the iterate moves less than `prox_tol`.
fn prox_2d<T: Scalar, O: ValueOracle<T> + ?Sized>(
    phi: &O,
    x: &[T],
    cfg: &EnvelopeConfig<T>,
    radius: T,
) -> Result<(Vec<T>, usize)> {
    const MIN_SWEEPS: usize = 3;
    const MAX_SWEEPS: usize = 60;
    let mut z = x.to_vec();
    let mut evals = 0;
    for sweep in 0..MAX_SWEEPS {
        let before = z.clone();
        for i in 0..2 {
            let (s, e) = line_prox(phi, &z, i, x[i], x[i] - radius, x[i] + radius, cfg)?;
            z[i] = s;
            evals += e;
        }
        if sweep + 1 >= MIN_SWEEPS && linalg::dist(&before, &z) <= cfg.prox_tol {
            break;
        }
    }
    Ok((z, evals))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct EnvelopeGradient<T: Scalar> {
    /// ‖∇φ_γ(x)‖ = ‖x − ẑ‖/γ
    pub norm: T,
    pub prox_point: Vec<T>,
    pub non_unimodal_warning: bool,
    pub evals: usize,
}

pub fn envelope_gradient_norm<T: Scalar, O: ValueOracle<T> + ?Sized>(
    phi: &O,
    x: &[T],
    cfg: &EnvelopeConfig<T>,
) -> Result<EnvelopeGradient<T>> {
    let prox = moreau_prox(phi, x, cfg)?;
    Ok(EnvelopeGradient {
        norm: linalg::dist(x, &prox.point) / cfg.gamma,
        prox_point: prox.point,
        non_unimodal_warning: prox.non_unimodal_warning,
        evals: prox.evals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::FnOracle;
    use crate::problem::registry_get;
    use crate::problem::ProblemSpec;

    fn abs() -> FnOracle<fn(&[f64]) -> f64> {
        FnOracle::new(1, |x: &[f64]| x[0].abs())
    }

    fn abs_cfg(gamma: f64) -> EnvelopeConfig<f64> {
        EnvelopeConfig::new(gamma).with_rho(0.0).with_lipschitz(1.0)
    }

    #[test]
    fn soft_thresholding() {
        let z = moreau_prox(&abs(), &[2.0], &abs_cfg(0.5)).unwrap();
        assert!((z.point[0] - 1.5).abs() <= 1e-9);
        assert!(!z.non_unimodal_warning);
        let z = moreau_prox(&abs(), &[0.2], &abs_cfg(0.5)).unwrap();
        assert!(z.point[0].abs() <= 1e-9);
    }

    #[test]
    fn envelope_gradient_of_abs() {
        let g = envelope_gradient_norm(&abs(), &[2.0], &abs_cfg(0.5)).unwrap();
        assert!((g.norm - 1.0).abs() <= 1e-9);
        let g = envelope_gradient_norm(&abs(), &[0.05], &abs_cfg(0.01)).unwrap();
        assert!((g.norm - 1.0).abs() <= 1e-6);
        assert!((g.prox_point[0] - 0.04).abs() <= 1e-9);
    }

    #[test]
    fn prox_of_box_counterexample() {
        let p: ProblemSpec<f64> = registry_get("P3-box-counterexample").unwrap();
        let phi = p.exact_hyper().unwrap().clone();
        let oracle = FnOracle::new(1, move |x: &[f64]| phi(x));
        let z = moreau_prox(&oracle, &[0.5], &EnvelopeConfig::new(0.1).with_lipschitz(1.0)).unwrap();
        assert!((z.point[0] - 0.6).abs() <= 1e-9);
        assert!(z.non_unimodal_warning);
    }

    #[test]
    fn minimizer_is_a_fixed_point() {
        let p: ProblemSpec<f64> = registry_get("P1-line-coercive").unwrap();
        let phi = p.exact_hyper().unwrap().clone();
        let oracle = FnOracle::new(1, move |x: &[f64]| phi(x));
        let g = envelope_gradient_norm(&oracle, &[0.0], &EnvelopeConfig::new(0.1).with_rho(0.0)).unwrap();
        assert!(g.norm <= 1e-8, "{}", g.norm);
    }

    #[test]
    fn two_dimensional_prox_of_l1() {
        let l1 = FnOracle::new(2, |x: &[f64]| x[0].abs() + x[1].abs());
        let z = moreau_prox(&l1, &[1.0, -0.05], &EnvelopeConfig::new(0.1).with_rho(0.0)).unwrap();
        assert!((z.point[0] - 0.9).abs() < 1e-9);
        assert!(z.point[1].abs() < 1e-9);
    }

    #[test]
    fn rejects_large_gamma_for_declared_rho() {
        let err = moreau_prox(&abs(), &[0.0], &EnvelopeConfig::new(0.6).with_rho(1.0)).unwrap_err();
        assert!(matches!(err, Error::InvalidArgument(_)));
    }

    #[test]
    fn bracket_expands_once_then_fails() {
        // linear function: prox = x − γ·slope, far outside a tiny bracket
        let lin = FnOracle::new(1, |x: &[f64]| 10.0 * x[0]);
        let cfg = EnvelopeConfig::new(0.1).with_rho(0.0).with_bracket_radius(0.3);
        let z = moreau_prox(&lin, &[0.0], &cfg).unwrap();
        assert!(z.expanded);
        assert!((z.point[0] + 1.0).abs() < 1e-9);
        let cfg = cfg.with_bracket_radius(0.01);
        assert!(matches!(moreau_prox(&lin, &[0.0], &cfg), Err(Error::BracketTooSmall { .. })));
    }

    #[test]
    fn rejects_three_dimensions() {
        let f = FnOracle::new(3, |x: &[f64]| x[0]);
        assert!(moreau_prox(&f, &[0.0, 0.0, 0.0], &EnvelopeConfig::new(0.1)).is_err());
    }
}
