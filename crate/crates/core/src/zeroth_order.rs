//! Inexact zeroth-order method: two-point sphere-sampled difference quotients
//! of the inexactly evaluated hyper-objective, plugged into plain descent.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::inner::{inner_value_with, InnerOptions};
use crate::linalg;
use crate::problem::{Mode, ProblemSpec};
use crate::rng::{self, StreamRng};
use crate::scalar::Scalar;

/// Uniform direction on the unit sphere of ℝ^m (normalized Gaussian vector).
pub fn sample_unit_sphere<T: Scalar, R: Rng + ?Sized>(rng: &mut R, m: usize) -> Vec<T> {
    assert!(m >= 1, "sphere dimension must be at least 1");
    loop {
        let g: Vec<T> = rng::gaussian_vec(rng, m);
        if let Some(u) = linalg::normalized(&g) {
            return u;
        }
    }
}

/// `G̃ = (m / 2ε)(φ̃(x + εu) − φ̃(x − εu)) u`
pub fn two_point_estimate<T: Scalar>(p: &ProblemSpec<T>, x: &[T], u: &[T], eps: T, w: T) -> Result<Vec<T>> {
    two_point_estimate_with(p, x, u, eps, w, &InnerOptions::default())
}

pub fn two_point_estimate_with<T: Scalar>(
    p: &ProblemSpec<T>,
    x: &[T],
    u: &[T],
    eps: T,
    w: T,
    opts: &InnerOptions<T>,
) -> Result<Vec<T>> {
    check_dim("x", p.m, x.len())?;
    check_dim("u", p.m, u.len())?;
    if !(eps > T::zero()) {
        return Err(Error::InvalidArgument("smoothing radius must be positive".into()));
    }
    if (linalg::norm(u) - T::one()).abs() > T::lit(1e3) * T::epsilon() {
        return Err(Error::InvalidArgument("direction must be a unit vector".into()));
    }
    let plus = inner_value_with(p, &linalg::axpy(x, eps, u), w, opts)?.value;
    let minus = inner_value_with(p, &linalg::axpy(x, -eps, u), w, opts)?.value;
    let coef = T::from_usize_lossy(p.m) / (eps + eps) * (plus - minus);
    Ok(linalg::scale(coef, u))
}

/// Constants of the iteration schedule. `c_eta = None` means `1 / max(1, M_φ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ScheduleConstants<T: Scalar> {
    pub c_eta: Option<T>,
    pub c_eps: T,
    pub c_w: T,
}

impl<T: Scalar> Default for ScheduleConstants<T> {
    fn default() -> Self {
        Self { c_eta: None, c_eps: T::one(), c_w: T::one() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Schedule<T: Scalar> {
    pub step_size: T,
    pub radius: T,
    pub inner_tol: T,
    /// Constants actually used, with `c_eta` resolved.
    pub c_eta: T,
    pub c_eps: T,
    pub c_w: T,
}

/// η = c_η/(√m √T), ε = c_ε/√T, w = c_w/(m^{3/4} T^{3/4}).
pub fn schedule_for<T: Scalar>(
    m: usize,
    hyper_lipschitz: T,
    iterations: usize,
    consts: &ScheduleConstants<T>,
) -> Schedule<T> {
    let m = T::from_usize_lossy(m);
    let t = T::from_usize_lossy(iterations.max(1));
    let three_quarters = T::lit(0.75);
    let c_eta = consts.c_eta.unwrap_or_else(|| T::one() / T::one().max(hyper_lipschitz));
    Schedule {
        step_size: c_eta / (m.sqrt() * t.sqrt()),
        radius: consts.c_eps / t.sqrt(),
        inner_tol: consts.c_w / (m.powf(three_quarters) * t.powf(three_quarters)),
        c_eta,
        c_eps: consts.c_eps,
        c_w: consts.c_w,
    }
}

pub fn default_schedule<T: Scalar>(p: &ProblemSpec<T>, iterations: usize) -> Schedule<T> {
    schedule_for(p.m, p.hyper_lipschitz(), iterations, &ScheduleConstants::default())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct IzomConfig<T: Scalar> {
    pub iterations: usize,
    pub step_size: T,
    pub radius: T,
    pub inner_tol: T,
    pub seed: u64,
    pub x0: Vec<T>,
    pub mode: Mode,
    /// Directions averaged per step. The method itself uses one.
    pub directions_per_step: usize,
    /// Evaluate φ̃(x_t) at every iterate for diagnostics.
    pub log_values: bool,
}

impl<T: Scalar> IzomConfig<T> {
    pub fn from_schedule(schedule: &Schedule<T>, iterations: usize, seed: u64, x0: Vec<T>, mode: Mode) -> Self {
        Self {
            iterations,
            step_size: schedule.step_size,
            radius: schedule.radius,
            inner_tol: schedule.inner_tol,
            seed,
            x0,
            mode,
            directions_per_step: 1,
            log_values: false,
        }
    }

    pub fn validate(&self, m: usize) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::InvalidArgument("iteration count must be at least 1".into()));
        }
        for (what, v) in [("step size", self.step_size), ("radius", self.radius), ("inner accuracy", self.inner_tol)] {
            if !(v > T::zero() && v.is_finite()) {
                return Err(Error::InvalidArgument(format!("{what} must be positive, got {v}")));
            }
        }
        if self.directions_per_step == 0 {
            return Err(Error::InvalidArgument("need at least one direction per step".into()));
        }
        check_dim("x0", m, self.x0.len())
    }
}

/// Iterates and measurements of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct RunTrace<T: Scalar> {
    pub problem: String,
    /// x_0, …, x_T
    pub iterates: Vec<Vec<T>>,
    /// φ̃(x_t) for every iterate when logging was on, else empty.
    pub values: Vec<T>,
    /// G̃(x_0), …, G̃(x_{T−1})
    pub estimates: Vec<Vec<T>>,
    /// Uniform draw from {0, …, T−1}.
    pub selected_index: usize,
    pub selected_x: Vec<T>,
    pub inner_calls: usize,
    pub config: IzomConfig<T>,
}

/// Runs the method from `cfg.x0` for `cfg.iterations` steps:
/// `x_{t+1} = x_t − η G̃(x_t)`, with no projection or step control.
pub fn izom_run<T: Scalar>(p: &ProblemSpec<T>, cfg: &IzomConfig<T>) -> Result<RunTrace<T>> {
    izom_run_with(p, cfg, &InnerOptions::default())
}

pub fn izom_run_with<T: Scalar>(
    p: &ProblemSpec<T>,
    cfg: &IzomConfig<T>,
    opts: &InnerOptions<T>,
) -> Result<RunTrace<T>> {
    cfg.validate(p.m)?;
    let problem = p.clone().with_mode(cfg.mode);
    let mut rng: StreamRng = rng::seeded(cfg.seed);
    let at = |iteration: usize| move |e: Error| Error::AtIteration { iteration, source: Box::new(e) };

    let t_max = cfg.iterations;
    let mut iterates = Vec::with_capacity(t_max + 1);
    let mut estimates = Vec::with_capacity(t_max);
    let mut values = Vec::new();
    let mut inner_calls = 0;
    let mut x = cfg.x0.clone();
    let per_step = T::from_usize_lossy(cfg.directions_per_step);

    for t in 0..t_max {
        if cfg.log_values {
            values.push(inner_value_with(&problem, &x, cfg.inner_tol, opts).map_err(at(t))?.value);
            inner_calls += 1;
        }
        let mut g = vec![T::zero(); p.m];
        for _ in 0..cfg.directions_per_step {
            let u = sample_unit_sphere(&mut rng, p.m);
            let est = two_point_estimate_with(&problem, &x, &u, cfg.radius, cfg.inner_tol, opts).map_err(at(t))?;
            inner_calls += 2;
            for (gi, ei) in g.iter_mut().zip(&est) {
                *gi += *ei;
            }
        }
        if cfg.directions_per_step > 1 {
            g.iter_mut().for_each(|v| *v = *v / per_step);
        }
        let next = linalg::axpy(&x, -cfg.step_size, &g);
        iterates.push(std::mem::replace(&mut x, next));
        estimates.push(g);
    }
    if cfg.log_values {
        values.push(inner_value_with(&problem, &x, cfg.inner_tol, opts).map_err(at(t_max))?.value);
        inner_calls += 1;
    }
    iterates.push(x);

    let selected_index = rng.gen_range(0..t_max);
    Ok(RunTrace {
        problem: p.name.clone(),
        selected_x: iterates[selected_index].clone(),
        iterates,
        values,
        estimates,
        selected_index,
        inner_calls,
        config: cfg.clone(),
    })
}
