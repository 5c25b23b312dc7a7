//! Bilevel problem instances: objectives, solution-set descriptors, certified
//! constants and the fixture registry.

mod descriptor;
mod registry;

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg;
use crate::scalar::Scalar;

pub use descriptor::{BaseSet, Piece, SetMapDescriptor};
pub use registry::{registry_get, PROBLEM_NAMES};

/// `x ↦ scalar`
pub type ScalarMap<T> = Arc<dyn Fn(&[T]) -> T + Send + Sync>;
/// `x ↦ vector`
pub type VectorMap<T> = Arc<dyn Fn(&[T]) -> Vec<T> + Send + Sync>;
/// `(x, y) ↦ scalar`
pub type Objective<T> = Arc<dyn Fn(&[T], &[T]) -> T + Send + Sync>;
/// `(x, y) ↦ ∇_y`
pub type Gradient<T> = Arc<dyn Fn(&[T], &[T]) -> Vec<T> + Send + Sync>;

/// Which hyper-objective is targeted: the min (optimistic) or the max
/// (pessimistic) of the upper objective over the lower-level solution set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Optimistic,
    Pessimistic,
}

impl Mode {
    /// `+1` when the inner problem maximizes, `−1` when it minimizes.
    pub fn sign<T: Scalar>(self) -> T {
        match self {
            Mode::Optimistic => -T::one(),
            Mode::Pessimistic => T::one(),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Optimistic => "optimistic",
            Mode::Pessimistic => "pessimistic",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "optimistic" | "o" => Ok(Mode::Optimistic),
            "pessimistic" | "p" => Ok(Mode::Pessimistic),
            other => Err(Error::InvalidArgument(format!("unknown mode `{other}`"))),
        }
    }
}

/// Axis-aligned box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Bounds<T: Scalar> {
    pub lower: Vec<T>,
    pub upper: Vec<T>,
}

impl<T: Scalar> Bounds<T> {
    pub fn new(lower: Vec<T>, upper: Vec<T>) -> Result<Self> {
        check_dim("box upper corner", lower.len(), upper.len())?;
        if lower.is_empty() || lower.iter().zip(&upper).any(|(l, u)| !(l <= u)) {
            return Err(Error::InvalidArgument("empty box".into()));
        }
        Ok(Self { lower, upper })
    }

    /// `[lo, hi]^dim`
    pub fn cube(dim: usize, lo: T, hi: T) -> Self {
        Self { lower: vec![lo; dim], upper: vec![hi; dim] }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn contains(&self, x: &[T]) -> bool {
        x.len() == self.dim() && x.iter().zip(self.lower.iter().zip(&self.upper)).all(|(v, (l, u))| l <= v && v <= u)
    }

    pub fn clamp(&self, x: &[T]) -> Vec<T> {
        x.iter().zip(self.lower.iter().zip(&self.upper)).map(|(&v, (&l, &u))| v.max(l).min(u)).collect()
    }

    pub fn diameter(&self) -> T {
        linalg::dist(&self.upper, &self.lower)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<T> {
        self.lower.iter().zip(&self.upper).map(|(&l, &u)| crate::rng::uniform(rng, l, u)).collect()
    }
}

/// Moduli certifying the standing assumptions on `working_box`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ConstantsBundle<T: Scalar> {
    /// Lipschitz modulus of the upper objective F.
    pub upper_lipschitz: T,
    /// Gradient-Lipschitz modulus of F.
    pub upper_smoothness: T,
    /// Gradient-Lipschitz modulus of the lower objective f.
    pub lower_smoothness: T,
    /// Lipschitz modulus of ∇∇_y f. `+∞` when f is not twice continuously
    /// differentiable.
    pub lower_hessian_lipschitz: T,
    /// Error-bound constant τ: dist(y, S(x)) ≤ τ‖∇_y f(x, y)‖.
    pub error_bound: T,
    pub working_box: Bounds<T>,
}

impl<T: Scalar> ConstantsBundle<T> {
    pub fn validate(&self) -> Result<()> {
        let moduli = [self.upper_lipschitz, self.upper_smoothness, self.lower_smoothness, self.lower_hessian_lipschitz];
        if moduli.iter().any(|v| !(*v >= T::zero())) {
            return Err(Error::InvalidArgument("moduli must be nonnegative".into()));
        }
        if !(self.error_bound > T::zero()) {
            return Err(Error::InvalidArgument("error-bound constant must be positive".into()));
        }
        Bounds::new(self.working_box.lower.clone(), self.working_box.upper.clone()).map(|_| ())
    }
}

/// A bilevel instance `min_x {min | max}_{y ∈ S(x)} F(x, y)`, `S(x) = argmin_y f(x, y)`.
#[derive(Clone)]
pub struct ProblemSpec<T: Scalar> {
    pub name: String,
    /// Dimension of the upper variable x.
    pub m: usize,
    /// Dimension of the lower variable y.
    pub n: usize,
    pub upper: Option<Objective<T>>,
    pub lower: Option<Objective<T>>,
    pub lower_grad: Option<Gradient<T>>,
    pub mode: Mode,
    pub constants: ConstantsBundle<T>,
    pub descriptor: Option<SetMapDescriptor<T>>,
    pub exact_optimistic: Option<ScalarMap<T>>,
    pub exact_pessimistic: Option<ScalarMap<T>>,
    /// Box constraint on the lower variable. Only the lower-constrained
    /// counterexample uses it.
    pub lower_box: Option<Bounds<T>>,
    /// Set when the instance deliberately leaves the unconstrained
    /// lower-level setting; such instances carry no modulus guarantees.
    pub assumption_violating: bool,
    /// Set-smoothness modulus known for this solution map, if any.
    pub declared_set_smoothness: Option<T>,
}

impl<T: Scalar> fmt::Debug for ProblemSpec<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("name", &self.name)
            .field("m", &self.m)
            .field("n", &self.n)
            .field("mode", &self.mode)
            .field("constants", &self.constants)
            .field("descriptor", &self.descriptor)
            .field("has_exact", &self.exact_hyper().is_some())
            .field("assumption_violating", &self.assumption_violating)
            .finish()
    }
}

impl<T: Scalar> ProblemSpec<T> {
    /// Bare instance with no objectives; fill fields with the `with_*` methods.
    pub fn new(name: impl Into<String>, m: usize, n: usize, constants: ConstantsBundle<T>) -> Self {
        Self {
            name: name.into(),
            m,
            n,
            upper: None,
            lower: None,
            lower_grad: None,
            mode: Mode::Pessimistic,
            constants,
            descriptor: None,
            exact_optimistic: None,
            exact_pessimistic: None,
            lower_box: None,
            assumption_violating: false,
            declared_set_smoothness: None,
        }
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_upper(mut self, f: impl Fn(&[T], &[T]) -> T + Send + Sync + 'static) -> Self {
        self.upper = Some(Arc::new(f));
        self
    }

    pub fn with_lower(mut self, f: impl Fn(&[T], &[T]) -> T + Send + Sync + 'static) -> Self {
        self.lower = Some(Arc::new(f));
        self
    }

    pub fn with_lower_grad(mut self, g: impl Fn(&[T], &[T]) -> Vec<T> + Send + Sync + 'static) -> Self {
        self.lower_grad = Some(Arc::new(g));
        self
    }

    pub fn with_descriptor(mut self, d: SetMapDescriptor<T>) -> Self {
        self.descriptor = Some(d);
        self
    }

    pub fn with_exact(
        mut self,
        optimistic: impl Fn(&[T]) -> T + Send + Sync + 'static,
        pessimistic: impl Fn(&[T]) -> T + Send + Sync + 'static,
    ) -> Self {
        self.exact_optimistic = Some(Arc::new(optimistic));
        self.exact_pessimistic = Some(Arc::new(pessimistic));
        self
    }

    pub fn without_exact(mut self) -> Self {
        self.exact_optimistic = None;
        self.exact_pessimistic = None;
        self
    }

    /// Closed-form hyper-objective matching the current mode.
    pub fn exact_hyper(&self) -> Option<&ScalarMap<T>> {
        match self.mode {
            Mode::Optimistic => self.exact_optimistic.as_ref(),
            Mode::Pessimistic => self.exact_pessimistic.as_ref(),
        }
    }

    pub fn descriptor(&self) -> Result<&SetMapDescriptor<T>> {
        self.descriptor.as_ref().ok_or_else(|| Error::NoDescriptor(self.name.clone()))
    }

    fn check_xy(&self, x: &[T], y: &[T]) -> Result<()> {
        check_dim("x", self.m, x.len())?;
        check_dim("y", self.n, y.len())
    }

    /// F(x, y)
    pub fn eval_upper(&self, x: &[T], y: &[T]) -> Result<T> {
        self.check_xy(x, y)?;
        let f = self.upper.as_ref().ok_or_else(|| Error::MissingObjective(self.name.clone(), "upper"))?;
        Ok(f(x, y))
    }

    /// f(x, y)
    pub fn eval_lower(&self, x: &[T], y: &[T]) -> Result<T> {
        self.check_xy(x, y)?;
        let f = self.lower.as_ref().ok_or_else(|| Error::MissingObjective(self.name.clone(), "lower"))?;
        Ok(f(x, y))
    }

    /// ∇_y f(x, y): analytic when available, central differences otherwise.
    pub fn lower_grad_y(&self, x: &[T], y: &[T]) -> Result<Vec<T>> {
        self.check_xy(x, y)?;
        if let Some(g) = &self.lower_grad {
            return Ok(g(x, y));
        }
        let f = self.lower.as_ref().ok_or_else(|| Error::MissingObjective(self.name.clone(), "lower"))?;
        Ok(central_gradient(|v| f(x, v), y))
    }

    /// Π_{S(x)}(y)
    pub fn project_onto_solution_set(&self, x: &[T], y: &[T]) -> Result<Vec<T>> {
        self.check_xy(x, y)?;
        Ok(self.descriptor()?.project(x, y))
    }

    /// dist(y, S(x)) from the descriptor.
    pub fn solution_set_distance(&self, x: &[T], y: &[T]) -> Result<T> {
        self.check_xy(x, y)?;
        Ok(self.descriptor()?.distance(x, y))
    }

    /// A point of S(x) within `radius` of the descriptor's anchor.
    pub fn solution_set_sample<R: Rng + ?Sized>(&self, x: &[T], rng: &mut R, radius: T) -> Result<Vec<T>> {
        check_dim("x", self.m, x.len())?;
        if !(radius > T::zero()) {
            return Err(Error::InvalidArgument("sample radius must be positive".into()));
        }
        Ok(self.descriptor()?.sample(x, rng, radius))
    }

    pub fn theory_moduli(&self) -> crate::structure::TheoryModuli<T> {
        crate::structure::theory_moduli(&self.constants)
    }

    /// M_φ = M_F(1 + L_f τ).
    pub fn hyper_lipschitz(&self) -> T {
        self.theory_moduli().hyper_lipschitz
    }
}

/// Central-difference gradient with step `1e-6·max(1, ‖point‖)`.
pub fn central_gradient<T: Scalar>(f: impl Fn(&[T]) -> T, point: &[T]) -> Vec<T> {
    let h = T::lit(1e-6) * T::one().max(linalg::norm(point));
    let two_h = h + h;
    let mut probe = point.to_vec();
    (0..point.len())
        .map(|i| {
            let base = probe[i];
            probe[i] = base + h;
            let plus = f(&probe);
            probe[i] = base - h;
            let minus = f(&probe);
            probe[i] = base;
            (plus - minus) / two_h
        })
        .collect()
}
