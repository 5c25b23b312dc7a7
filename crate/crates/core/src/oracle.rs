//! Value oracles: anything that evaluates a function ℝ^m → ℝ, possibly
//! inexactly.

use crate::error::{check_dim, Result};
use crate::inner::{inner_value_with, InnerOptions};
use crate::problem::ProblemSpec;
use crate::scalar::Scalar;

pub trait ValueOracle<T: Scalar> {
    fn dim(&self) -> usize;

    fn value(&self, x: &[T]) -> Result<T>;

    /// Value to additive accuracy `w`. Exact oracles ignore `w`.
    fn value_within(&self, x: &[T], w: T) -> Result<T> {
        let _ = w;
        self.value(x)
    }
}

/// Wraps an exact closure.
#[derive(Debug, Clone, Copy)]
pub struct FnOracle<F> {
    dim: usize,
    f: F,
}

impl<F> FnOracle<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<T: Scalar, F: Fn(&[T]) -> T> ValueOracle<T> for FnOracle<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[T]) -> Result<T> {
        check_dim("x", self.dim, x.len())?;
        Ok((self.f)(x))
    }
}

/// The hyper-objective of a problem (in the problem's mode), evaluated by the
/// inner solver at a default accuracy.
#[derive(Debug, Clone)]
pub struct HyperObjective<'a, T: Scalar> {
    pub problem: &'a ProblemSpec<T>,
    pub tol: T,
    pub options: InnerOptions<T>,
}

impl<'a, T: Scalar> HyperObjective<'a, T> {
    pub fn new(problem: &'a ProblemSpec<T>, tol: T) -> Self {
        Self { problem, tol, options: InnerOptions::default() }
    }

    /// Closed form when available, otherwise the descriptor solve.
    pub fn exact_or_tol(problem: &'a ProblemSpec<T>, tol: T) -> Self {
        let tol = if problem.exact_hyper().is_some() { T::zero() } else { tol };
        Self::new(problem, tol)
    }
}

impl<T: Scalar> ValueOracle<T> for HyperObjective<'_, T> {
    fn dim(&self) -> usize {
        self.problem.m
    }

    fn value(&self, x: &[T]) -> Result<T> {
        self.value_within(x, self.tol)
    }

    fn value_within(&self, x: &[T], w: T) -> Result<T> {
        let w = if self.problem.exact_hyper().is_some() && self.options.use_exact {
            T::zero()
        } else {
            w.min(self.tol).max(T::min_positive_value())
        };
        Ok(inner_value_with(self.problem, x, w, &self.options)?.value)
    }
}
