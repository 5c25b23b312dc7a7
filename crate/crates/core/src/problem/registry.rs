//! Named fixtures with hand-derived solution maps, hyper-objectives and
//! certified constants.

use super::{BaseSet, Bounds, ConstantsBundle, ProblemSpec, SetMapDescriptor};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const PROBLEM_NAMES: [&str; 5] =
    ["P1-line", "P1-line-coercive", "P2-sin-interval", "P3-box-counterexample", "P4-graphline"];

pub fn registry_get<T: Scalar>(name: &str) -> Result<ProblemSpec<T>> {
    match name {
        "P1-line" => Ok(line(false)),
        "P1-line-coercive" => Ok(line(true)),
        "P2-sin-interval" => Ok(sin_interval()),
        "P3-box-counterexample" => Ok(box_counterexample()),
        "P4-graphline" => Ok(graph_line()),
        other => Err(Error::UnknownProblem(other.to_string())),
    }
}

fn constants<T: Scalar>(
    upper_lipschitz: T,
    upper_smoothness: T,
    lower_smoothness: T,
    lower_hessian_lipschitz: T,
    error_bound: T,
    box_half_width: f64,
) -> ConstantsBundle<T> {
    ConstantsBundle {
        upper_lipschitz,
        upper_smoothness,
        lower_smoothness,
        lower_hessian_lipschitz,
        error_bound,
        working_box: Bounds::cube(1, T::lit(-box_half_width), T::lit(box_half_width)),
    }
}

/// f = ½(y₁+y₂−x)², S(x) = {y₁+y₂ = x}; F = sin(y₁−y₂) + x, or
/// sin(y₁−y₂) + √(1+x²) for the coercive variant.
///
/// ∇f = r(−1, 1, 1) with r = y₁+y₂−x, Hessian eigenvalue 3; dist(y, S) = |r|/√2
/// and ‖∇_y f‖ = √2|r| give τ = ½. ∇F has norm ≤ √3 and the sine block has
/// Hessian eigenvalue 2.
fn line<T: Scalar>(coercive: bool) -> ProblemSpec<T> {
    let half = T::lit(0.5);
    let r = T::FRAC_1_SQRT_2();
    let descriptor = SetMapDescriptor::affine_hyperplane(vec![r, r], move |x: &[T]| x[0] * r).expect("unit normal");
    let c = constants(T::lit(3.0).sqrt(), T::lit(2.0), T::lit(3.0), T::zero(), half, 5.0);
    let name = if coercive { "P1-line-coercive" } else { "P1-line" };
    let p = ProblemSpec::new(name, 1, 2, c)
        .with_lower(move |x, y| {
            let res = y[0] + y[1] - x[0];
            half * res * res
        })
        .with_lower_grad(|x, y| {
            let res = y[0] + y[1] - x[0];
            vec![res, res]
        })
        .with_descriptor(descriptor);
    if coercive {
        p.with_upper(|x, y| (y[0] - y[1]).sin() + (T::one() + x[0] * x[0]).sqrt())
            .with_exact(|x| (T::one() + x[0] * x[0]).sqrt() - T::one(), |x| (T::one() + x[0] * x[0]).sqrt() + T::one())
    } else {
        p.with_upper(|x, y| (y[0] - y[1]).sin() + x[0]).with_exact(|x| x[0] - T::one(), |x| x[0] + T::one())
    }
}

/// g(z) = max(0, |z|−1)²
fn pad_square<T: Scalar>(z: T) -> T {
    let e = (z.abs() - T::one()).max(T::zero());
    e * e
}

fn pad_square_derivative<T: Scalar>(z: T) -> T {
    let e = (z.abs() - T::one()).max(T::zero());
    T::lit(2.0) * e * z.signum()
}

/// f = g(sin x + y), F = x·y, S(x) = [−1, 1] − sin x.
///
/// Constants hold on x ∈ [−2, 2] near the solution band: ∇F = (y, x) has norm
/// ≤ 2√2 there, the Hessian of F has eigenvalues ±1, and g'' ∈ {0, 2} gives
/// L_f = 4. g is only C¹, so ∇∇_y f has no finite Lipschitz modulus.
fn sin_interval<T: Scalar>() -> ProblemSpec<T> {
    let descriptor =
        SetMapDescriptor::translated(BaseSet::Interval { lo: -T::one(), hi: T::one() }, |x: &[T]| vec![x[0].sin()])
            .expect("valid base");
    let c = constants(T::lit(8.0).sqrt(), T::one(), T::lit(4.0), T::infinity(), T::lit(0.5), 2.0);
    let mut p = ProblemSpec::new("P2-sin-interval", 1, 1, c)
        .with_upper(|x, y| x[0] * y[0])
        .with_lower(|x, y| pad_square(x[0].sin() + y[0]))
        .with_lower_grad(|x, y| vec![pad_square_derivative(x[0].sin() + y[0])])
        .with_descriptor(descriptor)
        .with_exact(|x| -x[0].abs() - x[0] * x[0].sin(), |x| x[0].abs() - x[0] * x[0].sin());
    p.declared_set_smoothness = Some(T::one());
    p
}

/// F = −1ᵀy, f = ‖y − (x, 2)‖² over Y = [0, 1]²; S(x) = {(clamp(x, 0, 1), 1)}.
fn box_counterexample<T: Scalar>() -> ProblemSpec<T> {
    let two = T::lit(2.0);
    let clamp01 = |v: T| v.max(T::zero()).min(T::one());
    let c = constants(two.sqrt(), T::zero(), T::lit(4.0), T::zero(), T::lit(0.5), 0.0);
    let c = ConstantsBundle { working_box: Bounds::new(vec![-T::one()], vec![two]).expect("nonempty"), ..c };
    let hyper = move |x: &[T]| -clamp01(x[0]) - T::one();
    let mut p = ProblemSpec::new("P3-box-counterexample", 1, 2, c)
        .with_upper(|_, y| -(y[0] + y[1]))
        .with_lower(move |x, y| {
            let (a, b) = (y[0] - x[0], y[1] - two);
            a * a + b * b
        })
        .with_lower_grad(move |x, y| vec![two * (y[0] - x[0]), two * (y[1] - two)])
        .with_descriptor(SetMapDescriptor::singleton(move |x: &[T]| vec![clamp01(x[0]), T::one()]))
        .with_exact(hyper, hyper);
    p.lower_box = Some(Bounds::cube(2, T::zero(), T::one()));
    p.assumption_violating = true;
    p
}

/// Y(x) = {(z, x) : z ∈ ℝ}; no objectives.
fn graph_line<T: Scalar>() -> ProblemSpec<T> {
    let c = constants(T::zero(), T::zero(), T::one(), T::zero(), T::one(), 2.0);
    let mut p = ProblemSpec::new("P4-graphline", 1, 2, c).with_descriptor(SetMapDescriptor::GraphLine);
    p.declared_set_smoothness = Some(T::one());
    p
}
