//! Dense vector helpers on plain slices. Dimensions here are tiny (m, n ≤ a few),
//! so nothing fancier than `Vec<T>` is warranted.

use crate::scalar::Scalar;

#[inline]
pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

#[inline]
pub fn norm<T: Scalar>(a: &[T]) -> T {
    // hypot-style scaling keeps tiny/huge components from under/overflowing
    let scale = a.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    if scale == T::zero() || !scale.is_finite() {
        return scale;
    }
    let s: T = a.iter().map(|&v| (v / scale) * (v / scale)).sum();
    scale * s.sqrt()
}

#[inline]
pub fn norm_sq<T: Scalar>(a: &[T]) -> T {
    dot(a, a)
}

pub fn sub<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| x - y).collect()
}

pub fn add<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| x + y).collect()
}

pub fn scale<T: Scalar>(s: T, a: &[T]) -> Vec<T> {
    a.iter().map(|&x| s * x).collect()
}

/// `a + s·b`
pub fn axpy<T: Scalar>(a: &[T], s: T, b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| x + s * y).collect()
}

/// `θ·a + (1−θ)·b`
pub fn lerp<T: Scalar>(theta: T, a: &[T], b: &[T]) -> Vec<T> {
    let one_minus = T::one() - theta;
    a.iter().zip(b).map(|(&x, &y)| theta * x + one_minus * y).collect()
}

pub fn dist<T: Scalar>(a: &[T], b: &[T]) -> T {
    norm(&sub(a, b))
}

pub fn normalized<T: Scalar>(a: &[T]) -> Option<Vec<T>> {
    let n = norm(a);
    if n > T::zero() && n.is_finite() {
        Some(a.iter().map(|&x| x / n).collect())
    } else {
        None
    }
}

/// Lexicographic `<` on equal-length vectors.
pub fn lex_less<T: Scalar>(a: &[T], b: &[T]) -> bool {
    for (&x, &y) in a.iter().zip(b) {
        if x < y {
            return true;
        }
        if x > y {
            return false;
        }
    }
    false
}
