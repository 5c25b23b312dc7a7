//! Minimum-norm point of the convex hull of finitely many vectors.

use crate::linalg;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct MinNormPoint<T> {
    pub point: Vec<T>,
    pub weights: Vec<T>,
    /// Frank–Wolfe duality gap `⟨p, p − v⟩` at exit; an upper bound on
    /// `‖p‖² − min‖·‖²`.
    pub duality_gap: T,
    pub iterations: usize,
}

/// Frank–Wolfe with exact line search on `min ½‖Σ λ_i g_i‖²` over the simplex,
/// started at the shortest generator.
///
/// Panics on an empty generator list.
pub fn min_norm_in_hull<T: Scalar>(generators: &[Vec<T>], max_iter: usize) -> MinNormPoint<T> {
    assert!(!generators.is_empty(), "hull of an empty set");
    let k = generators.len();
    let norms: Vec<T> = generators.iter().map(|g| linalg::norm_sq(g)).collect();
    let start = (0..k).min_by(|&a, &b| norms[a].as_f64().total_cmp(&norms[b].as_f64())).unwrap_or(0);
    let mut weights = vec![T::zero(); k];
    weights[start] = T::one();
    let mut p = generators[start].clone();
    let mut gap = T::zero();
    let mut iterations = 0;
    let stop = T::epsilon() * T::lit(16.0);
    while iterations < max_iter {
        let pp = linalg::norm_sq(&p);
        if pp <= T::min_positive_value() {
            gap = T::zero();
            break;
        }
        let scores: Vec<T> = generators.iter().map(|g| linalg::dot(g, &p)).collect();
        let s = (0..k).min_by(|&a, &b| scores[a].as_f64().total_cmp(&scores[b].as_f64())).unwrap_or(0);
        gap = pp - scores[s];
        if gap <= stop * pp.max(norms[s]) {
            break;
        }
        let dir = linalg::sub(&generators[s], &p);
        let dd = linalg::norm_sq(&dir);
        if dd <= T::zero() {
            break;
        }
        let step = (gap / dd).min(T::one());
        for (pi, di) in p.iter_mut().zip(&dir) {
            *pi += step * *di;
        }
        for w in weights.iter_mut() {
            *w *= T::one() - step;
        }
        weights[s] += step;
        iterations += 1;
    }
    MinNormPoint { point: p, weights, duality_gap: gap.max(T::zero()), iterations }
}
