use std::collections::BTreeMap;

use rand::Rng;

use super::hull::min_norm_in_hull;
use super::{Certificate, CertificateKind};
use crate::error::{Error, Result};
use crate::linalg;
use crate::oracle::ValueOracle;
use crate::rng::uniform_in_ball;
use crate::scalar::Scalar;

const FRANK_WOLFE_STEPS: usize = 10_000;

pub fn default_fd_step<T: Scalar>(x: &[T]) -> T {
    T::lit(1e-6) * (T::one() + linalg::norm(x))
}

/// Sampled Goldstein gap: min-norm point of the hull of central-difference
/// gradients at `n` uniform points of `B(x, δ − h)`.
pub fn goldstein_gap<T: Scalar, O: ValueOracle<T> + ?Sized, R: Rng + ?Sized>(
    phi: &O,
    x: &[T],
    delta: T,
    n: usize,
    fd_step: T,
    rng: &mut R,
) -> Result<Certificate<T>> {
    crate::error::check_dim("x", phi.dim(), x.len())?;
    if !(fd_step > T::zero() && delta > fd_step) {
        return Err(Error::InvalidArgument("goldstein gap needs delta > fd_step > 0".into()));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("at least one sample is required".into()));
    }
    let m = x.len();
    let mut gradients = Vec::with_capacity(n);
    let mut probe = vec![T::zero(); m];
    for _ in 0..n {
        let z = uniform_in_ball(rng, x, delta - fd_step);
        let mut g = vec![T::zero(); m];
        for i in 0..m {
            probe.copy_from_slice(&z);
            probe[i] = z[i] + fd_step;
            let plus = phi.value(&probe)?;
            probe[i] = z[i] - fd_step;
            let minus = phi.value(&probe)?;
            g[i] = (plus - minus) / (fd_step + fd_step);
        }
        gradients.push(g);
    }
    let hull = min_norm_in_hull(&gradients, FRANK_WOLFE_STEPS);
    let mut details = BTreeMap::new();
    details.insert("samples".into(), n as f64);
    details.insert("fd_step".into(), fd_step.as_f64());
    details.insert("frank_wolfe_steps".into(), hull.iterations as f64);
    details.insert("duality_gap".into(), hull.duality_gap.as_f64());
    Ok(Certificate {
        kind: CertificateKind::Goldstein,
        epsilon: linalg::norm(&hull.point),
        delta,
        at_x: x.to_vec(),
        nu: None,
        details,
    })
}
