//! Pseudo-random streams.
//!
//! Every stochastic routine takes a caller-owned generator. The concrete
//! generator is xoshiro256** seeded through splitmix64, so a 64-bit seed fully
//! determines a run. Independent runs of one experiment draw from
//! `seed ^ (run_index · 0x9E3779B97F4A7C15)`.

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;

use crate::scalar::Scalar;

pub type StreamRng = Xoshiro256StarStar;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// Generator for a 64-bit seed (splitmix64 expansion into the 256-bit state).
pub fn seeded(seed: u64) -> StreamRng {
    StreamRng::seed_from_u64(seed)
}

/// Seed of the `run_index`-th independent run derived from a base seed.
pub fn run_seed(seed: u64, run_index: u64) -> u64 {
    seed ^ run_index.wrapping_mul(GOLDEN_GAMMA)
}

pub fn run_stream(seed: u64, run_index: u64) -> StreamRng {
    seeded(run_seed(seed, run_index))
}

/// Child generator split off a parent stream; used to hand deterministic
/// substreams to workers.
pub fn substream<R: Rng + ?Sized>(parent: &mut R) -> StreamRng {
    seeded(parent.gen::<u64>())
}

/// One pair of independent standard normals by the Box–Muller transform.
pub fn box_muller<R: Rng + ?Sized>(rng: &mut R) -> (f64, f64) {
    // u1 in (0, 1] so the log is finite
    let u1 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    let r = (-2.0 * u1.ln()).sqrt();
    let angle = std::f64::consts::TAU * u2;
    (r * angle.cos(), r * angle.sin())
}

/// `len` independent standard normals.
pub fn gaussian_vec<T: Scalar, R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(len + 1);
    while out.len() < len {
        let (a, b) = box_muller(rng);
        out.push(T::lit(a));
        out.push(T::lit(b));
    }
    out.truncate(len);
    out
}

/// Uniform draw from `[lo, hi]`.
pub fn uniform<T: Scalar, R: Rng + ?Sized>(rng: &mut R, lo: T, hi: T) -> T {
    let u: f64 = rng.gen();
    lo + (hi - lo) * T::lit(u)
}

/// Uniform draw from the closed ball `B(center, radius)`.
pub fn uniform_in_ball<T: Scalar, R: Rng + ?Sized>(rng: &mut R, center: &[T], radius: T) -> Vec<T> {
    let m = center.len();
    let dir = crate::zeroth_order::sample_unit_sphere::<T, R>(rng, m);
    let u: f64 = rng.gen();
    let r = radius * T::lit(u.powf(1.0 / m as f64));
    center.iter().zip(&dir).map(|(&c, &d)| c + r * d).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_stream() {
        let mut a = seeded(42);
        let mut b = seeded(42);
        for _ in 0..100 {
            assert_eq!(a.gen::<u64>(), b.gen::<u64>());
        }
    }

    #[test]
    fn run_zero_is_base_seed() {
        assert_eq!(run_seed(7, 0), 7);
        assert_ne!(run_seed(7, 1), run_seed(7, 2));
    }

    #[test]
    fn box_muller_moments() {
        let mut rng = seeded(1);
        let n = 200_000;
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..n / 2 {
            let (a, b) = box_muller(&mut rng);
            s += a + b;
            s2 += a * a + b * b;
        }
        let mean = s / n as f64;
        let var = s2 / n as f64 - mean * mean;
        assert!(mean.abs() < 0.01, "mean {mean}");
        assert!((var - 1.0).abs() < 0.02, "var {var}");
    }

    #[test]
    fn ball_samples_stay_inside() {
        let mut rng = seeded(3);
        for _ in 0..1000 {
            let p: Vec<f64> = uniform_in_ball(&mut rng, &[1.0, -1.0], 0.5);
            assert!(crate::linalg::dist(&p, &[1.0, -1.0]) <= 0.5 + 1e-15);
        }
    }
}
