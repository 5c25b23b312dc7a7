use std::fmt;
use std::sync::Arc;

use rand::Rng;

use super::{ScalarMap, VectorMap};
use crate::error::{Error, Result};
use crate::linalg;
use crate::rng;
use crate::scalar::Scalar;

/// Fixed set that a `Translated` descriptor shifts around.
#[derive(Debug, Clone, PartialEq)]
pub enum BaseSet<T: Scalar> {
    /// `[lo, hi] ⊂ ℝ`
    Interval { lo: T, hi: T },
    /// Finite point list in y-space.
    Points(Vec<Vec<T>>),
}

/// Computable representation of the solution map `x ↦ S(x)`.
#[derive(Clone)]
pub enum SetMapDescriptor<T: Scalar> {
    /// `{y : normal·y = offset(x)}` with a unit normal.
    AffineHyperplane {
        normal: Vec<T>,
        offset: ScalarMap<T>,
    },
    /// `[lo(x), hi(x)] ⊂ ℝ`
    Interval {
        lo: ScalarMap<T>,
        hi: ScalarMap<T>,
    },
    /// `base − shift(x)`
    Translated {
        base: BaseSet<T>,
        shift: VectorMap<T>,
    },
    Singleton {
        point: VectorMap<T>,
    },
    /// `{(z, x) : z ∈ ℝ}`
    GraphLine,
}

impl<T: Scalar> fmt::Debug for SetMapDescriptor<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::AffineHyperplane { normal, .. } => {
                f.debug_struct("AffineHyperplane").field("normal", normal).finish_non_exhaustive()
            }
            Self::Interval { .. } => f.write_str("Interval { .. }"),
            Self::Translated { base, .. } => f.debug_struct("Translated").field("base", base).finish_non_exhaustive(),
            Self::Singleton { .. } => f.write_str("Singleton { .. }"),
            Self::GraphLine => f.write_str("GraphLine"),
        }
    }
}

/// One-parameter piece `{origin + t·direction : t ∈ [t_lo, t_hi]}` of a
/// solution set. `truncated_*` marks ends cut off from an unbounded set.
#[derive(Debug, Clone, PartialEq)]
pub struct Piece<T: Scalar> {
    pub origin: Vec<T>,
    pub direction: Vec<T>,
    pub t_lo: T,
    pub t_hi: T,
    pub truncated_lo: bool,
    pub truncated_hi: bool,
}

impl<T: Scalar> Piece<T> {
    pub fn point(&self, t: T) -> Vec<T> {
        linalg::axpy(&self.origin, t, &self.direction)
    }

    pub fn is_degenerate(&self) -> bool {
        self.t_hi <= self.t_lo
    }

    fn singleton(origin: Vec<T>) -> Self {
        let n = origin.len();
        Self {
            origin,
            direction: vec![T::zero(); n],
            t_lo: T::zero(),
            t_hi: T::zero(),
            truncated_lo: false,
            truncated_hi: false,
        }
    }
}

fn tolerance<T: Scalar>() -> T {
    T::epsilon().sqrt() * T::lit(1e-4)
}

impl<T: Scalar> SetMapDescriptor<T> {
    pub fn affine_hyperplane(normal: Vec<T>, offset: impl Fn(&[T]) -> T + Send + Sync + 'static) -> Result<Self> {
        if (linalg::norm(&normal) - T::one()).abs() > T::lit(1e-12).max(T::epsilon() * T::lit(8.0)) {
            return Err(Error::InvalidArgument("hyperplane normal must have unit length".into()));
        }
        Ok(Self::AffineHyperplane { normal, offset: Arc::new(offset) })
    }

    pub fn interval(
        lo: impl Fn(&[T]) -> T + Send + Sync + 'static,
        hi: impl Fn(&[T]) -> T + Send + Sync + 'static,
    ) -> Self {
        Self::Interval { lo: Arc::new(lo), hi: Arc::new(hi) }
    }

    pub fn translated(base: BaseSet<T>, shift: impl Fn(&[T]) -> Vec<T> + Send + Sync + 'static) -> Result<Self> {
        match &base {
            BaseSet::Interval { lo, hi } if !(lo <= hi) => {
                return Err(Error::InvalidArgument("base interval has lo > hi".into()))
            }
            BaseSet::Points(p) if p.is_empty() => {
                return Err(Error::InvalidArgument("base point list is empty".into()))
            }
            _ => {}
        }
        Ok(Self::Translated { base, shift: Arc::new(shift) })
    }

    pub fn singleton(point: impl Fn(&[T]) -> Vec<T> + Send + Sync + 'static) -> Self {
        Self::Singleton { point: Arc::new(point) }
    }

    /// Π_{S(x)}(y). Ties on finite point lists resolve to the
    /// lexicographically smallest candidate.
    pub fn project(&self, x: &[T], y: &[T]) -> Vec<T> {
        match self {
            Self::AffineHyperplane { normal, offset } => {
                let gap = linalg::dot(normal, y) - offset(x);
                linalg::axpy(y, -gap, normal)
            }
            Self::Interval { lo, hi } => vec![y[0].max(lo(x)).min(hi(x))],
            Self::Translated { base, shift } => {
                let s = shift(x);
                match base {
                    BaseSet::Interval { lo, hi } => vec![y[0].max(*lo - s[0]).min(*hi - s[0])],
                    BaseSet::Points(points) => {
                        let mut best: Option<(T, Vec<T>)> = None;
                        for p in points {
                            let cand = linalg::sub(p, &s);
                            let d = linalg::norm_sq(&linalg::sub(&cand, y));
                            let better = match &best {
                                None => true,
                                Some((bd, bp)) => d < *bd || (d == *bd && linalg::lex_less(&cand, bp)),
                            };
                            if better {
                                best = Some((d, cand));
                            }
                        }
                        best.map(|(_, p)| p).unwrap_or_default()
                    }
                }
            }
            Self::Singleton { point } => point(x),
            Self::GraphLine => {
                let mut out = Vec::with_capacity(1 + x.len());
                out.push(y[0]);
                out.extend_from_slice(x);
                out
            }
        }
    }

    /// dist(y, S(x))
    pub fn distance(&self, x: &[T], y: &[T]) -> T {
        match self {
            Self::AffineHyperplane { normal, offset } => (linalg::dot(normal, y) - offset(x)).abs(),
            _ => linalg::dist(&self.project(x, y), y),
        }
    }

    pub fn contains(&self, x: &[T], y: &[T]) -> bool {
        self.distance(x, y) <= tolerance::<T>() * (T::one() + linalg::norm(y))
    }

    /// Exact Hausdorff distance d_H(S(x1), S(x2)).
    pub fn hausdorff(&self, x1: &[T], x2: &[T]) -> T {
        match self {
            Self::AffineHyperplane { offset, .. } => (offset(x1) - offset(x2)).abs(),
            Self::Interval { lo, hi } => (lo(x1) - lo(x2)).abs().max((hi(x1) - hi(x2)).abs()),
            Self::Translated { shift, .. } => linalg::dist(&shift(x1), &shift(x2)),
            Self::Singleton { point } => linalg::dist(&point(x1), &point(x2)),
            Self::GraphLine => linalg::dist(x1, x2),
        }
    }

    /// A point of S(x) drawn around the set's anchor, at most `radius` away
    /// along the set for unbounded descriptors.
    pub fn sample<R: Rng + ?Sized>(&self, x: &[T], rng: &mut R, radius: T) -> Vec<T> {
        match self {
            Self::AffineHyperplane { normal, offset } => {
                let anchor = linalg::scale(offset(x), normal);
                let v = rng::uniform_in_ball(rng, &vec![T::zero(); normal.len()], radius);
                let along = linalg::dot(&v, normal);
                let tangent = linalg::axpy(&v, -along, normal);
                linalg::add(&anchor, &tangent)
            }
            Self::Interval { lo, hi } => vec![sample_interval(rng, lo(x), hi(x), radius)],
            Self::Translated { base, shift } => {
                let s = shift(x);
                match base {
                    BaseSet::Interval { lo, hi } => vec![sample_interval(rng, *lo, *hi, radius) - s[0]],
                    BaseSet::Points(points) => {
                        let i = rng.gen_range(0..points.len());
                        linalg::sub(&points[i], &s)
                    }
                }
            }
            Self::Singleton { point } => point(x),
            Self::GraphLine => {
                let mut out = vec![rng::uniform(rng, -radius, radius)];
                out.extend_from_slice(x);
                out
            }
        }
    }

    /// Decomposition of S(x) into one-parameter pieces; unbounded directions
    /// are cut to `|t| ≤ truncation`.
    pub fn pieces(&self, x: &[T], truncation: T) -> Result<Vec<Piece<T>>> {
        let pieces = match self {
            Self::AffineHyperplane { normal, offset } => {
                let b = offset(x);
                match normal.len() {
                    1 => vec![Piece::singleton(vec![b * normal[0]])],
                    2 => vec![Piece {
                        origin: linalg::scale(b, normal),
                        direction: vec![-normal[1], normal[0]],
                        t_lo: -truncation,
                        t_hi: truncation,
                        truncated_lo: true,
                        truncated_hi: true,
                    }],
                    _ => return Err(Error::Unsupported("parametrizing hyperplanes with n > 2")),
                }
            }
            Self::Interval { lo, hi } => {
                let (l, h) = (lo(x), hi(x));
                vec![interval_piece(l, h)]
            }
            Self::Translated { base, shift } => {
                let s = shift(x);
                match base {
                    BaseSet::Interval { lo, hi } => vec![interval_piece(*lo - s[0], *hi - s[0])],
                    BaseSet::Points(points) => points.iter().map(|p| Piece::singleton(linalg::sub(p, &s))).collect(),
                }
            }
            Self::Singleton { point } => vec![Piece::singleton(point(x))],
            Self::GraphLine => {
                let mut origin = vec![T::zero()];
                origin.extend_from_slice(x);
                let mut direction = vec![T::zero(); origin.len()];
                direction[0] = T::one();
                vec![Piece {
                    origin,
                    direction,
                    t_lo: -truncation,
                    t_hi: truncation,
                    truncated_lo: true,
                    truncated_hi: true,
                }]
            }
        };
        Ok(pieces)
    }

    /// Whether every fiber is a single one-parameter family (line, interval
    /// or point), so selections can be searched on a 1-D grid.
    pub fn is_one_parameter(&self) -> bool {
        match self {
            Self::AffineHyperplane { normal, .. } => normal.len() <= 2,
            Self::Translated { base: BaseSet::Points(p), .. } => p.len() == 1,
            _ => true,
        }
    }
}

fn interval_piece<T: Scalar>(lo: T, hi: T) -> Piece<T> {
    Piece {
        origin: vec![lo],
        direction: vec![T::one()],
        t_lo: T::zero(),
        t_hi: (hi - lo).max(T::zero()),
        truncated_lo: false,
        truncated_hi: false,
    }
}

fn sample_interval<T: Scalar, R: Rng + ?Sized>(rng: &mut R, lo: T, hi: T, radius: T) -> T {
    let mid = (lo + hi) / T::lit(2.0);
    let a = lo.max(mid - radius);
    let b = hi.min(mid + radius);
    rng::uniform(rng, a, b)
}
