use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{to_f64, PropertyReport, WorstCase};
use crate::error::{Error, Result};
use crate::inner::search::golden_section;
use crate::linalg;
use crate::problem::{Bounds, Piece, ProblemSpec, SetMapDescriptor};
use crate::rng;
use crate::scalar::Scalar;

/// Tuples whose denominator `½θ(1−θ)‖x1−x2‖²` falls below this are resampled.
const MIN_DENOMINATOR: f64 = 1e-8;
/// Radius of the region midpoint elements are drawn from.
const SAMPLE_RADIUS: f64 = 4.0;
const GRID_POINTS: usize = 1_000;
/// Truncation of unbounded fibers when they are searched on a grid.
const SEARCH_TRUNCATION: f64 = 1e9;

/// `(x1, x2, θ, y, y1, y2)` with the two set-smoothness quantities computed
/// from the stored points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct WitnessTuple<T: Scalar> {
    pub x1: Vec<T>,
    pub x2: Vec<T>,
    pub theta: T,
    pub y_mid: Vec<T>,
    pub y1: Vec<T>,
    pub y2: Vec<T>,
    /// ‖θy1 + (1−θ)y2 − y‖
    pub residual_interp: T,
    /// ‖y1 − y2‖²
    pub pairing_sq: T,
}

impl<T: Scalar> WitnessTuple<T> {
    pub fn new(x1: Vec<T>, x2: Vec<T>, theta: T, y_mid: Vec<T>, y1: Vec<T>, y2: Vec<T>) -> Self {
        let residual_interp = linalg::dist(&linalg::lerp(theta, &y1, &y2), &y_mid);
        let pairing_sq = linalg::norm_sq(&linalg::sub(&y1, &y2));
        Self { x1, x2, theta, y_mid, y1, y2, residual_interp, pairing_sq }
    }

    pub fn dx_sq(&self) -> T {
        linalg::norm_sq(&linalg::sub(&self.x1, &self.x2))
    }

    /// Smallest L for which the interpolation inequality holds.
    pub fn interp_ratio(&self) -> T {
        let half = T::lit(0.5);
        self.residual_interp / (half * self.theta * (T::one() - self.theta) * self.dx_sq())
    }

    /// Smallest L for which the pairing inequality holds.
    pub fn pair_ratio(&self) -> T {
        self.pairing_sq / self.dx_sq()
    }

    fn points(&self) -> BTreeMap<String, Vec<f64>> {
        BTreeMap::from([
            ("x1".to_string(), to_f64(&self.x1)),
            ("x2".to_string(), to_f64(&self.x2)),
            ("theta".to_string(), vec![self.theta.as_f64()]),
            ("y_mid".to_string(), to_f64(&self.y_mid)),
            ("y1".to_string(), to_f64(&self.y1)),
            ("y2".to_string(), to_f64(&self.y2)),
        ])
    }
}

/// Residual-backfilling witnesses with the intermediate points of the
/// construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Backfill<T: Scalar> {
    pub tuple: WitnessTuple<T>,
    /// Π_{S(x1)}(y), Π_{S(x2)}(y)
    pub y_bar1: Vec<T>,
    pub y_bar2: Vec<T>,
    /// Π_{S(x^θ)}(θȳ1 + (1−θ)ȳ2)
    pub y_hat: Vec<T>,
}

impl<T: Scalar> Backfill<T> {
    /// ‖ȳ1 − ȳ2‖, bounded by M_S‖x1 − x2‖.
    pub fn projection_gap(&self) -> T {
        linalg::dist(&self.y_bar1, &self.y_bar2)
    }

    /// ‖ŷ − y‖, bounded by 2θ(1−θ)M_S‖x1 − x2‖.
    pub fn midpoint_shift(&self) -> T {
        linalg::dist(&self.y_hat, &self.tuple.y_mid)
    }

    /// Both intermediate bounds for a solution-map modulus `m_s`, up to `tol`.
    pub fn claims_hold(&self, m_s: T, tol: T) -> bool {
        let dx = self.tuple.dx_sq().sqrt();
        let theta = self.tuple.theta;
        self.projection_gap() <= m_s * dx + tol
            && self.midpoint_shift() <= T::lit(2.0) * theta * (T::one() - theta) * m_s * dx + tol
    }
}

fn check_midpoint<T: Scalar>(d: &SetMapDescriptor<T>, x_mid: &[T], y_mid: &[T]) -> Result<()> {
    if d.contains(x_mid, y_mid) {
        Ok(())
    } else {
        Err(Error::InfeasibleMidpoint { distance: d.distance(x_mid, y_mid).as_f64() })
    }
}

fn backfill_on<T: Scalar>(d: &SetMapDescriptor<T>, x1: &[T], x2: &[T], theta: T, y_mid: &[T]) -> Result<Backfill<T>> {
    let x_mid = linalg::lerp(theta, x1, x2);
    check_midpoint(d, &x_mid, y_mid)?;
    let y_bar1 = d.project(x1, y_mid);
    let y_bar2 = d.project(x2, y_mid);
    let y_hat = d.project(&x_mid, &linalg::lerp(theta, &y_bar1, &y_bar2));
    let residual = linalg::sub(y_mid, &y_hat);
    let y1 = d.project(x1, &linalg::add(&y_bar1, &residual));
    let y2 = d.project(x2, &linalg::add(&y_bar2, &residual));
    Ok(Backfill {
        tuple: WitnessTuple::new(x1.to_vec(), x2.to_vec(), theta, y_mid.to_vec(), y1, y2),
        y_bar1,
        y_bar2,
        y_hat,
    })
}

/// Witnesses by projecting, projecting the combination onto the middle fiber,
/// and adding the residual back before projecting again.
pub fn backfill_witness<T: Scalar>(
    p: &ProblemSpec<T>,
    x1: &[T],
    x2: &[T],
    theta: T,
    y_mid: &[T],
) -> Result<Backfill<T>> {
    crate::error::check_dim("x1", p.m, x1.len())?;
    crate::error::check_dim("x2", p.m, x2.len())?;
    crate::error::check_dim("y_mid", p.n, y_mid.len())?;
    if !(theta >= T::zero() && theta <= T::one()) {
        return Err(Error::InvalidArgument("theta must lie in [0, 1]".into()));
    }
    backfill_on(p.descriptor()?, x1, x2, theta, y_mid)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WitnessMode {
    Backfill,
    /// `y_i = y + s(x^θ) − s(x_i)` for translated sets `B − s(x)`.
    AnalyticTranslation,
    /// Grid search over the selection parameter of one-parameter fibers.
    ExhaustiveSearch,
}

pub fn default_witness_mode<T: Scalar>(d: &SetMapDescriptor<T>) -> WitnessMode {
    match d {
        SetMapDescriptor::Translated { .. } => WitnessMode::AnalyticTranslation,
        _ => WitnessMode::Backfill,
    }
}

fn analytic_translation<T: Scalar>(
    d: &SetMapDescriptor<T>,
    x1: &[T],
    x2: &[T],
    theta: T,
    y_mid: &[T],
) -> Result<WitnessTuple<T>> {
    let SetMapDescriptor::Translated { shift, .. } = d else {
        return Err(Error::InvalidArgument("analytic translation needs a translated set".into()));
    };
    let x_mid = linalg::lerp(theta, x1, x2);
    check_midpoint(d, &x_mid, y_mid)?;
    let anchor = linalg::add(y_mid, &shift(&x_mid));
    let y1 = linalg::sub(&anchor, &shift(x1));
    let y2 = linalg::sub(&anchor, &shift(x2));
    Ok(WitnessTuple::new(x1.to_vec(), x2.to_vec(), theta, y_mid.to_vec(), y1, y2))
}

fn param_of<T: Scalar>(piece: &Piece<T>, y: &[T]) -> T {
    if piece.is_degenerate() {
        return piece.t_lo;
    }
    let t = linalg::dot(&linalg::sub(y, &piece.origin), &piece.direction);
    t.max(piece.t_lo).min(piece.t_hi)
}

/// Best partner `y2` on `piece2` for a fixed `y1`, minimizing the larger of
/// the two ratios (a convex function of the piece parameter).
fn best_partner<T: Scalar>(piece2: &Piece<T>, y1: &[T], y_mid: &[T], theta: T, dx_sq: T) -> (Vec<T>, T) {
    let half = T::lit(0.5);
    let denom = half * theta * (T::one() - theta) * dx_sq;
    let score = |y2: &[T]| {
        let interp = linalg::dist(&linalg::lerp(theta, y1, y2), y_mid) / denom;
        let pair = linalg::norm_sq(&linalg::sub(y1, y2)) / dx_sq;
        interp.max(pair)
    };
    if piece2.is_degenerate() {
        let y2 = piece2.point(piece2.t_lo);
        let s = score(&y2);
        return (y2, s);
    }
    let target = linalg::scale(T::one() / (T::one() - theta), &linalg::axpy(y_mid, -theta, y1));
    let ta = param_of(piece2, &target);
    let tb = param_of(piece2, y1);
    let (lo, hi) = (ta.min(tb), ta.max(tb));
    let tol = T::epsilon().sqrt() * T::lit(1e-3) * (T::one() + hi.abs().max(lo.abs()));
    let g = golden_section(lo, hi, tol, 200, |t| score(&piece2.point(t)), |_, _| T::zero());
    let mut best = (piece2.point(g.point), score(&piece2.point(g.point)));
    for t in [ta, tb] {
        let y2 = piece2.point(t);
        let s = score(&y2);
        if s < best.1 {
            best = (y2, s);
        }
    }
    best
}

fn exhaustive_search<T: Scalar>(
    d: &SetMapDescriptor<T>,
    x1: &[T],
    x2: &[T],
    theta: T,
    y_mid: &[T],
    l: T,
) -> Result<WitnessTuple<T>> {
    if !d.is_one_parameter() {
        return Err(Error::InvalidArgument("exhaustive search needs one-parameter fibers".into()));
    }
    let x_mid = linalg::lerp(theta, x1, x2);
    check_midpoint(d, &x_mid, y_mid)?;
    let truncation = T::lit(SEARCH_TRUNCATION);
    let pieces1 = d.pieces(x1, truncation)?;
    let pieces2 = d.pieces(x2, truncation)?;
    let dx_sq = linalg::norm_sq(&linalg::sub(x1, x2));
    let reach = T::lit(2.0) * (T::one() + l.max(T::zero()).sqrt()) * dx_sq.sqrt() + d.hausdorff(x1, &x_mid);
    let mut best: Option<(Vec<T>, Vec<T>, T)> = None;
    let consider = |y1: Vec<T>, piece2: &Piece<T>, best: &mut Option<(Vec<T>, Vec<T>, T)>| -> T {
        let (y2, s) = best_partner(piece2, &y1, y_mid, theta, dx_sq);
        if best.as_ref().is_none_or(|b| s < b.2) {
            *best = Some((y1, y2, s));
        }
        s
    };
    for piece1 in &pieces1 {
        for piece2 in &pieces2 {
            if piece1.is_degenerate() {
                consider(piece1.point(piece1.t_lo), piece2, &mut best);
                continue;
            }
            let center = param_of(piece1, y_mid);
            let mut lo = (center - reach).max(piece1.t_lo);
            let mut hi = (center + reach).min(piece1.t_hi);
            // one refinement pass around the best grid point
            for _ in 0..2 {
                let step = (hi - lo) / T::from_usize_lossy(GRID_POINTS);
                let mut arg = lo;
                let mut arg_score = T::infinity();
                for i in 0..=GRID_POINTS {
                    let t = lo + step * T::from_usize_lossy(i);
                    let s = consider(piece1.point(t), piece2, &mut best);
                    if s < arg_score {
                        arg_score = s;
                        arg = t;
                    }
                }
                lo = (arg - step).max(piece1.t_lo);
                hi = (arg + step).min(piece1.t_hi);
            }
        }
    }
    let (y1, y2, _) = best.ok_or_else(|| Error::NoWitness("empty fiber".into()))?;
    Ok(WitnessTuple::new(x1.to_vec(), x2.to_vec(), theta, y_mid.to_vec(), y1, y2))
}

/// Sampled check of set smoothness with modulus `l`: for each sampled
/// `(x1, x2, θ, y)` the chosen mode produces witnesses and the report records
/// `max(interp ratio, pair ratio)` over samples. Coverage of the middle fiber
/// is sampled, not exhaustive.
pub fn set_smoothness_check<T: Scalar, R: Rng + ?Sized>(
    d: &SetMapDescriptor<T>,
    bx: &Bounds<T>,
    l: T,
    n_samples: usize,
    rng: &mut R,
    mode: WitnessMode,
) -> Result<PropertyReport> {
    if n_samples == 0 {
        return Err(Error::InvalidArgument("at least one sample is required".into()));
    }
    match mode {
        WitnessMode::AnalyticTranslation if !matches!(d, SetMapDescriptor::Translated { .. }) => {
            return Err(Error::InvalidArgument("analytic translation needs a translated set".into()))
        }
        WitnessMode::ExhaustiveSearch if !d.is_one_parameter() => {
            return Err(Error::InvalidArgument("exhaustive search needs one-parameter fibers".into()))
        }
        _ => {}
    }
    let half = T::lit(0.5);
    let mut l_interp = 0.0f64;
    let mut l_pair = 0.0f64;
    let mut worst = WorstCase::default();
    let mut resamples = 0usize;
    for _ in 0..n_samples {
        let (x1, x2, theta) = loop {
            let x1 = bx.sample(rng);
            let x2 = bx.sample(rng);
            let theta: T = rng::uniform(rng, T::zero(), T::one());
            let denom = half * theta * (T::one() - theta) * linalg::norm_sq(&linalg::sub(&x1, &x2));
            if denom.as_f64() >= MIN_DENOMINATOR {
                break (x1, x2, theta);
            }
            resamples += 1;
        };
        let x_mid = linalg::lerp(theta, &x1, &x2);
        let y_mid = d.sample(&x_mid, rng, T::lit(SAMPLE_RADIUS));
        let tuple = match mode {
            WitnessMode::Backfill => backfill_on(d, &x1, &x2, theta, &y_mid)?.tuple,
            WitnessMode::AnalyticTranslation => analytic_translation(d, &x1, &x2, theta, &y_mid)?,
            WitnessMode::ExhaustiveSearch => exhaustive_search(d, &x1, &x2, theta, &y_mid, l)?,
        };
        if !d.contains(&tuple.x1, &tuple.y1) || !d.contains(&tuple.x2, &tuple.y2) {
            return Err(Error::NoWitness(format!(
                "witness off its fiber at x1 = {:?}, x2 = {:?}, theta = {}",
                tuple.x1, tuple.x2, tuple.theta
            )));
        }
        let ri = tuple.interp_ratio().as_f64();
        let rp = tuple.pair_ratio().as_f64();
        l_interp = l_interp.max(ri);
        l_pair = l_pair.max(rp);
        let value = ri.max(rp);
        if value > worst.value || worst.points.is_empty() {
            worst.value = value;
            worst.points = tuple.points();
        }
    }
    let mut report = PropertyReport::new("set-smoothness", n_samples, l_interp.max(l_pair), Some(l.as_f64()), worst);
    report.details.insert("l_interp".into(), l_interp);
    report.details.insert("l_pair".into(), l_pair);
    report.details.insert("resamples".into(), resamples as f64);
    Ok(report)
}

/// Largest `K = ‖y1 − Π_{S(x1)}(y)‖` among witnesses that reproduce `y`
/// exactly (`θy1 + (1−θ)y2 = y`) and satisfy the pairing inequality with
/// modulus `l`, moving along the fiber of `x1` in its positive direction.
/// Needs one-parameter fibers made of a single piece.
pub fn pairing_boundary<T: Scalar>(
    d: &SetMapDescriptor<T>,
    x1: &[T],
    x2: &[T],
    theta: T,
    y_mid: &[T],
    l: T,
) -> Result<T> {
    if !(theta > T::zero() && theta < T::one()) {
        return Err(Error::InvalidArgument("theta must lie in (0, 1)".into()));
    }
    let x_mid = linalg::lerp(theta, x1, x2);
    check_midpoint(d, &x_mid, y_mid)?;
    let truncation = T::lit(SEARCH_TRUNCATION);
    let (p1, p2) = match (d.pieces(x1, truncation)?.as_slice(), d.pieces(x2, truncation)?.as_slice()) {
        ([a], [b]) if !a.is_degenerate() => (a.clone(), b.clone()),
        _ => return Err(Error::InvalidArgument("pairing boundary needs single one-parameter fibers".into())),
    };
    let dx_sq = linalg::norm_sq(&linalg::sub(x1, x2));
    let bound = l * dx_sq;
    let center = param_of(&p1, y_mid);
    let scale = T::one() + linalg::norm(y_mid);
    let exact_tol = T::lit(1e-9) * scale;
    let feasible = |k: T| -> bool {
        let t1 = center + k;
        if t1 > p1.t_hi {
            return false;
        }
        let y1 = p1.point(t1);
        let target = linalg::scale(T::one() / (T::one() - theta), &linalg::axpy(y_mid, -theta, &y1));
        let y2 = p2.point(param_of(&p2, &target));
        (T::one() - theta) * linalg::dist(&y2, &target) <= exact_tol && linalg::norm_sq(&linalg::sub(&y1, &y2)) <= bound
    };
    if !feasible(T::zero()) {
        return Err(Error::NoWitness("no exact-interpolation witness satisfies the pairing bound".into()));
    }
    let mut lo = T::zero();
    let mut hi = scale.max(dx_sq.sqrt());
    while feasible(hi) {
        lo = hi;
        hi *= T::lit(2.0);
        if hi > truncation {
            return Ok(T::infinity());
        }
    }
    for _ in 0..200 {
        let mid = (lo + hi) * T::lit(0.5);
        if !(mid > lo && mid < hi) {
            break;
        }
        if feasible(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}
