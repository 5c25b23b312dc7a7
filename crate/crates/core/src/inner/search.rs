//! One-dimensional search primitives.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::linalg;
use crate::problem::Piece;
use crate::scalar::Scalar;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoldenResult<T> {
    pub point: T,
    /// Final bracket.
    pub lo: T,
    pub hi: T,
    pub evals: usize,
}

/// Golden-section minimization of `ψ(t) = value(t) + extra(t)` on `[lo, hi]`.
///
/// Comparisons use `value(a) − value(b) + extra_diff(a, b)` where
/// `extra_diff` is the exact difference of an analytic additive term. Passing
/// the quadratic part of a prox objective this way keeps the comparison free
/// of the cancellation that limits naive golden section to √ε accuracy.
pub fn golden_section<T: Scalar>(
    mut lo: T,
    mut hi: T,
    tol: T,
    max_iter: usize,
    mut value: impl FnMut(T) -> T,
    extra_diff: impl Fn(T, T) -> T,
) -> GoldenResult<T> {
    let r = T::lit(INV_PHI);
    let mut c = hi - r * (hi - lo);
    let mut d = lo + r * (hi - lo);
    let mut fc = value(c);
    let mut fd = value(d);
    let mut evals = 2;
    for _ in 0..max_iter {
        if hi - lo <= tol {
            break;
        }
        // ψ(c) < ψ(d): the minimizer lies in [lo, d]
        if fc - fd + extra_diff(c, d) < T::zero() {
            hi = d;
            d = c;
            fd = fc;
            c = hi - r * (hi - lo);
            fc = value(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + r * (hi - lo);
            fd = value(d);
        }
        evals += 1;
        if !(c < d) {
            break;
        }
    }
    let point = if fc - fd + extra_diff(c, d) < T::zero() { c } else { d };
    GoldenResult { point, lo, hi, evals }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertifiedMax<T> {
    /// Largest objective value found (a feasible value).
    pub value: T,
    pub point: Vec<T>,
    /// Certified upper bound on `sup − value`.
    pub gap: T,
    pub evals: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct MaximizeSettings<T> {
    /// Lipschitz modulus of the objective along unit-speed pieces.
    pub lipschitz: T,
    /// Gradient-Lipschitz modulus along unit-speed pieces, if known.
    pub smoothness: Option<T>,
    pub tol: T,
    pub budget: usize,
    /// Equispaced cells per piece before refinement.
    pub starts: usize,
}

struct Cell<T> {
    piece: usize,
    a: T,
    b: T,
    fa: T,
    fb: T,
    ub: T,
}

impl<T: Scalar> PartialEq for Cell<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<T: Scalar> Eq for Cell<T> {}
impl<T: Scalar> PartialOrd for Cell<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T: Scalar> Ord for Cell<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.ub.as_f64().total_cmp(&other.ub.as_f64())
    }
}

struct Incumbent<T> {
    value: T,
    piece: usize,
    t: T,
}

/// Certified global maximization of `objective` over a union of segments.
///
/// Each piece is seeded with an equispaced grid, the best grid point is
/// polished by golden section, then cells are bisected best-bound-first. A
/// cell's bound is the smaller of the Lipschitz roof
/// `(f(a) + f(b) + M·len) / 2` and, when a smoothness modulus is given, the
/// curvature roof `max(f(a), f(b)) + L·len² / 8`. Refinement stops once the
/// largest bound is within `tol` of the incumbent.
pub fn certified_maximize<T: Scalar>(
    pieces: &[Piece<T>],
    objective: impl Fn(&[T]) -> T,
    settings: &MaximizeSettings<T>,
) -> Result<(CertifiedMax<T>, Option<T>)> {
    let two = T::lit(2.0);
    let eight = T::lit(8.0);
    let mut evals = 0usize;
    let mut inc: Option<Incumbent<T>> = None;
    // best value away from truncated ends
    let mut interior_best: Option<T> = None;

    let eval = |piece: usize, t: T, evals: &mut usize| -> T {
        *evals += 1;
        objective(&pieces[piece].point(t))
    };
    let record = |inc: &mut Option<Incumbent<T>>, interior: &mut Option<T>, piece: usize, t: T, v: T| {
        let p = &pieces[piece];
        let better = match inc {
            None => true,
            Some(cur) => v > cur.value,
        };
        if better {
            *inc = Some(Incumbent { value: v, piece, t });
        }
        if !near_truncated_end(p, t) && interior.is_none_or(|b| v > b) {
            *interior = Some(v);
        }
    };
    let bound = |len: T, fa: T, fb: T, parent: T| -> T {
        let lip = (fa + fb + settings.lipschitz * len) / two;
        let curv = settings.smoothness.map_or(T::infinity(), |l| fa.max(fb) + l * len * len / eight);
        lip.min(curv).min(parent).max(fa.max(fb))
    };

    let mut heap = BinaryHeap::new();
    let starts = settings.starts.max(1);
    for (k, p) in pieces.iter().enumerate() {
        if p.is_degenerate() {
            let v = eval(k, p.t_lo, &mut evals);
            record(&mut inc, &mut interior_best, k, p.t_lo, v);
            continue;
        }
        let speed = linalg::norm(&p.direction);
        let step = (p.t_hi - p.t_lo) / T::from_usize_lossy(starts);
        let grid: Vec<T> =
            (0..=starts).map(|i| if i == starts { p.t_hi } else { p.t_lo + step * T::from_usize_lossy(i) }).collect();
        let values: Vec<T> = grid.iter().map(|&t| eval(k, t, &mut evals)).collect();
        let mut best_i = 0;
        for (i, (&t, &v)) in grid.iter().zip(&values).enumerate() {
            record(&mut inc, &mut interior_best, k, t, v);
            if v > values[best_i] {
                best_i = i;
            }
        }
        for i in 0..starts {
            let len = (grid[i + 1] - grid[i]) * speed;
            let ub = bound(len, values[i], values[i + 1], T::infinity());
            heap.push(Cell { piece: k, a: grid[i], b: grid[i + 1], fa: values[i], fb: values[i + 1], ub });
        }
        // polish around the best grid point
        let lo = grid[best_i.saturating_sub(1)];
        let hi = grid[(best_i + 1).min(starts)];
        let polish_tol = (hi - lo) * T::lit(1e-6);
        let mut polish_evals = 0;
        let g = golden_section(
            lo,
            hi,
            polish_tol,
            64,
            |t| {
                polish_evals += 1;
                -objective(&p.point(t))
            },
            |_, _| T::zero(),
        );
        evals += polish_evals;
        let v = eval(k, g.point, &mut evals);
        record(&mut inc, &mut interior_best, k, g.point, v);
    }

    let inc_ref = |inc: &Option<Incumbent<T>>| inc.as_ref().expect("at least one piece").value;
    loop {
        let best = inc_ref(&inc);
        let gap = heap.peek().map_or(T::zero(), |c: &Cell<T>| (c.ub - best).max(T::zero()));
        if gap <= settings.tol {
            break;
        }
        if evals >= settings.budget {
            return Err(Error::BudgetExceeded {
                budget: settings.budget,
                best_value: best.as_f64(),
                achieved_tol: gap.as_f64(),
            });
        }
        let cell = heap.pop().expect("nonempty heap");
        let mid = (cell.a + cell.b) / two;
        if !(cell.a < mid && mid < cell.b) {
            // cell below floating resolution: its bound is its best endpoint
            let exact = cell.fa.max(cell.fb);
            if exact > best {
                record(
                    &mut inc,
                    &mut interior_best,
                    cell.piece,
                    if cell.fa >= cell.fb { cell.a } else { cell.b },
                    exact,
                );
            }
            continue;
        }
        let fm = eval(cell.piece, mid, &mut evals);
        record(&mut inc, &mut interior_best, cell.piece, mid, fm);
        let speed = linalg::norm(&pieces[cell.piece].direction);
        for (a, b, fa, fb) in [(cell.a, mid, cell.fa, fm), (mid, cell.b, fm, cell.fb)] {
            let ub = bound((b - a) * speed, fa, fb, cell.ub);
            heap.push(Cell { piece: cell.piece, a, b, fa, fb, ub });
        }
    }

    let best = inc.expect("at least one piece");
    let gap = heap.peek().map_or(T::zero(), |c| (c.ub - best.value).max(T::zero()));
    let result = CertifiedMax { value: best.value, point: pieces[best.piece].point(best.t), gap, evals };
    let interior_shortfall = if near_truncated_end(&pieces[best.piece], best.t) {
        Some(interior_best.map_or(T::infinity(), |b| best.value - b))
    } else {
        None
    };
    Ok((result, interior_shortfall))
}

fn near_truncated_end<T: Scalar>(p: &Piece<T>, t: T) -> bool {
    let band = (p.t_hi - p.t_lo) / T::lit(8.0);
    (p.truncated_lo && t < p.t_lo + band) || (p.truncated_hi && t > p.t_hi - band)
}
