//! Monotone piecewise-linear functions with jumps.
//!
//! Both quantile functions (on levels `[0,1)`) and cumulative distribution
//! functions (on a bounded window of the line) are stored as a
//! [`MonotonePl`]: knots `k_0 < k_1 < ... < k_n` and, for each interval
//! `[k_i, k_{i+1})`, an affine [`Piece`]. Functions are right-continuous and
//! nondecreasing; a jump at `k_i` is allowed.

use crate::error::{Error, Result};
use crate::scalar::{CompensatedSum, Scalar};

/// Affine piece `x -> start + slope * (x - left_knot)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Piece<T> {
    pub start: T,
    pub slope: T,
}

impl<T: Scalar> Piece<T> {
    pub fn new(start: T, slope: T) -> Self {
        Self { start, slope }
    }

    pub fn constant(value: T) -> Self {
        Self { start: value, slope: T::zero() }
    }

    /// Value at offset `dx` from the left knot.
    pub fn at(&self, dx: T) -> T {
        if dx == T::zero() || self.slope == T::zero() {
            self.start
        } else {
            self.start + self.slope * dx
        }
    }
}

/// Right-continuous nondecreasing piecewise-linear function on `[k_0, k_n)`.
///
/// A function with no pieces is allowed and stands for a single point
/// `k_0`; it appears as the CDF window of a Dirac mass.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotonePl<T> {
    knots: Vec<T>,
    pieces: Vec<Piece<T>>,
}

impl<T: Scalar> MonotonePl<T> {
    /// Strict constructor: rejects decreasing jumps, negative slopes and
    /// empty intervals. The result is canonical (mergeable pieces fused).
    pub fn new(knots: Vec<T>, pieces: Vec<Piece<T>>) -> Result<Self> {
        check_shape(&knots, &pieces)?;
        for w in knots.windows(2) {
            if !(w[0] < w[1]) {
                return Err(Error::InvalidRepresentation("knots must be strictly increasing".into()));
            }
        }
        for (i, p) in pieces.iter().enumerate() {
            if !p.start.is_finite() || !p.slope.is_finite() {
                return Err(Error::InvalidRepresentation("non-finite piece".into()));
            }
            if p.slope < T::zero() {
                return Err(Error::InvalidRepresentation(format!("negative slope on piece {i}")));
            }
            if i > 0 {
                let left = pieces[i - 1].at(knots[i] - knots[i - 1]);
                if p.start < left {
                    return Err(Error::InvalidRepresentation(format!("decreasing jump at knot {i}")));
                }
            }
        }
        let mut f = Self { knots, pieces };
        f.canonicalize();
        Ok(f)
    }

    /// Constructor for values produced by arithmetic: drops empty intervals
    /// and clamps negative jumps and slopes whose size is within `tol`
    /// (relative to the magnitudes involved). Larger violations are errors.
    pub fn new_lenient(knots: Vec<T>, pieces: Vec<Piece<T>>, tol: T) -> Result<Self> {
        check_shape(&knots, &pieces)?;
        let mut ks: Vec<T> = Vec::with_capacity(knots.len());
        let mut ps: Vec<Piece<T>> = Vec::with_capacity(pieces.len());
        ks.push(knots[0]);
        for (i, p) in pieces.iter().enumerate() {
            let (a, b) = (knots[i], knots[i + 1]);
            if b < a {
                return Err(Error::InvalidRepresentation("knots out of order".into()));
            }
            if !(b > a) {
                continue;
            }
            if !p.start.is_finite() || !p.slope.is_finite() {
                return Err(Error::InvalidRepresentation("non-finite piece".into()));
            }
            let mut piece = *p;
            if piece.slope < T::zero() {
                let scale = T::one() + piece.start.abs() + (piece.slope * (b - a)).abs();
                if (piece.slope * (b - a)).abs() > tol * scale {
                    return Err(Error::InvalidRepresentation(format!("negative slope on piece {i}")));
                }
                piece.slope = T::zero();
            }
            if let Some(prev) = ps.last() {
                let left = prev.at(a - ks[ks.len() - 2]);
                if piece.start < left {
                    let scale = T::one() + left.abs() + piece.start.abs();
                    if left - piece.start > tol * scale {
                        return Err(Error::InvalidRepresentation(format!("decreasing jump at knot {i}")));
                    }
                    // keep the slope: it is usually exact while the start carries the rounding
                    piece.start = left;
                }
            }
            ps.push(piece);
            ks.push(b);
        }
        let mut f = Self { knots: ks, pieces: ps };
        f.canonicalize();
        Ok(f)
    }

    /// Degenerate function on the single point `x`.
    pub fn point(x: T) -> Self {
        Self { knots: vec![x], pieces: Vec::new() }
    }

    pub fn constant(lo: T, hi: T, value: T) -> Result<Self> {
        Self::new(vec![lo, hi], vec![Piece::constant(value)])
    }

    pub fn knots(&self) -> &[T] {
        &self.knots
    }

    pub fn pieces(&self) -> &[Piece<T>] {
        &self.pieces
    }

    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn lo(&self) -> T {
        self.knots[0]
    }

    pub fn hi(&self) -> T {
        self.knots[self.knots.len() - 1]
    }

    /// Value at the left end of piece `i`'s right knot (the left limit there).
    pub fn left_limit(&self, i: usize) -> T {
        self.pieces[i].at(self.knots[i + 1] - self.knots[i])
    }

    /// Value just after `lo()`.
    pub fn first_value(&self) -> T {
        self.pieces[0].start
    }

    /// Left limit at `hi()`.
    pub fn last_value(&self) -> T {
        self.left_limit(self.pieces.len() - 1)
    }

    pub fn is_all_constant(&self) -> bool {
        self.pieces.iter().all(|p| p.slope == T::zero())
    }

    /// Index of the piece containing `x`, clamped to the valid range.
    pub fn piece_index(&self, x: T) -> usize {
        let n = self.pieces.len();
        let interior = &self.knots[1..n];
        interior.partition_point(|&k| k <= x)
    }

    /// Right-continuous value; outside the domain the boundary value is used.
    pub fn eval(&self, x: T) -> T {
        if x >= self.hi() {
            return self.last_value();
        }
        if x <= self.lo() {
            return self.first_value();
        }
        let i = self.piece_index(x);
        self.pieces[i].at(x - self.knots[i])
    }

    /// Left limit at `x`; outside the domain the boundary value is used.
    pub fn eval_left(&self, x: T) -> T {
        if x <= self.lo() {
            return self.first_value();
        }
        if x >= self.hi() {
            return self.last_value();
        }
        let n = self.pieces.len();
        let i = self.knots[1..n].partition_point(|&k| k < x);
        self.pieces[i].at(x - self.knots[i])
    }

    /// Exact integral over `[a, b]`, clipped to the domain.
    pub fn integral(&self, a: T, b: T) -> T {
        if self.pieces.is_empty() {
            return T::zero();
        }
        let a = a.max(self.lo());
        let b = b.min(self.hi());
        if !(b > a) {
            return T::zero();
        }
        let half = T::lit(0.5);
        let mut acc = CompensatedSum::new();
        let first = self.piece_index(a);
        for i in first..self.pieces.len() {
            let (k0, k1) = (self.knots[i], self.knots[i + 1]);
            if k0 >= b {
                break;
            }
            let s = a.max(k0);
            let e = b.min(k1);
            if e > s {
                let p = &self.pieces[i];
                acc.add((e - s) * (p.start + p.slope * ((s - k0) + (e - k0)) * half));
            }
        }
        acc.value()
    }

    /// Restriction to `[a, b)`; requires `lo() <= a < b <= hi()`.
    pub fn restrict(&self, a: T, b: T) -> Result<Self> {
        if !(a < b) || a < self.lo() || b > self.hi() {
            return Err(Error::InvalidRepresentation("restriction window outside the domain".into()));
        }
        let mut knots = vec![a];
        let mut pieces = Vec::new();
        let first = self.piece_index(a);
        for i in first..self.pieces.len() {
            let (k0, k1) = (self.knots[i], self.knots[i + 1]);
            if k0 >= b {
                break;
            }
            let s = a.max(k0);
            let e = b.min(k1);
            if e > s {
                let p = self.pieces[i];
                pieces.push(Piece::new(p.at(s - k0), p.slope));
                knots.push(e);
            }
        }
        Ok(Self { knots, pieces })
    }

    /// Concatenates functions whose domains abut.
    pub fn concat(parts: &[Self], tol: T) -> Result<Self> {
        let parts: Vec<&Self> = parts.iter().filter(|p| !p.is_empty()).collect();
        let Some(first) = parts.first() else {
            return Err(Error::InvalidRepresentation("nothing to concatenate".into()));
        };
        let mut knots = vec![first.lo()];
        let mut pieces = Vec::new();
        for p in &parts {
            if p.lo() != *knots.last().unwrap() {
                return Err(Error::InvalidRepresentation("concatenated domains do not abut".into()));
            }
            knots.extend_from_slice(&p.knots[1..]);
            pieces.extend_from_slice(&p.pieces);
        }
        Self::new_lenient(knots, pieces, tol)
    }

    /// `x -> scale * f(x) + offset` with `scale >= 0`.
    pub fn scale_values(&self, scale: T, offset: T) -> Self {
        let pieces = self
            .pieces
            .iter()
            .map(|p| Piece::new(scale * p.start + offset, scale * p.slope))
            .collect();
        let mut f = Self { knots: self.knots.clone(), pieces };
        f.canonicalize();
        f
    }

    /// Caps the values at `cap`; a piece whose end overshoots gets the
    /// largest slope that keeps its end at or below `cap`.
    pub(crate) fn cap_values(&self, cap: T) -> Self {
        let pieces = self
            .pieces
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let w = self.knots[i + 1] - self.knots[i];
                let start = p.start.min(cap);
                if p.at(w) > cap {
                    let mut q = Piece::new(start, ((cap - start) / w).max(T::zero()));
                    while q.at(w) > cap && q.slope > T::zero() {
                        q.slope = q.slope * (T::one() - T::epsilon());
                    }
                    q
                } else {
                    Piece::new(start, p.slope)
                }
            })
            .collect();
        let mut f = Self { knots: self.knots.clone(), pieces };
        f.canonicalize();
        f
    }

    /// `x -> f(scale * x + shift)` re-expressed on the transformed knots, `scale > 0`.
    pub fn rescale_domain(&self, scale: T, shift: T) -> Self {
        let knots = self.knots.iter().map(|&k| (k - shift) / scale).collect();
        let pieces = self.pieces.iter().map(|p| Piece::new(p.start, p.slope * scale)).collect();
        Self { knots, pieces }
    }

    /// Mirror image: domain reflected onto itself, values mapped by `v -> offset - v`.
    pub fn reflect(&self, offset: T) -> Self {
        let (lo, hi) = (self.lo(), self.hi());
        let n = self.pieces.len();
        let mut knots = Vec::with_capacity(n + 1);
        let mut pieces = Vec::with_capacity(n);
        knots.push(lo);
        for i in (0..n).rev() {
            pieces.push(Piece::new(offset - self.left_limit(i), self.pieces[i].slope));
            knots.push(reflect_knot(lo, hi, self.knots[i]));
        }
        let mut f = Self { knots, pieces };
        f.canonicalize();
        f
    }

    /// Right-continuous generalized inverse `v -> sup{x in [lo(), hi()] : f(x) <= v}`
    /// on the value window `[vlo, vhi)`, with `sup(empty) = lo()`.
    pub fn generalized_inverse(&self, vlo: T, vhi: T) -> Result<Self> {
        if !(vlo < vhi) {
            return Ok(Self::point(vlo));
        }
        let mut knots = vec![vlo];
        let mut pieces: Vec<Piece<T>> = Vec::new();
        let mut push = |s: T, e: T, piece_at: &dyn Fn(T) -> Piece<T>| {
            let s = s.max(vlo);
            let e = e.min(vhi);
            if e > s {
                let last = *knots.last().unwrap();
                if s > last {
                    return;
                }
                pieces.push(piece_at(s));
                knots.push(e);
            }
        };
        let mut prev_end = T::neg_infinity();
        for (i, p) in self.pieces.iter().enumerate() {
            let s = p.start;
            let e = self.left_limit(i);
            let k = self.knots[i];
            push(prev_end, s, &|_| Piece::constant(k));
            if p.slope > T::zero() {
                let inv = T::one() / p.slope;
                push(s, e, &|v| Piece::new(k + (v - s) * inv, inv));
            }
            prev_end = e;
        }
        let last = self.hi();
        push(prev_end, T::infinity(), &|_| Piece::constant(last));
        Self::new_lenient(knots, pieces, T::tolerance(1e-12))
    }

    fn canonicalize(&mut self) {
        if self.pieces.len() < 2 {
            return;
        }
        let mut knots = vec![self.knots[0]];
        let mut pieces: Vec<Piece<T>> = vec![self.pieces[0]];
        for i in 1..self.pieces.len() {
            let p = self.pieces[i];
            let j = pieces.len() - 1;
            let prev = pieces[j];
            let left = prev.at(self.knots[i] - knots[j]);
            if p.slope == prev.slope && p.start == left {
                continue;
            }
            knots.push(self.knots[i]);
            pieces.push(p);
        }
        knots.push(*self.knots.last().unwrap());
        self.knots = knots;
        self.pieces = pieces;
    }
}

fn reflect_knot<T: Scalar>(lo: T, hi: T, k: T) -> T {
    if lo == T::zero() {
        hi - k
    } else {
        (lo + hi) - k
    }
}

fn check_shape<T: Scalar>(knots: &[T], pieces: &[Piece<T>]) -> Result<()> {
    if knots.len() != pieces.len() + 1 {
        return Err(Error::InvalidRepresentation(format!(
            "{} knots for {} pieces",
            knots.len(),
            pieces.len()
        )));
    }
    if knots.iter().any(|k| !k.is_finite()) {
        return Err(Error::InvalidRepresentation("non-finite knot".into()));
    }
    Ok(())
}

/// Several functions re-expressed on the union of their knots.
#[derive(Debug, Clone)]
pub struct Refinement<T> {
    pub knots: Vec<T>,
    /// `columns[f][i]` is function `f` on `[knots[i], knots[i+1])`.
    pub columns: Vec<Vec<Piece<T>>>,
    /// `own[f][i]` is true when `knots[i]` is a knot of function `f`.
    own: Vec<Vec<bool>>,
}

impl<T: Scalar> Refinement<T> {
    /// Common refinement of functions sharing one domain.
    pub fn of(fns: &[&MonotonePl<T>]) -> Result<Self> {
        let Some(first) = fns.first() else {
            return Err(Error::InvalidRepresentation("nothing to refine".into()));
        };
        let (lo, hi) = (first.lo(), first.hi());
        if fns.iter().any(|f| f.lo() != lo || f.hi() != hi || f.is_empty()) {
            return Err(Error::InvalidRepresentation("refined functions must share a domain".into()));
        }
        let mut knots: Vec<T> = fns.iter().flat_map(|f| f.knots.iter().copied()).collect();
        knots.sort_by(|a, b| a.partial_cmp(b).unwrap());
        knots.dedup();
        let m = knots.len() - 1;
        let mut columns = Vec::with_capacity(fns.len());
        let mut own = Vec::with_capacity(fns.len());
        for f in fns {
            let mut col = Vec::with_capacity(m);
            let mut flags = Vec::with_capacity(m + 1);
            let mut j = 0;
            for &x in &knots[..m] {
                while f.knots[j + 1] <= x {
                    j += 1;
                }
                let p = f.pieces[j];
                let own_knot = f.knots[j] == x;
                flags.push(own_knot);
                col.push(if own_knot { p } else { Piece::new(p.at(x - f.knots[j]), p.slope) });
            }
            flags.push(true);
            columns.push(col);
            own.push(flags);
        }
        Ok(Self { knots, columns, own })
    }

    pub fn len(&self) -> usize {
        self.knots.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn width(&self, i: usize) -> T {
        self.knots[i + 1] - self.knots[i]
    }

    /// Left limit of column `f` at the right end of interval `i`.
    pub fn left_limit(&self, f: usize, i: usize) -> T {
        self.columns[f][i].at(self.width(i))
    }

    /// Jump of column `f` at interior knot `i` (exactly zero when the knot
    /// was introduced by another function).
    pub fn jump(&self, f: usize, i: usize) -> T {
        if !self.own[f][i] {
            return T::zero();
        }
        self.columns[f][i].start - self.left_limit(f, i - 1)
    }

    /// Pointwise linear combination `sum_f weights[f] * column f`.
    pub fn combine(&self, weights: &[T]) -> (Vec<T>, Vec<Piece<T>>) {
        let pieces = (0..self.len())
            .map(|i| {
                let mut start = T::zero();
                let mut slope = T::zero();
                for (f, &w) in weights.iter().enumerate() {
                    if w != T::zero() {
                        start = start + w * self.columns[f][i].start;
                        slope = slope + w * self.columns[f][i].slope;
                    }
                }
                Piece::new(start, slope)
            })
            .collect();
        (self.knots.clone(), pieces)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn steps(knots: &[f64], values: &[f64]) -> MonotonePl<f64> {
        MonotonePl::new(knots.to_vec(), values.iter().map(|&v| Piece::constant(v)).collect()).unwrap()
    }

    #[test]
    fn rejects_decreasing() {
        let r = MonotonePl::new(vec![0.0, 0.5, 1.0], vec![Piece::constant(1.0), Piece::constant(0.0)]);
        assert!(r.is_err());
        let r = MonotonePl::new(vec![0.0, 1.0], vec![Piece::new(0.0, -1.0)]);
        assert!(r.is_err());
    }

    #[test]
    fn canonical_merge() {
        let f = MonotonePl::new(
            vec![0.0, 0.5, 1.0],
            vec![Piece::new(0.0, 1.0), Piece::new(0.5, 1.0)],
        )
        .unwrap();
        assert_eq!(f.len(), 1);
        let g = steps(&[0.0, 0.25, 1.0], &[2.0, 2.0]);
        assert_eq!(g.len(), 1);
    }

    #[test]
    fn eval_is_right_continuous() {
        let f = steps(&[0.0, 0.5, 1.0], &[0.0, 1.0]);
        assert_eq!(f.eval(0.5), 1.0);
        assert_eq!(f.eval_left(0.5), 0.0);
        assert_eq!(f.eval(0.49), 0.0);
    }

    #[test]
    fn integral_exact() {
        let f = MonotonePl::new(vec![0.0, 1.0], vec![Piece::new(0.0, 1.0)]).unwrap();
        assert_eq!(f.integral(0.0, 1.0), 0.5);
        assert_eq!(f.integral(0.0, 0.5), 0.125);
        let g = steps(&[0.0, 0.5, 1.0], &[0.0, 1.0]);
        assert_eq!(g.integral(0.25, 0.75), 0.25);
    }

    #[test]
    fn inverse_of_step_is_step() {
        // quantile of 0.3 d0 + 0.7 d1  <->  CDF-as-quantile of the flip
        let q = steps(&[0.0, 0.3, 1.0], &[0.0, 1.0]);
        let f = q.generalized_inverse(0.0, 1.0).unwrap();
        assert_eq!(f.knots(), &[0.0, 1.0]);
        assert_eq!(f.pieces()[0], Piece::constant(0.3));
        let back = f.generalized_inverse(0.0, 1.0).unwrap();
        assert_eq!(back, q);
    }

    #[test]
    fn inverse_of_linear() {
        let q = MonotonePl::new(vec![0.0, 1.0], vec![Piece::new(2.0, 4.0)]).unwrap();
        let f = q.generalized_inverse(2.0, 6.0).unwrap();
        assert_eq!(f.knots(), &[2.0, 6.0]);
        assert_eq!(f.pieces()[0], Piece::new(0.0, 0.25));
    }

    #[test]
    fn reflect_reverses() {
        let q = steps(&[0.0, 0.25, 1.0], &[0.0, 2.0]);
        let r = q.reflect(0.0);
        assert_eq!(r.knots(), &[0.0, 0.75, 1.0]);
        assert_eq!(r.pieces()[0].start, -2.0);
        assert_eq!(r.pieces()[1].start, 0.0);
        assert_eq!(r.reflect(0.0), q);
    }

    #[test]
    fn refinement_jumps() {
        let f = steps(&[0.0, 0.5, 1.0], &[0.0, 1.0]);
        let g = MonotonePl::new(vec![0.0, 0.25, 1.0], vec![Piece::new(0.0, 1.0), Piece::new(0.25, 1.0)]);
        let g = g.unwrap();
        let r = Refinement::of(&[&f, &g]).unwrap();
        assert_eq!(r.knots, vec![0.0, 0.5, 1.0]);
        assert_eq!(r.jump(0, 1), 1.0);
        assert_eq!(r.jump(1, 1), 0.0);
        assert_eq!(r.columns[1][1].start, 0.5);
    }

    #[test]
    fn lenient_clamps_roundoff() {
        let f = MonotonePl::new_lenient(
            vec![0.0, 0.5, 1.0],
            vec![Piece::new(0.0, 1.0), Piece::new(0.5 - 1e-17, 1.0)],
            1e-12,
        )
        .unwrap();
        assert_eq!(f.len(), 1);
        assert!(MonotonePl::new_lenient(
            vec![0.0, 0.5, 1.0],
            vec![Piece::constant(1.0), Piece::constant(0.0)],
            1e-12
        )
        .is_err());
    }
}
