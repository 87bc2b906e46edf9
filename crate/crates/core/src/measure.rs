//! Probability measures with bounded support, stored through their quantile
//! functions.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::pl::{MonotonePl, Piece};
use crate::scalar::{CompensatedSum, Scalar};

/// Ambient space of a measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Domain {
    RealLine,
    UnitInterval,
}

/// Probability measure on the line or on `[0,1]`.
///
/// The quantile function is right-continuous and nondecreasing on the levels
/// `[0,1)`; discrete measures are exactly the piecewise-constant case.
/// Values are canonical, so `==` is equality of measures up to the exact
/// arithmetic used to build them.
#[derive(Debug, Clone, PartialEq)]
pub struct Measure<T> {
    domain: Domain,
    quantile: MonotonePl<T>,
}

/// Finite list of atoms with strictly increasing positions.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure<T> {
    domain: Domain,
    atoms: Vec<(T, T)>,
}

/// Chart `(x, sigma, p)` on measures with at most two atoms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPointParam<T> {
    pub x: T,
    pub sigma: T,
    pub p: T,
}

const WEIGHT_SUM_TOL: f64 = 1e-9;

fn lenient_tol<T: Scalar>() -> T {
    T::tolerance(1e-12)
}

impl<T: Scalar> Measure<T> {
    /// Builds a discrete measure; equal positions are merged and weights
    /// within `1e-9` of total mass one are renormalized.
    pub fn from_atoms(domain: Domain, atoms: &[(T, T)]) -> Result<Self> {
        Ok(DiscreteMeasure::new(domain, atoms)?.to_measure())
    }

    pub fn dirac(domain: Domain, at: T) -> Result<Self> {
        Self::from_atoms(domain, &[(at, T::one())])
    }

    /// Uniform measure on `[a, b]`, `a < b`.
    pub fn uniform(domain: Domain, a: T, b: T) -> Result<Self> {
        if !(a < b) {
            return Err(Error::ParameterOutOfRange("uniform needs a < b".into()));
        }
        Self::from_quantile(domain, vec![T::zero(), T::one()], vec![(a, b - a)])
    }

    /// Builds a measure from breakpoints `0 = u_0 < ... < u_m = 1` and one
    /// `(intercept, slope)` segment per interval.
    pub fn from_quantile(domain: Domain, breaks: Vec<T>, segments: Vec<(T, T)>) -> Result<Self> {
        if breaks.first() != Some(&T::zero()) || breaks.last() != Some(&T::one()) {
            return Err(Error::InvalidRepresentation("breakpoints must run from 0 to 1".into()));
        }
        let pieces = segments.into_iter().map(|(a, b)| Piece::new(a, b)).collect();
        let quantile = MonotonePl::new(breaks, pieces)?;
        Self::from_pl(domain, quantile)
    }

    /// Wraps a quantile function on `[0,1)`, checking the domain.
    pub fn from_pl(domain: Domain, quantile: MonotonePl<T>) -> Result<Self> {
        if quantile.is_empty() || quantile.lo() != T::zero() || quantile.hi() != T::one() {
            return Err(Error::InvalidRepresentation("quantile must live on [0,1)".into()));
        }
        if domain == Domain::UnitInterval {
            let (lo, hi) = (quantile.first_value(), quantile.last_value());
            if lo < T::zero() {
                return Err(Error::PositionOutOfRange(lo.to_f64_lossy()));
            }
            if hi > T::one() {
                return Err(Error::PositionOutOfRange(hi.to_f64_lossy()));
            }
        }
        Ok(Self { domain, quantile })
    }

    /// Like [`Measure::from_pl`] for arithmetic results: rounding that pushes
    /// a unit-interval measure marginally outside `[0,1]` is clamped.
    pub(crate) fn from_pl_lenient(domain: Domain, knots: Vec<T>, pieces: Vec<Piece<T>>) -> Result<Self> {
        let mut pieces = pieces;
        if domain == Domain::UnitInterval {
            let tol = lenient_tol::<T>();
            for (i, p) in pieces.iter_mut().enumerate() {
                let w = knots[i + 1] - knots[i];
                let end = p.at(w);
                if p.start < T::zero() && p.start > -tol {
                    let slope = if p.slope > T::zero() { end / w } else { T::zero() };
                    *p = Piece::new(T::zero(), slope.max(T::zero()));
                }
                if end > T::one() && end < T::one() + tol {
                    let slope = if p.slope > T::zero() { (T::one() - p.start) / w } else { T::zero() };
                    *p = Piece::new(p.start.min(T::one()), slope.max(T::zero()));
                }
            }
        }
        let quantile = MonotonePl::new_lenient(knots, pieces, lenient_tol())?;
        Self::from_pl(domain, quantile)
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn quantile(&self) -> &MonotonePl<T> {
        &self.quantile
    }

    /// Breakpoints `u_0 = 0 < ... < u_m = 1`.
    pub fn breaks(&self) -> &[T] {
        self.quantile.knots()
    }

    /// `(intercept, slope)` per interval.
    pub fn segments(&self) -> Vec<(T, T)> {
        self.quantile.pieces().iter().map(|p| (p.start, p.slope)).collect()
    }

    pub fn is_discrete(&self) -> bool {
        self.quantile.is_all_constant()
    }

    pub fn is_dirac(&self) -> bool {
        self.quantile.len() == 1 && self.is_discrete()
    }

    /// Atoms when the measure is discrete.
    pub fn atoms(&self) -> Option<Vec<(T, T)>> {
        if !self.is_discrete() {
            return None;
        }
        let k = self.quantile.knots();
        Some(self.quantile.pieces().iter().enumerate().map(|(i, p)| (p.start, k[i + 1] - k[i])).collect())
    }

    pub fn to_discrete(&self) -> Option<DiscreteMeasure<T>> {
        self.atoms().map(|atoms| DiscreteMeasure { domain: self.domain, atoms })
    }

    /// Smallest and largest point of the support.
    pub fn support(&self) -> (T, T) {
        (self.quantile.first_value(), self.quantile.last_value())
    }

    /// `F^{-1}(y)` for `0 < y < 1`, right-continuous.
    pub fn quantile_eval(&self, y: T) -> Result<T> {
        if !(y > T::zero() && y < T::one()) {
            return Err(Error::LevelOutOfRange(y.to_f64_lossy()));
        }
        Ok(self.quantile.eval(y))
    }

    /// Left limit `F^{-1}(y-)` for `0 < y <= 1`.
    pub fn quantile_eval_left(&self, y: T) -> T {
        self.quantile.eval_left(y)
    }

    /// `F(x) = mu((-inf, x])`.
    pub fn cdf_eval(&self, x: T) -> T {
        let q = &self.quantile;
        let pieces = q.pieces();
        let j = pieces.partition_point(|p| p.start <= x);
        if j == 0 {
            return T::zero();
        }
        let i = j - 1;
        let k = q.knots();
        let p = pieces[i];
        if p.slope == T::zero() || x >= q.left_limit(i) {
            return k[i + 1];
        }
        (k[i] + (x - p.start) / p.slope).min(k[i + 1])
    }

    /// `F(x-) = mu((-inf, x))`.
    pub fn cdf_eval_left(&self, x: T) -> T {
        let q = &self.quantile;
        let pieces = q.pieces();
        let k = q.knots();
        // first level whose quantile reaches x
        for (i, p) in pieces.iter().enumerate() {
            let end = q.left_limit(i);
            if end < x {
                continue;
            }
            if p.start >= x {
                return k[i];
            }
            return (k[i] + (x - p.start) / p.slope).min(k[i + 1]);
        }
        T::one()
    }

    /// CDF restricted to the window `[lo, hi)`, which must contain the support
    /// (`hi` strictly above it). For a Dirac mass and `lo == hi` the result is a
    /// single point.
    pub fn cdf_window(&self, lo: T, hi: T) -> Result<MonotonePl<T>> {
        let (a, b) = self.support();
        if lo > a || hi < b {
            return Err(Error::InvalidRepresentation("CDF window must cover the support".into()));
        }
        self.quantile.generalized_inverse(lo, hi)
    }

    /// CDF on the smallest window `[min supp, max supp)`.
    pub fn cdf(&self) -> MonotonePl<T> {
        let (a, b) = self.support();
        self.quantile.generalized_inverse(a, b).expect("support window is valid")
    }

    /// Measure whose CDF is `cdf` on its window, `0` before it and `1` after.
    pub fn from_cdf(domain: Domain, cdf: &MonotonePl<T>) -> Result<Self> {
        if cdf.is_empty() {
            return Self::dirac(domain, cdf.lo());
        }
        let q = cdf.generalized_inverse(T::zero(), T::one())?;
        Self::from_pl(domain, q)
    }

    /// Center of mass `int_0^1 F^{-1}`.
    pub fn barycenter(&self) -> T {
        self.quantile.integral(T::zero(), T::one())
    }

    /// Measure with CDF equal to this quantile function on `[0,1]`.
    pub fn flip(&self) -> Result<Self> {
        if self.domain != Domain::UnitInterval {
            return Err(Error::DomainMismatch);
        }
        let cdf = self.quantile.generalized_inverse(T::zero(), T::one())?;
        Self::from_pl(Domain::UnitInterval, cdf)
    }

    /// Push-forward by `x -> orientation * x + offset`.
    pub fn pushforward_affine(&self, orientation: i8, offset: T) -> Result<Self> {
        let bad = || Error::InvalidIntervalIsometry { orientation, offset: offset.to_f64_lossy() };
        let q = match orientation {
            1 => {
                if self.domain == Domain::UnitInterval && offset != T::zero() {
                    return Err(bad());
                }
                self.quantile.scale_values(T::one(), offset)
            }
            -1 => {
                if self.domain == Domain::UnitInterval && offset != T::one() {
                    return Err(bad());
                }
                self.quantile.reflect(offset)
            }
            _ => return Err(bad()),
        };
        Self::from_pl(self.domain, q)
    }

    /// Same measure viewed in another domain.
    pub fn with_domain(&self, domain: Domain) -> Result<Self> {
        Self::from_pl(domain, self.quantile.clone())
    }
}

impl<T: Scalar> DiscreteMeasure<T> {
    /// Sorts, merges and normalizes atoms.
    pub fn new(domain: Domain, atoms: &[(T, T)]) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::WeightSumOutOfTolerance(0.0));
        }
        let mut total = CompensatedSum::new();
        for &(x, w) in atoms {
            if !(w > T::zero()) || !w.is_finite() {
                return Err(Error::NonPositiveWeight(w.to_f64_lossy()));
            }
            if !x.is_finite() {
                return Err(Error::InvalidRepresentation("non-finite position".into()));
            }
            if domain == Domain::UnitInterval && (x < T::zero() || x > T::one()) {
                return Err(Error::PositionOutOfRange(x.to_f64_lossy()));
            }
            total.add(w);
        }
        let total = total.value();
        if (total - T::one()).abs() > T::tolerance(WEIGHT_SUM_TOL) {
            return Err(Error::WeightSumOutOfTolerance(total.to_f64_lossy()));
        }
        let mut sorted = atoms.to_vec();
        sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal));
        let mut merged: Vec<(T, T)> = Vec::with_capacity(sorted.len());
        for (x, w) in sorted {
            match merged.last_mut() {
                Some(last) if last.0 == x => last.1 = last.1 + w,
                _ => merged.push((x, w)),
            }
        }
        if total != T::one() {
            for a in &mut merged {
                a.1 = a.1 / total;
            }
        }
        Ok(Self { domain, atoms: merged })
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn atoms(&self) -> &[(T, T)] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Piecewise-constant quantile with breakpoints at cumulative weights.
    pub fn to_measure(&self) -> Measure<T> {
        let mut knots = Vec::with_capacity(self.atoms.len() + 1);
        knots.push(T::zero());
        let mut acc = CompensatedSum::new();
        for (i, &(_, w)) in self.atoms.iter().enumerate() {
            acc.add(w);
            let level = if i + 1 == self.atoms.len() { T::one() } else { acc.value().min(T::one()) };
            knots.push(level);
        }
        let pieces = self.atoms.iter().map(|&(x, _)| Piece::constant(x)).collect();
        let quantile = MonotonePl::new_lenient(knots, pieces, lenient_tol()).expect("sorted atoms are monotone");
        Measure { domain: self.domain, quantile }
    }
}

impl<T: Scalar> TwoPointParam<T> {
    pub fn new(x: T, sigma: T, p: T) -> Result<Self> {
        if sigma < T::zero() || !sigma.is_finite() || !x.is_finite() || !p.is_finite() {
            return Err(Error::ParameterOutOfRange("need finite x, p and sigma >= 0".into()));
        }
        Ok(Self { x, sigma, p })
    }

    /// Weight of the left atom, `e^{-p} / (e^p + e^{-p})`.
    pub fn left_weight(&self) -> T {
        T::one() / (T::one() + (self.p + self.p).exp())
    }

    /// `(x - sigma e^p, x + sigma e^{-p})`.
    pub fn positions(&self) -> (T, T) {
        (self.x - self.sigma * self.p.exp(), self.x + self.sigma * (-self.p).exp())
    }

    pub fn to_discrete(&self) -> Result<DiscreteMeasure<T>> {
        if self.sigma == T::zero() {
            return DiscreteMeasure::new(Domain::RealLine, &[(self.x, T::one())]);
        }
        let wl = self.left_weight();
        let wr = T::one() / (T::one() + (-(self.p + self.p)).exp());
        let (l, r) = self.positions();
        if !(l < r) {
            return DiscreteMeasure::new(Domain::RealLine, &[(self.x, T::one())]);
        }
        DiscreteMeasure::new(Domain::RealLine, &[(l, wl), (r, wr)])
    }

    /// Inverse chart; a Dirac mass gets `sigma = p = 0`.
    pub fn from_discrete(mu: &DiscreteMeasure<T>) -> Result<Self> {
        match *mu.atoms() {
            [(x, _)] => Ok(Self { x, sigma: T::zero(), p: T::zero() }),
            [(l, wl), (r, wr)] => {
                let p = (wr / wl).ln() * T::lit(0.5);
                let sigma = (r - l) / (p.exp() + (-p).exp());
                let x = l + sigma * p.exp();
                Ok(Self { x, sigma, p })
            }
            ref atoms => Err(Error::TooManyAtoms(atoms.len())),
        }
    }
}

pub fn two_point_from_param<T: Scalar>(tp: &TwoPointParam<T>) -> Result<DiscreteMeasure<T>> {
    tp.to_discrete()
}

pub fn param_from_two_point<T: Scalar>(mu: &DiscreteMeasure<T>) -> Result<TwoPointParam<T>> {
    TwoPointParam::from_discrete(mu)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn real(atoms: &[(f64, f64)]) -> Measure<f64> {
        Measure::from_atoms(Domain::RealLine, atoms).unwrap()
    }

    fn unit(atoms: &[(f64, f64)]) -> Measure<f64> {
        Measure::from_atoms(Domain::UnitInterval, atoms).unwrap()
    }

    #[test]
    fn from_atoms_merges_and_sorts() {
        let m = real(&[(1.0, 0.25), (1.0, 0.25), (0.0, 0.5)]);
        assert_eq!(m.atoms().unwrap(), vec![(0.0, 0.5), (1.0, 0.5)]);
        assert_eq!(m.breaks(), &[0.0, 0.5, 1.0]);
    }

    #[test]
    fn from_atoms_rejects_bad_weights() {
        assert_eq!(
            Measure::<f64>::from_atoms(Domain::RealLine, &[(0.0, 0.0), (1.0, 1.0)]),
            Err(Error::NonPositiveWeight(0.0))
        );
        assert!(matches!(
            Measure::<f64>::from_atoms(Domain::RealLine, &[(0.0, 0.5), (1.0, 0.6)]),
            Err(Error::WeightSumOutOfTolerance(_))
        ));
        let near = real(&[(0.0, 0.5), (1.0, 0.5 + 5e-10)]);
        assert_eq!(near.breaks().last(), Some(&1.0));
    }

    #[test]
    fn quantile_conventions() {
        let d = real(&[(3.0, 1.0)]);
        assert_eq!(d.quantile_eval(0.7).unwrap(), 3.0);
        let two = real(&[(0.0, 0.5), (1.0, 0.5)]);
        assert_eq!(two.quantile_eval(0.5).unwrap(), 1.0);
        assert_eq!(two.quantile_eval(0.25).unwrap(), 0.0);
        let u = Measure::uniform(Domain::UnitInterval, 0.0, 1.0).unwrap();
        assert_eq!(u.quantile_eval(0.25).unwrap(), 0.25);
        assert!(matches!(u.quantile_eval(0.0), Err(Error::LevelOutOfRange(_))));
        assert!(matches!(u.quantile_eval(1.0), Err(Error::LevelOutOfRange(_))));
    }

    #[test]
    fn cdf_conventions() {
        let d = real(&[(3.0, 1.0)]);
        assert_eq!(d.cdf_eval(3.0), 1.0);
        assert_eq!(d.cdf_eval(2.999), 0.0);
        assert_eq!(d.cdf_eval_left(3.0), 0.0);
        let two = real(&[(0.0, 0.5), (1.0, 0.5)]);
        assert_eq!(two.cdf_eval(0.0), 0.5);
        assert_eq!(two.cdf_eval(0.7), 0.5);
        assert_eq!(two.cdf_eval_left(1.0), 0.5);
        let u = Measure::uniform(Domain::UnitInterval, 0.0, 1.0).unwrap();
        assert_eq!(u.cdf_eval(0.25), 0.25);
        assert_eq!(u.cdf_eval(-1.0), 0.0);
        assert_eq!(u.cdf_eval(2.0), 1.0);
    }

    #[test]
    fn cdf_window_matches_pointwise() {
        let m = Measure::from_quantile(
            Domain::RealLine,
            vec![0.0, 0.2, 0.7, 1.0],
            vec![(-1.0, 2.0), (0.5, 0.0), (1.0, 4.0)],
        )
        .unwrap();
        let f = m.cdf_window(-2.0, 3.0).unwrap();
        for i in 0..=500 {
            let x = -2.0 + 5.0 * i as f64 / 500.0;
            assert_abs_diff_eq!(f.eval(x.min(2.9999)), m.cdf_eval(x.min(2.9999)), epsilon = 1e-14);
        }
    }

    #[test]
    fn barycenter_values() {
        assert_eq!(real(&[(2.5, 1.0)]).barycenter(), 2.5);
        assert_eq!(real(&[(-1.0, 0.5), (1.0, 0.5)]).barycenter(), 0.0);
        let tp = TwoPointParam::new(0.0, 1.0, 1.0).unwrap().to_discrete().unwrap();
        let direct: f64 = tp.atoms().iter().map(|&(x, w)| x * w).sum();
        assert_abs_diff_eq!(tp.to_measure().barycenter(), direct, epsilon = 1e-15);
        assert_abs_diff_eq!(direct, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn flip_examples() {
        let d = unit(&[(0.3, 1.0)]);
        assert_eq!(d.flip().unwrap().atoms().unwrap(), vec![(0.0, 0.3), (1.0, 0.7)]);
        let u = Measure::uniform(Domain::UnitInterval, 0.0, 1.0).unwrap();
        assert_eq!(u.flip().unwrap(), u);
        let m = unit(&[(0.0, 0.2), (0.4, 0.5), (1.0, 0.3)]);
        assert_eq!(m.flip().unwrap().flip().unwrap(), m);
        assert_eq!(real(&[(0.0, 1.0)]).flip(), Err(Error::DomainMismatch));
    }

    #[test]
    fn pushforward_examples() {
        let d = unit(&[(0.25, 1.0)]);
        assert_eq!(d.pushforward_affine(-1, 1.0).unwrap(), unit(&[(0.75, 1.0)]));
        let two = real(&[(0.0, 0.5), (1.0, 0.5)]);
        assert_eq!(two.pushforward_affine(1, 5.0).unwrap(), real(&[(5.0, 0.5), (6.0, 0.5)]));
        let m = real(&[(0.0, 0.3), (2.0, 0.7)]);
        let r = m.pushforward_affine(-1, 0.0).unwrap().atoms().unwrap();
        assert_eq!((r[0].0, r[1].0), (-2.0, 0.0));
        assert_abs_diff_eq!(r[0].1, 0.7, epsilon = 1e-15);
        assert_abs_diff_eq!(r[1].1, 0.3, epsilon = 1e-15);
        assert_eq!(m.pushforward_affine(1, 0.0).unwrap(), m);
        assert!(matches!(d.pushforward_affine(1, 0.5), Err(Error::InvalidIntervalIsometry { .. })));
    }

    #[test]
    fn two_point_chart() {
        let m = TwoPointParam::new(0.0, 1.0, 0.0).unwrap().to_discrete().unwrap();
        assert_eq!(m.atoms(), &[(-1.0, 0.5), (1.0, 0.5)]);
        let d = TwoPointParam::new(0.0, 0.0, 3.0).unwrap().to_discrete().unwrap();
        assert_eq!(d.atoms(), &[(0.0, 1.0)]);
        let back = TwoPointParam::from_discrete(&d).unwrap();
        assert_eq!((back.sigma, back.p), (0.0, 0.0));

        // 1/4 d_{-3} + 3/4 d_1: p = ln(3)/2, sigma e^p = 3 + x, sigma e^{-p} = 1 - x
        let q = DiscreteMeasure::new(Domain::RealLine, &[(-3.0, 0.25), (1.0, 0.75)]).unwrap();
        let tp = TwoPointParam::from_discrete(&q).unwrap();
        assert_abs_diff_eq!(tp.p, 0.5 * 3f64.ln(), epsilon = 1e-15);
        let x = tp.x;
        assert_abs_diff_eq!(tp.sigma * tp.p.exp(), x + 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(tp.sigma * (-tp.p).exp(), 1.0 - x, epsilon = 1e-14);
        let again = tp.to_discrete().unwrap();
        for (a, b) in again.atoms().iter().zip(q.atoms()) {
            assert_abs_diff_eq!(a.0, b.0, epsilon = 1e-14);
            assert_abs_diff_eq!(a.1, b.1, epsilon = 1e-15);
        }
        let three = DiscreteMeasure::new(Domain::RealLine, &[(0.0, 0.2), (1.0, 0.3), (2.0, 0.5)]).unwrap();
        assert_eq!(TwoPointParam::from_discrete(&three), Err(Error::TooManyAtoms(3)));
    }

    #[test]
    fn unit_domain_range_checked() {
        assert!(matches!(
            Measure::<f64>::from_atoms(Domain::UnitInterval, &[(1.5, 1.0)]),
            Err(Error::PositionOutOfRange(_))
        ));
        assert!(Measure::<f64>::uniform(Domain::UnitInterval, 0.5, 1.5).is_err());
    }

    #[test]
    fn single_precision_works() {
        let m = Measure::<f32>::from_atoms(Domain::UnitInterval, &[(0.25, 0.5), (0.75, 0.5)]).unwrap();
        assert_eq!(m.barycenter(), 0.5f32);
        assert_eq!(m.flip().unwrap().flip().unwrap(), m);
    }
}
