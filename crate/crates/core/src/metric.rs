//! Wasserstein distances, geodesics and distances to Dirac masses.

use crate::error::{Error, Result};
use crate::measure::{DiscreteMeasure, Domain, Measure};
use crate::pl::{MonotonePl, Piece, Refinement};
use crate::quadrature::integrate;
use crate::scalar::{CompensatedSum, Scalar};

/// Point `s` on the displacement interpolation between two measures.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicPoint<T> {
    pub s: T,
    pub measure: Measure<T>,
}

/// One end of a [`MonotoneRange`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Endpoint<T> {
    Finite(T),
    Infinite,
}

/// Closed set of `s` for which `(1-s) F_mu^{-1} + s F_nu^{-1}` is monotone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonotoneRange<T> {
    pub lo: Endpoint<T>,
    pub hi: Endpoint<T>,
}

impl<T: Scalar> MonotoneRange<T> {
    pub fn contains(&self, s: T) -> bool {
        let above = match self.lo {
            Endpoint::Finite(lo) => s >= lo,
            Endpoint::Infinite => true,
        };
        let below = match self.hi {
            Endpoint::Finite(hi) => s <= hi,
            Endpoint::Infinite => true,
        };
        above && below
    }
}

fn check_p<T: Scalar>(p: T) -> Result<()> {
    if !(p >= T::one()) || !p.is_finite() {
        return Err(Error::InvalidP(p.to_f64_lossy()));
    }
    Ok(())
}

fn same_domain<T: Scalar>(mu: &Measure<T>, nu: &Measure<T>) -> Result<()> {
    if mu.domain() != nu.domain() {
        return Err(Error::DomainMismatch);
    }
    Ok(())
}

/// `int_0^w |e0 + (e1 - e0) t / w|^p dt` for an affine function with
/// endpoint values `e0`, `e1`.
pub(crate) fn abs_power_integral<T: Scalar>(e0: T, e1: T, w: T, p: T) -> T {
    if !(w > T::zero()) {
        return T::zero();
    }
    if e0 == e1 {
        return e0.abs().powf(p) * w;
    }
    let one = T::one();
    let two = one + one;
    let crosses = (e0 < T::zero() && e1 > T::zero()) || (e0 > T::zero() && e1 < T::zero());
    if crosses {
        let r = w * e0.abs() / (e0.abs() + e1.abs());
        return abs_power_integral(e0, T::zero(), r, p) + abs_power_integral(T::zero(), e1, w - r, p);
    }
    if p == one {
        return (e0.abs() + e1.abs()) / two * w;
    }
    if p == two {
        return (e0 * e0 + e0 * e1 + e1 * e1) / (two + one) * w;
    }
    let slope = (e1 - e0) / w;
    integrate(|t: T| (e0 + slope * t).abs().powf(p), T::zero(), w, T::tolerance(1e-13))
}

/// `(int_0^1 |F_mu^{-1} - F_nu^{-1}|^p)^{1/p}`.
pub fn wasserstein_distance<T: Scalar>(mu: &Measure<T>, nu: &Measure<T>, p: T) -> Result<T> {
    same_domain(mu, nu)?;
    check_p(p)?;
    Ok(lp_power(mu.quantile(), nu.quantile(), p).powf(T::one() / p))
}

/// `int |f - g|^p` over the common domain of two monotone functions.
pub(crate) fn lp_power<T: Scalar>(f: &MonotonePl<T>, g: &MonotonePl<T>, p: T) -> T {
    let r = Refinement::of(&[f, g]).expect("same domain");
    let mut acc = CompensatedSum::new();
    for i in 0..r.len() {
        let w = r.width(i);
        let (a, b) = (r.columns[0][i], r.columns[1][i]);
        let e0 = a.start - b.start;
        let e1 = if a.slope == b.slope { e0 } else { r.left_limit(0, i) - r.left_limit(1, i) };
        acc.add(abs_power_integral(e0, e1, w, p));
    }
    acc.value()
}

/// `d_{W_1}` computed on the CDF side, `int |F_mu - F_nu|`.
pub fn w1_cdf_side<T: Scalar>(mu: &Measure<T>, nu: &Measure<T>) -> Result<T> {
    same_domain(mu, nu)?;
    let (a0, b0) = mu.support();
    let (a1, b1) = nu.support();
    let lo = a0.min(a1);
    let hi = b0.max(b1);
    if !(hi > lo) {
        return Ok(T::zero());
    }
    let f = mu.cdf_window(lo, hi)?;
    let g = nu.cdf_window(lo, hi)?;
    Ok(lp_power(&f, &g, T::one()))
}

/// Cost of the monotone (north-west corner) coupling of sorted atom lists.
///
/// Works on atoms only and serves as an independent check of
/// [`wasserstein_distance`].
pub fn transport_lp_oracle<T: Scalar>(mu: &DiscreteMeasure<T>, nu: &DiscreteMeasure<T>, p: T) -> Result<T> {
    check_p(p)?;
    let (a, b) = (mu.atoms(), nu.atoms());
    let (mut i, mut j) = (0, 0);
    let (mut ra, mut rb) = (a[0].1, b[0].1);
    let mut cost = CompensatedSum::new();
    while i < a.len() && j < b.len() {
        let m = ra.min(rb);
        cost.add(m * (a[i].0 - b[j].0).abs().powf(p));
        ra = ra - m;
        rb = rb - m;
        if ra <= T::zero() {
            i += 1;
            if i < a.len() {
                ra = a[i].1;
            }
        }
        if rb <= T::zero() {
            j += 1;
            if j < b.len() {
                rb = b[j].1;
            }
        }
    }
    Ok(cost.value().powf(T::one() / p))
}

/// `d_{W_1}(mu, delta_t) = int_0^t F + int_t^1 (1 - F)` on `[0,1]`.
pub fn dist_to_dirac<T: Scalar>(mu: &Measure<T>, t: T) -> Result<T> {
    if mu.domain() != Domain::UnitInterval {
        return Err(Error::DomainMismatch);
    }
    if !(t >= T::zero() && t <= T::one()) {
        return Err(Error::PositionOutOfRange(t.to_f64_lossy()));
    }
    let f = mu.cdf_window(T::zero(), T::one())?;
    if f.is_empty() {
        // delta_0 viewed through the degenerate window [0, 0]
        return Ok(t);
    }
    let below = f.integral(T::zero(), t);
    let above = (T::one() - t) - f.integral(t, T::one());
    Ok(below + above)
}

/// `F_mu(t)` recovered from `d(mu, delta_t)` by a forward difference of step `h`.
pub fn cdf_from_dirac_distances<T: Scalar>(mu: &Measure<T>, t: T, h: T) -> Result<T> {
    if mu.domain() != Domain::UnitInterval {
        return Err(Error::DomainMismatch);
    }
    if !(t >= T::zero() && t < T::one() && h > T::zero() && t + h <= T::one()) {
        return Err(Error::StepOutOfRange { t: t.to_f64_lossy(), h: h.to_f64_lossy() });
    }
    let one = T::one();
    let d0 = wasserstein_distance(mu, &Measure::dirac(Domain::UnitInterval, t)?, one)?;
    let d1 = wasserstein_distance(mu, &Measure::dirac(Domain::UnitInterval, t + h)?, one)?;
    Ok(((d1 - d0) / h + one) / (one + one))
}

/// Interval of `s` keeping the affine combination of quantiles monotone.
pub fn monotone_range<T: Scalar>(mu: &Measure<T>, nu: &Measure<T>) -> MonotoneRange<T> {
    let r = Refinement::of(&[mu.quantile(), nu.quantile()]).expect("quantiles share [0,1)");
    let mut lo = Endpoint::Infinite;
    let mut hi = Endpoint::Infinite;
    // constraint c0 + s * c1 >= 0 with c0 = increment of mu, c0 + c1 = increment of nu
    let mut constrain = |c0: T, c1: T| {
        if c1 > T::zero() {
            let s = -c0 / c1;
            lo = match lo {
                Endpoint::Finite(v) if v >= s => Endpoint::Finite(v),
                _ => Endpoint::Finite(s),
            };
        } else if c1 < T::zero() {
            let s = c0 / -c1;
            hi = match hi {
                Endpoint::Finite(v) if v <= s => Endpoint::Finite(v),
                _ => Endpoint::Finite(s),
            };
        }
    };
    for i in 0..r.len() {
        let (a, b) = (r.columns[0][i].slope, r.columns[1][i].slope);
        constrain(a, b - a);
        if i > 0 {
            let (ja, jb) = (r.jump(0, i), r.jump(1, i));
            constrain(ja, jb - ja);
        }
    }
    MonotoneRange { lo, hi }
}

/// Measure with quantile `(1-s) F_mu^{-1} + s F_nu^{-1}`.
pub fn geodesic_point<T: Scalar>(mu: &Measure<T>, nu: &Measure<T>, s: T) -> Result<GeodesicPoint<T>> {
    same_domain(mu, nu)?;
    if s == T::zero() {
        return Ok(GeodesicPoint { s, measure: mu.clone() });
    }
    if s == T::one() {
        return Ok(GeodesicPoint { s, measure: nu.clone() });
    }
    let inside = s > T::zero() && s < T::one();
    if !inside && !monotone_range(mu, nu).contains(s) {
        return Err(Error::NotMonotone(s.to_f64_lossy()));
    }
    let r = Refinement::of(&[mu.quantile(), nu.quantile()])?;
    let (knots, pieces) = r.combine(&[T::one() - s, s]);
    let pieces: Vec<Piece<T>> = pieces;
    let measure = Measure::from_pl_lenient(mu.domain(), knots, pieces).map_err(|e| match e {
        Error::PositionOutOfRange(_) => Error::NotMonotone(s.to_f64_lossy()),
        other => other,
    })?;
    Ok(GeodesicPoint { s, measure })
}
