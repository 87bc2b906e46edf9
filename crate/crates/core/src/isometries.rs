//! Isometries and isometric embeddings of Wasserstein spaces on the line.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::measure::{DiscreteMeasure, Domain, Measure};
use crate::metric::wasserstein_distance;
use crate::pl::{MonotonePl, Piece, Refinement};
use crate::report::{Record, VerificationReport};
use crate::sampling::{random_discrete_real, random_discrete_unit, trial_rng};
use crate::scalar::{CompensatedSum, Scalar};

/// Largest supported `|q|` for the exotic flow.
pub const Q_MAX: f64 = 30.0;

/// Tolerance used by [`verify_isometry`].
pub const ISOMETRY_TOL: f64 = 1e-9;

/// Symbolic description of a map on measures.
#[derive(Debug, Clone, PartialEq)]
pub enum IsometryDescriptor<T> {
    /// Push-forward by `x -> orientation * x + offset`.
    Trivial { orientation: i8, offset: T },
    /// CDF and quantile exchanged (on `[0,1]`).
    Flip,
    /// Quantile addition `F^{-1}_mu + F^{-1}_nu`.
    Translation { nu: Measure<T> },
    /// Reflection of each measure through its own barycenter.
    BarycentricReflection,
    /// Exotic flow of `W_2(R)` at time `q`.
    Exotic { q: T },
    /// Composition, applied right to left.
    Compose(Vec<IsometryDescriptor<T>>),
}

/// Orders `p` for which a descriptor is a distance-preserving map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PScope {
    Any,
    Only(f64),
    Empty,
}

impl PScope {
    fn meet(self, other: PScope) -> PScope {
        match (self, other) {
            (PScope::Any, x) | (x, PScope::Any) => x,
            (PScope::Only(a), PScope::Only(b)) if a == b => PScope::Only(a),
            _ => PScope::Empty,
        }
    }

    pub fn admits(self, p: f64) -> bool {
        match self {
            PScope::Any => true,
            PScope::Only(q) => q == p,
            PScope::Empty => false,
        }
    }
}

/// Domains a descriptor applies to and the orders it preserves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scope {
    pub real_line: bool,
    pub unit_interval: bool,
    pub p: PScope,
}

impl Scope {
    pub fn admits_domain(&self, d: Domain) -> bool {
        match d {
            Domain::RealLine => self.real_line,
            Domain::UnitInterval => self.unit_interval,
        }
    }

    fn meet(self, other: Scope) -> Scope {
        Scope {
            real_line: self.real_line && other.real_line,
            unit_interval: self.unit_interval && other.unit_interval,
            p: self.p.meet(other.p),
        }
    }
}

fn is_interval_isometry<T: Scalar>(orientation: i8, offset: T) -> bool {
    (orientation == 1 && offset == T::zero()) || (orientation == -1 && offset == T::one())
}

impl<T: Scalar> IsometryDescriptor<T> {
    pub fn name(&self) -> String {
        match self {
            Self::Trivial { orientation, offset } => format!("trivial({orientation},{offset})"),
            Self::Flip => "flip".into(),
            Self::Translation { .. } => "translation".into(),
            Self::BarycentricReflection => "barycentric_reflection".into(),
            Self::Exotic { q } => format!("exotic({q})"),
            Self::Compose(items) => {
                let names: Vec<String> = items.iter().map(|d| d.name()).collect();
                format!("compose({})", names.join(","))
            }
        }
    }

    pub fn scope(&self) -> Scope {
        let real_only = |p| Scope { real_line: true, unit_interval: false, p };
        match self {
            Self::Trivial { orientation, offset } => {
                let valid = *orientation == 1 || *orientation == -1;
                Scope {
                    real_line: valid,
                    unit_interval: is_interval_isometry(*orientation, *offset),
                    p: PScope::Any,
                }
            }
            Self::Flip => Scope { real_line: false, unit_interval: true, p: PScope::Only(1.0) },
            Self::Translation { nu } => Scope {
                real_line: nu.domain() == Domain::RealLine,
                unit_interval: false,
                p: PScope::Any,
            },
            Self::BarycentricReflection => real_only(PScope::Only(2.0)),
            Self::Exotic { .. } => real_only(PScope::Only(2.0)),
            Self::Compose(items) => items.iter().fold(
                Scope { real_line: true, unit_interval: true, p: PScope::Any },
                |acc, d| acc.meet(d.scope()),
            ),
        }
    }

    /// Bijective on its domain.
    pub fn is_bijective(&self) -> bool {
        match self {
            Self::Translation { nu } => nu.is_dirac(),
            Self::Compose(items) => items.iter().all(|d| d.is_bijective()),
            _ => true,
        }
    }

    /// Image of `mu`; errors when `mu` lies outside the descriptor's domain.
    pub fn apply(&self, mu: &Measure<T>) -> Result<Measure<T>> {
        if !self.scope().admits_domain(mu.domain()) {
            return Err(Error::ScopeMismatch(format!("{} on a {:?} measure", self.name(), mu.domain())));
        }
        match self {
            Self::Trivial { orientation, offset } => mu.pushforward_affine(*orientation, *offset),
            Self::Flip => mu.flip(),
            Self::Translation { nu } => translate(mu, nu),
            Self::BarycentricReflection => {
                let m = mu.barycenter();
                mu.pushforward_affine(-1, m + m)
            }
            Self::Exotic { q } => {
                let d = mu.to_discrete().ok_or_else(|| {
                    Error::ScopeMismatch("exotic flow is exact on discrete measures only; sample it with exotic_apply_grid".into())
                })?;
                Ok(exotic_apply_discrete(&d, *q)?.to_measure())
            }
            Self::Compose(items) => {
                let mut cur = mu.clone();
                for d in items.iter().rev() {
                    cur = d.apply(&cur)?;
                }
                Ok(cur)
            }
        }
    }
}

/// Measure with quantile `F^{-1}_mu + F^{-1}_nu`.
pub fn translate<T: Scalar>(mu: &Measure<T>, nu: &Measure<T>) -> Result<Measure<T>> {
    if mu.domain() != Domain::RealLine || nu.domain() != Domain::RealLine {
        return Err(Error::DomainMismatch);
    }
    let r = Refinement::of(&[mu.quantile(), nu.quantile()])?;
    let (knots, pieces) = r.combine(&[T::one(), T::one()]);
    Measure::from_pl_lenient(Domain::RealLine, knots, pieces)
}

fn check_q<T: Scalar>(q: T) -> Result<()> {
    if !q.is_finite() || q.abs() > T::lit(Q_MAX) {
        return Err(Error::QOutOfRange(q.to_f64_lossy()));
    }
    Ok(())
}

fn check_level<T: Scalar>(x: T) -> Result<()> {
    if !(x > T::zero() && x < T::one()) {
        return Err(Error::LevelOutOfRange(x.to_f64_lossy()));
    }
    Ok(())
}

/// `h_q(x) = x e^{2q} / (1 + (e^{2q} - 1) x)` without range checks; valid on `[0,1]`.
pub fn h_q<T: Scalar>(x: T, q: T) -> T {
    let two_q = q + q;
    x * two_q.exp() / (T::one() + two_q.exp_m1() * x)
}

pub fn h_q_eval<T: Scalar>(x: T, q: T) -> Result<T> {
    check_level(x)?;
    check_q(q)?;
    Ok(h_q(x, q))
}

pub fn h_q_inverse<T: Scalar>(y: T, q: T) -> Result<T> {
    check_level(y)?;
    check_q(q)?;
    Ok(h_q(y, -q))
}

/// Exotic flow on a discrete measure of the line.
///
/// With levels `c_k`, values `v_k` and weights `w_k`, the quantile of the
/// image is constant on `[h_{-q}(c_{k-1}), h_{-q}(c_k))` with value
/// `v_k + (1 - e^q) sum_j w_j (v_j - v_k) + (e^q - e^{-q}) sum_{j<k} w_j (v_j - v_k)`.
/// The terms involving `h_q` in the pointwise formula cancel on each
/// constant piece.
pub fn exotic_apply_discrete<T: Scalar>(mu: &DiscreteMeasure<T>, q: T) -> Result<DiscreteMeasure<T>> {
    check_q(q)?;
    if mu.domain() != Domain::RealLine {
        return Err(Error::ScopeMismatch("exotic flow acts on measures of the line".into()));
    }
    let atoms = mu.atoms();
    if q == T::zero() || atoms.len() == 1 {
        return Ok(mu.clone());
    }
    let a = -q.exp_m1();
    let b = q.exp() - (-q).exp();
    let e = (-(q + q)).exp();
    let em1 = (-(q + q)).exp_m1();
    let mut level = CompensatedSum::new();
    let mut out = Vec::with_capacity(atoms.len());
    for (k, &(vk, wk)) in atoms.iter().enumerate() {
        let mut total = CompensatedSum::new();
        let mut below = CompensatedSum::new();
        for (j, &(vj, wj)) in atoms.iter().enumerate() {
            let t = wj * (vj - vk);
            total.add(t);
            if j < k {
                below.add(t);
            }
        }
        let value = vk + a * total.value() + b * below.value();
        let c0 = level.value();
        level.add(wk);
        let c1 = if k + 1 == atoms.len() { T::one() } else { level.value() };
        // h_{-q}(c1) - h_{-q}(c0) without cancellation
        let weight = e * wk / ((T::one() + em1 * c1) * (T::one() + em1 * c0));
        out.push((value, weight));
    }
    for w in out.windows(2) {
        if w[1].0 < w[0].0 {
            let gap = w[0].0 - w[1].0;
            if gap > T::tolerance(1e-12) * (T::one() + w[0].0.abs()) {
                return Err(Error::InvalidRepresentation("exotic image not monotone".into()));
            }
        }
    }
    for i in 1..out.len() {
        if out[i].0 < out[i - 1].0 {
            out[i].0 = out[i - 1].0;
        }
    }
    DiscreteMeasure::new(Domain::RealLine, &out)
}

/// Pointwise exotic formula at level `x`:
/// `(1-e^q) m + (e^q + (e^{-q} - e^q) h) F^{-1}(h) + (e^q - e^{-q}) int_0^h F^{-1}`
/// with `h = h_q(x)`.
pub fn exotic_eval_level<T: Scalar>(mu: &Measure<T>, q: T, x: T) -> Result<T> {
    check_q(q)?;
    check_level(x)?;
    let h = h_q(x, q);
    let (eq, emq) = (q.exp(), (-q).exp());
    let m = mu.barycenter();
    let qh = mu.quantile().eval(h);
    let prefix = mu.quantile().integral(T::zero(), h);
    Ok((T::one() - eq) * m + (eq + (emq - eq) * h) * qh + (eq - emq) * prefix)
}

/// Exotic image sampled at the midpoint levels `(i + 1/2) / grid_size`.
pub fn exotic_apply_grid<T: Scalar>(mu: &Measure<T>, q: T, grid_size: usize) -> Result<Vec<(T, T)>> {
    if grid_size < 2 {
        return Err(Error::GridTooSmall);
    }
    if mu.domain() != Domain::RealLine {
        return Err(Error::ScopeMismatch("exotic flow acts on measures of the line".into()));
    }
    let n = T::lit(grid_size as f64);
    (0..grid_size)
        .map(|i| {
            let x = (T::lit(i as f64) + T::lit(0.5)) / n;
            exotic_eval_level(mu, q, x).map(|v| (x, v))
        })
        .collect()
}

/// Embedding of `W_1(R)` that squeezes a measure into `(-inf,-1) u [1,inf)`
/// and prescribes the CDF `E` on `[-1,1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitEmbedding<T> {
    e: MonotonePl<T>,
}

impl<T: Scalar> SplitEmbedding<T> {
    /// `e` must live on `[-1,1)` with values in `[1/3, 2/3]`.
    pub fn new(e: MonotonePl<T>) -> Result<Self> {
        let third = T::one() / T::lit(3.0);
        if e.is_empty() || e.lo() != -T::one() || e.hi() != T::one() {
            return Err(Error::InvalidRepresentation("E must be defined on [-1,1)".into()));
        }
        if e.first_value() < third || e.last_value() > T::one() - third {
            return Err(Error::InvalidRepresentation("E must take values in [1/3, 2/3]".into()));
        }
        Ok(Self { e })
    }

    /// `E = 3/8 + (x+1)/16` on `[-1,0)` and `1/2 + x/8` on `[0,1)`.
    pub fn standard() -> Self {
        let l = |x: f64| T::lit(x);
        let e = MonotonePl::new(
            vec![l(-1.0), l(0.0), l(1.0)],
            vec![Piece::new(l(0.375), l(0.0625)), Piece::new(l(0.5), l(0.125))],
        )
        .expect("valid E");
        Self { e }
    }

    pub fn e(&self) -> &MonotonePl<T> {
        &self.e
    }

    /// CDF of the image at `x`, straight from the defining formula.
    pub fn cdf_eval(&self, mu: &Measure<T>, x: T) -> T {
        let three = T::lit(3.0);
        if x < -T::one() {
            mu.cdf_eval((x + T::one()) / three) / three
        } else if x < T::one() {
            self.e.eval(x)
        } else {
            (T::lit(2.0) + mu.cdf_eval((x - T::one()) / three)) / three
        }
    }

    /// Image measure in quantile form: `3 F^{-1}(3y) - 1` on levels below
    /// `F(0-)/3`, the generalized inverse of `E` in between, and
    /// `3 F^{-1}(3y - 2) + 1` on levels from `(2 + F(0))/3`.
    pub fn apply(&self, mu: &Measure<T>) -> Result<Measure<T>> {
        if mu.domain() != Domain::RealLine {
            return Err(Error::DomainMismatch);
        }
        let three = T::lit(3.0);
        let f_left = mu.cdf_eval_left(T::zero());
        let f_right = mu.cdf_eval(T::zero());
        let q = mu.quantile();
        let mut parts = Vec::with_capacity(3);
        let a = f_left / three;
        let b = (f_right + T::lit(2.0)) / three;
        if f_left > T::zero() {
            let left = q.restrict(T::zero(), f_left)?.rescale_domain(three, T::zero()).scale_values(three, -T::one());
            // 3 F^{-1} - 1 stays below -1; settle the rounding first, then cap
            let left = MonotonePl::new_lenient(left.knots().to_vec(), left.pieces().to_vec(), T::tolerance(1e-12))?;
            parts.push(left.cap_values(-T::one()));
        }
        parts.push(self.e.generalized_inverse(a, b)?);
        if f_right < T::one() {
            parts.push(q.restrict(f_right, T::one())?.rescale_domain(three, -T::lit(2.0)).scale_values(three, T::one()));
        }
        let quantile = MonotonePl::concat(&parts, T::tolerance(1e-12))?;
        Measure::from_pl(Domain::RealLine, quantile)
    }
}

/// Maximum distortion `|d(phi mu, phi nu) - d(mu, nu)|` over random discrete
/// pairs drawn from the descriptor's domain.
pub fn verify_isometry(iso: &IsometryDescriptor<f64>, p: f64, trials: usize, seed: u64) -> Result<VerificationReport> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::InvalidP(p));
    }
    let scope = iso.scope();
    let domain = if scope.real_line {
        Domain::RealLine
    } else if scope.unit_interval {
        Domain::UnitInterval
    } else {
        return Err(Error::ScopeMismatch(format!("{} has an empty domain", iso.name())));
    };
    let claim = format!("isometry:{}:p={}", iso.name(), p);
    let records: Vec<Record> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(seed, trial as u64);
            let (mu, nu): (Measure<f64>, Measure<f64>) = match domain {
                Domain::RealLine => (random_discrete_real(&mut rng, 20), random_discrete_real(&mut rng, 20)),
                Domain::UnitInterval => (random_discrete_unit(&mut rng, 20), random_discrete_unit(&mut rng, 20)),
            };
            let before = wasserstein_distance(&mu, &nu, p)?;
            let after = wasserstein_distance(&iso.apply(&mu)?, &iso.apply(&nu)?, p)?;
            Ok(Record::close(&claim, trial, "distance", before, after, ISOMETRY_TOL))
        })
        .collect::<Result<_>>()?;
    Ok(VerificationReport::new(&claim, trials, ISOMETRY_TOL, records))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::TwoPointParam;
    use approx::assert_abs_diff_eq;

    fn real(atoms: &[(f64, f64)]) -> Measure<f64> {
        Measure::from_atoms(Domain::RealLine, atoms).unwrap()
    }

    #[test]
    fn translation_examples() {
        let two = real(&[(0.0, 0.5), (1.0, 0.5)]);
        let by_dirac = IsometryDescriptor::Translation { nu: real(&[(2.0, 1.0)]) };
        let trivial = IsometryDescriptor::Trivial { orientation: 1, offset: 2.0 };
        assert_eq!(by_dirac.apply(&two).unwrap(), trivial.apply(&two).unwrap());
        assert!(by_dirac.is_bijective());

        let u = Measure::uniform(Domain::RealLine, 0.0, 1.0).unwrap();
        let smooth = IsometryDescriptor::Translation { nu: u.clone() };
        assert_eq!(smooth.apply(&real(&[(0.0, 1.0)])).unwrap(), u);
        assert!(!smooth.is_bijective());
    }

    #[test]
    fn barycentric_reflection_example() {
        let m = real(&[(0.0, 0.25), (1.0, 0.75)]);
        let r = IsometryDescriptor::BarycentricReflection.apply(&m).unwrap();
        assert_eq!(r.atoms().unwrap(), vec![(0.5, 0.75), (1.5, 0.25)]);
        let n = real(&[(-1.0, 0.5), (3.0, 0.5)]);
        let rn = IsometryDescriptor::BarycentricReflection.apply(&n).unwrap();
        let d0 = wasserstein_distance(&m, &n, 2.0).unwrap();
        let d1 = wasserstein_distance(&r, &rn, 2.0).unwrap();
        assert_abs_diff_eq!(d0, d1, epsilon = 1e-14);
    }

    #[test]
    fn scope_rules() {
        let unit = Measure::from_atoms(Domain::UnitInterval, &[(0.3, 1.0)]).unwrap();
        let exotic = IsometryDescriptor::Exotic { q: 0.5 };
        assert!(matches!(exotic.apply(&unit), Err(Error::ScopeMismatch(_))));
        assert!(matches!(IsometryDescriptor::Flip.apply(&real(&[(0.3, 1.0)])), Err(Error::ScopeMismatch(_))));
        let shift = IsometryDescriptor::Trivial { orientation: 1, offset: 0.5 };
        assert!(matches!(shift.apply(&unit), Err(Error::ScopeMismatch(_))));
        let both = IsometryDescriptor::Compose(vec![IsometryDescriptor::Flip, exotic.clone()]);
        let s = both.scope();
        assert!(!s.real_line && !s.unit_interval);
        assert_eq!(s.p, PScope::Empty);
        assert!(matches!(verify_isometry(&both, 1.0, 3, 0), Err(Error::ScopeMismatch(_))));
        let u = Measure::uniform(Domain::RealLine, 0.0, 1.0).unwrap();
        assert!(matches!(exotic_apply_grid(&u, 0.5, 1), Err(Error::GridTooSmall)));
        assert!(matches!(exotic.apply(&u), Err(Error::ScopeMismatch(_))));
        assert!(matches!(
            IsometryDescriptor::Exotic { q: 31.0 }.apply(&real(&[(0.0, 1.0)])),
            Err(Error::QOutOfRange(_))
        ));
    }

    #[test]
    fn composition_is_right_to_left() {
        let unit = Measure::from_atoms(Domain::UnitInterval, &[(0.25, 1.0)]).unwrap();
        let r = IsometryDescriptor::Trivial { orientation: -1, offset: 1.0 };
        let c = IsometryDescriptor::Compose(vec![r.clone(), IsometryDescriptor::Flip]);
        let expected = r.apply(&unit.flip().unwrap()).unwrap();
        assert_eq!(c.apply(&unit).unwrap(), expected);
        assert_eq!(expected.atoms().unwrap(), vec![(0.0, 0.75), (1.0, 0.25)]);
    }

    #[test]
    fn h_q_values() {
        assert_eq!(h_q_eval(0.3, 0.0).unwrap(), 0.3);
        let q: f64 = 0.8;
        let e = (2.0 * q).exp();
        assert_abs_diff_eq!(h_q_eval(0.5, q).unwrap(), e / (1.0 + e), epsilon = 1e-15);
        assert!(h_q_eval(0.0, q).is_err());
        assert!(h_q_inverse(1.0, q).is_err());
        assert!(h_q_eval(0.5, 40.0).is_err());
    }

    #[test]
    fn exotic_fixes_diracs_and_shifts_shape() {
        let d = DiscreteMeasure::new(Domain::RealLine, &[(2.5, 1.0)]).unwrap();
        assert_eq!(exotic_apply_discrete(&d, 0.7).unwrap(), d);

        let base = TwoPointParam::new(0.0, 1.0, 0.0).unwrap().to_discrete().unwrap();
        let img = exotic_apply_discrete(&base, 2f64.ln()).unwrap();
        let expected = [(-2.0, 0.2), (0.5, 0.8)];
        for (a, b) in img.atoms().iter().zip(expected) {
            assert_abs_diff_eq!(a.0, b.0, epsilon = 1e-14);
            assert_abs_diff_eq!(a.1, b.1, epsilon = 1e-15);
        }
    }

    #[test]
    fn exotic_grid_matches_discrete() {
        let mu = DiscreteMeasure::new(Domain::RealLine, &[(-1.0, 0.2), (0.5, 0.3), (2.0, 0.5)]).unwrap();
        let q = -0.6;
        let out = exotic_apply_discrete(&mu, q).unwrap().to_measure();
        let grid = exotic_apply_grid(&mu.to_measure(), q, 997).unwrap();
        for (x, v) in grid {
            assert_abs_diff_eq!(out.quantile_eval(x).unwrap(), v, epsilon = 1e-13);
        }
        let zero = exotic_apply_grid(&mu.to_measure(), 0.0, 64).unwrap();
        for (x, v) in zero {
            assert_eq!(v, mu.to_measure().quantile_eval(x).unwrap());
        }
    }

    #[test]
    fn exotic_grid_on_two_point_chart() {
        let m = TwoPointParam::new(0.0, 1.0, 1.0).unwrap().to_discrete().unwrap().to_measure();
        for (x, v) in exotic_apply_grid(&m, -1.0, 100).unwrap() {
            let expected = if x < 0.5 { -1.0 } else { 1.0 };
            assert_abs_diff_eq!(v, expected, epsilon = 1e-13);
        }
    }

    #[test]
    fn split_embedding_shape() {
        let s = SplitEmbedding::<f64>::standard();
        let d0 = s.apply(&real(&[(0.0, 1.0)])).unwrap();
        let (lo, hi) = d0.support();
        assert!(lo >= -1.0 && hi <= 1.0);
        let mu = real(&[(-2.0, 0.25), (0.0, 0.25), (3.0, 0.5)]);
        let img = s.apply(&mu).unwrap();
        for i in 0..=400 {
            let x = -10.0 + 20.0 * i as f64 / 400.0;
            assert_abs_diff_eq!(img.cdf_eval(x), s.cdf_eval(&mu, x), epsilon = 1e-15);
        }
        assert!(SplitEmbedding::new(MonotonePl::constant(-1.0, 1.0, 0.9).unwrap()).is_err());
    }

    #[test]
    fn verify_reports() {
        let flip = verify_isometry(&IsometryDescriptor::Flip, 1.0, 50, 7).unwrap();
        assert!(flip.passed, "{}", flip.summary_line());
        let exotic = verify_isometry(&IsometryDescriptor::Exotic { q: 0.7 }, 2.0, 50, 7).unwrap();
        assert!(exotic.passed, "{}", exotic.summary_line());
        let w1 = verify_isometry(&IsometryDescriptor::Exotic { q: 0.7 }, 1.0, 50, 7).unwrap();
        assert!(!w1.passed);
    }
}
