//! Extremal geometry of `W_p([0,1])`: slices, the `M_n` / `Q_n` ladder and
//! nearest equi-weighted measures.

use rand::Rng;

use crate::error::{Error, Result};
use crate::measure::{Domain, Measure};
use crate::metric::wasserstein_distance;
use crate::pl::Refinement;
use crate::quadrature::integrate;
use crate::scalar::{CompensatedSum, Scalar};

/// Measures on `[0,1]` at `W_1` distance `t` from `delta_0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SliceSpec<T> {
    pub t: T,
}

/// Which family of the ladder a level refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LadderRole {
    M,
    Q,
}

/// `M_n` or `Q_n` for `n >= -1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LadderLevel {
    pub n: i32,
    pub role: LadderRole,
}

impl LadderLevel {
    /// Elements of the level when it is finite: `Q_n` always, `M_{-1}` only.
    pub fn finite_elements<T: Scalar>(&self) -> Option<Vec<Measure<T>>> {
        match (self.role, self.n) {
            (LadderRole::Q, n) if n < 0 => Some(Vec::new()),
            (LadderRole::Q, n) => qn_elements(n as u32).ok(),
            (LadderRole::M, -1) => Some(vec![
                Measure::dirac(Domain::UnitInterval, T::zero()).ok()?,
                Measure::dirac(Domain::UnitInterval, T::one()).ok()?,
            ]),
            _ => None,
        }
    }
}

const MAX_LADDER_N: u32 = 24;

fn unit_only<T: Scalar>(mu: &Measure<T>) -> Result<()> {
    if mu.domain() != Domain::UnitInterval {
        return Err(Error::DomainMismatch);
    }
    Ok(())
}

/// `t = d_{W_1}(delta_0, mu)`, the barycenter of `mu`.
pub fn slice_of<T: Scalar>(mu: &Measure<T>) -> Result<SliceSpec<T>> {
    unit_only(mu)?;
    Ok(SliceSpec { t: mu.barycenter() })
}

/// `((1-t) delta_0 + t delta_1, delta_t)`, at distance `2t(1-t)`.
pub fn slice_extremal_pair<T: Scalar>(t: T) -> Result<(Measure<T>, Measure<T>)> {
    if !(t >= T::zero() && t <= T::one()) {
        return Err(Error::ParameterOutOfRange(format!("slice level {t} outside [0,1]")));
    }
    let d = Domain::UnitInterval;
    let split = if t == T::zero() || t == T::one() {
        Measure::dirac(d, t)?
    } else {
        Measure::from_atoms(d, &[(T::zero(), T::one() - t), (T::one(), t)])?
    };
    Ok((split, Measure::dirac(d, t)?))
}

/// `Q_n`: the measures `(2k-1)/2^{n+1} delta_0 + (1 - (2k-1)/2^{n+1}) delta_1`, `k = 1..2^n`.
pub fn qn_elements<T: Scalar>(n: u32) -> Result<Vec<Measure<T>>> {
    if n > MAX_LADDER_N {
        return Err(Error::ParameterOutOfRange(format!("ladder level {n} above {MAX_LADDER_N}")));
    }
    let denom = T::lit(2f64.powi(n as i32 + 1));
    (1..=(1u64 << n))
        .map(|k| {
            let w0 = T::lit((2 * k - 1) as f64) / denom;
            Measure::from_atoms(Domain::UnitInterval, &[(T::zero(), w0), (T::one(), T::one() - w0)])
        })
        .collect()
}

/// `(1/2^n) sum_j delta_{a_j}` for sorted positions in `[0,1]`.
pub fn mn_element<T: Scalar>(positions: &[T]) -> Result<Measure<T>> {
    let len = positions.len();
    if len == 0 || !len.is_power_of_two() {
        return Err(Error::InvalidLadderSize(len));
    }
    if let Some(&x) = positions.iter().find(|&&x| !(x >= T::zero() && x <= T::one())) {
        return Err(Error::PositionOutOfRange(x.to_f64_lossy()));
    }
    if positions.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::UnsortedPositions);
    }
    let w = T::one() / T::lit(len as f64);
    let atoms: Vec<(T, T)> = positions.iter().map(|&x| (x, w)).collect();
    Measure::from_atoms(Domain::UnitInterval, &atoms)
}

/// Uniformly distributed sorted positions giving a random element of `M_n`.
pub fn random_mn_element<R: Rng + ?Sized>(rng: &mut R, n: u32) -> Result<Measure<f64>> {
    if n > 16 {
        return Err(Error::ParameterOutOfRange(format!("ladder level {n} above 16")));
    }
    let mut pos: Vec<f64> = (0..(1usize << n)).map(|_| rng.random::<f64>()).collect();
    pos.sort_by(|a, b| a.partial_cmp(b).unwrap());
    mn_element(&pos)
}

/// Terms `(coefficient, measure)` with `sum coefficient * F^{-1}_measure`
/// equal to the quantile of `mn_element(positions)`: the coefficient of
/// `(j/2^n) delta_0 + (1 - j/2^n) delta_1` is `a_{j+1} - a_j` with
/// `a_0 = 0` and `a_{2^n + 1} = 1`. Each measure lies in `M_{n-1}` (even
/// `j`) or `Q_{n-1}` (odd `j`).
pub fn ladder_decomposition<T: Scalar>(positions: &[T]) -> Result<Vec<(Measure<T>, T)>> {
    mn_element(positions)?;
    let len = positions.len();
    let big_n = T::lit(len as f64);
    let mut ext = Vec::with_capacity(len + 2);
    ext.push(T::zero());
    ext.extend_from_slice(positions);
    ext.push(T::one());
    (0..=len)
        .map(|j| {
            let w0 = T::lit(j as f64) / big_n;
            let m = if j == 0 {
                Measure::dirac(Domain::UnitInterval, T::one())?
            } else if j == len {
                Measure::dirac(Domain::UnitInterval, T::zero())?
            } else {
                Measure::from_atoms(Domain::UnitInterval, &[(T::zero(), w0), (T::one(), T::one() - w0)])?
            };
            Ok((m, ext[j + 1] - ext[j]))
        })
        .collect()
}

/// Measure with quantile `sum_j alpha_j F^{-1}_{nu_j}`; weights must be
/// nonnegative and sum to one within `1e-9`.
pub fn convex_hull_combination<T: Scalar>(items: &[(Measure<T>, T)]) -> Result<Measure<T>> {
    let Some((first, _)) = items.first() else {
        return Err(Error::WeightError("empty combination".into()));
    };
    let domain = first.domain();
    if items.iter().any(|(m, _)| m.domain() != domain) {
        return Err(Error::DomainMismatch);
    }
    let mut total = CompensatedSum::new();
    for &(_, w) in items {
        if !(w >= T::zero()) || !w.is_finite() {
            return Err(Error::WeightError(format!("negative or non-finite weight {w}")));
        }
        total.add(w);
    }
    let total = total.value();
    if (total - T::one()).abs() > T::tolerance(1e-9) {
        return Err(Error::WeightError(format!("weights sum to {total}")));
    }
    if items.len() == 1 {
        return Ok(first.clone());
    }
    let qs: Vec<_> = items.iter().map(|(m, _)| m.quantile()).collect();
    let weights: Vec<T> = items.iter().map(|&(_, w)| w).collect();
    let r = Refinement::of(&qs)?;
    let (knots, pieces) = r.combine(&weights);
    Measure::from_pl_lenient(domain, knots, pieces)
}

/// Closed-form nearest Dirac position `t*(alpha)` for `(1-alpha) delta_0 + alpha delta_1`.
pub fn t_star<T: Scalar>(alpha: T, p: T) -> Result<T> {
    if !(p > T::one()) || !p.is_finite() {
        return Err(Error::InvalidP(p.to_f64_lossy()));
    }
    if !(alpha > T::zero() && alpha < T::one()) {
        return Err(Error::AlphaOutOfRange(alpha.to_f64_lossy()));
    }
    let e = T::one() / (p - T::one());
    let a = alpha.powf(e);
    let b = (T::one() - alpha).powf(e);
    Ok(a / (a + b))
}

/// `int sign(e)|e|^{p-1}` over `[0, w]` for the affine `e` with end values `e0`, `e1`.
fn signed_power_integral<T: Scalar>(e0: T, e1: T, w: T, p: T) -> T {
    let pm1 = p - T::one();
    let signed = |e: T| if e < T::zero() { -(-e).powf(pm1) } else { e.powf(pm1) };
    if e0 == e1 {
        return signed(e0) * w;
    }
    let spread = (e1 - e0).abs();
    let scale = e0.abs().max(e1.abs());
    if spread > T::lit(1e-3) * scale {
        let c1 = (e1 - e0) / w;
        return (e1.abs().powf(p) - e0.abs().powf(p)) / (p * c1);
    }
    let c1 = (e1 - e0) / w;
    integrate(|y: T| signed(e0 + c1 * y), T::zero(), w, T::tolerance(1e-13))
}

/// Minimizer of `a -> int_lo^hi |F^{-1} - a|^p` by bisection on the sign of the derivative.
fn block_minimizer<T: Scalar>(mu: &Measure<T>, lo: T, hi: T, p: T) -> Result<T> {
    let block = mu.quantile().restrict(lo, hi)?;
    let (mut a, mut b) = (block.first_value(), block.last_value());
    if a == b {
        return Ok(a);
    }
    let knots = block.knots().to_vec();
    let g = |c: T| {
        let mut acc = CompensatedSum::new();
        for (i, piece) in block.pieces().iter().enumerate() {
            let w = knots[i + 1] - knots[i];
            let e0 = piece.start - c;
            let e1 = block.left_limit(i) - c;
            acc.add(signed_power_integral(e0, e1, w, p));
        }
        acc.value()
    };
    let tol = T::tolerance(1e-12);
    for _ in 0..200 {
        let m = (a + b) * T::lit(0.5);
        if !(b - a > tol * (T::one() + m.abs())) || m <= a || m >= b {
            break;
        }
        let gm = g(m);
        if gm > T::zero() {
            a = m;
        } else if gm < T::zero() {
            b = m;
        } else {
            return Ok(m);
        }
    }
    Ok((a + b) * T::lit(0.5))
}

/// Nearest element of `M_n` to `mu` in `W_p`, `p > 1`, and its distance.
///
/// The problem separates over the quantile blocks `[(k-1)/2^n, k/2^n)`; each
/// block position minimizes a convex function and the minimizers are
/// automatically sorted.
pub fn nearest_in_mn<T: Scalar>(mu: &Measure<T>, n: u32, p: T) -> Result<(Measure<T>, T)> {
    unit_only(mu)?;
    if !(p > T::one()) || !p.is_finite() {
        return Err(Error::InvalidP(p.to_f64_lossy()));
    }
    if n > 16 {
        return Err(Error::ParameterOutOfRange(format!("ladder level {n} above 16")));
    }
    let blocks = 1usize << n;
    let size = T::lit(blocks as f64);
    let mut positions = Vec::with_capacity(blocks);
    for k in 0..blocks {
        let lo = T::lit(k as f64) / size;
        let hi = T::lit((k + 1) as f64) / size;
        let a = block_minimizer(mu, lo, hi, p)?;
        positions.push(a.max(T::zero()).min(T::one()));
    }
    for i in 1..positions.len() {
        if positions[i] < positions[i - 1] {
            positions[i] = positions[i - 1];
        }
    }
    let best = mn_element(&positions)?;
    let d = wasserstein_distance(mu, &best, p)?;
    Ok((best, d))
}

/// The bound `(1/2)^{1 + n/p}` on `dist(mu, M_n)`.
pub fn ladder_bound<T: Scalar>(n: u32, p: T) -> T {
    T::lit(0.5).powf(T::one() + T::lit(n as f64) / p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn unit(atoms: &[(f64, f64)]) -> Measure<f64> {
        Measure::from_atoms(Domain::UnitInterval, atoms).unwrap()
    }

    #[test]
    fn slice_values() {
        assert_eq!(slice_of(&unit(&[(0.3, 1.0)])).unwrap().t, 0.3);
        assert_eq!(slice_of(&unit(&[(0.0, 0.75), (1.0, 0.25)])).unwrap().t, 0.25);
        let u = Measure::uniform(Domain::UnitInterval, 0.0, 1.0).unwrap();
        assert_eq!(slice_of(&u).unwrap().t, 0.5);
        let real = Measure::dirac(Domain::RealLine, 0.0).unwrap();
        assert_eq!(slice_of(&real), Err(Error::DomainMismatch));
    }

    #[test]
    fn extremal_pairs() {
        for (t, d) in [(0.5, 0.5), (0.25, 0.375), (0.0, 0.0), (1.0, 0.0)] {
            let (a, b) = slice_extremal_pair(t).unwrap();
            assert_abs_diff_eq!(wasserstein_distance(&a, &b, 1.0).unwrap(), d, epsilon = 1e-15);
            assert_eq!(slice_of(&a).unwrap().t, t);
            assert_eq!(slice_of(&b).unwrap().t, t);
        }
    }

    #[test]
    fn q_levels() {
        let q0: Vec<Measure<f64>> = qn_elements(0).unwrap();
        assert_eq!(q0, vec![unit(&[(0.0, 0.5), (1.0, 0.5)])]);
        let q1: Vec<Measure<f64>> = qn_elements(1).unwrap();
        assert_eq!(q1[0].atoms().unwrap()[0], (0.0, 0.25));
        assert_eq!(q1[1].atoms().unwrap()[0], (0.0, 0.75));
        let q2: Vec<Measure<f64>> = qn_elements(2).unwrap();
        let w: Vec<f64> = q2.iter().map(|m| m.atoms().unwrap()[0].1).collect();
        assert_eq!(w, vec![0.125, 0.375, 0.625, 0.875]);
        assert!(LadderLevel { n: -1, role: LadderRole::Q }.finite_elements::<f64>().unwrap().is_empty());
        assert_eq!(LadderLevel { n: -1, role: LadderRole::M }.finite_elements::<f64>().unwrap().len(), 2);
    }

    #[test]
    fn m_elements() {
        assert_eq!(mn_element(&[0.4]).unwrap(), unit(&[(0.4, 1.0)]));
        assert_eq!(mn_element(&[0.0, 1.0]).unwrap(), unit(&[(0.0, 0.5), (1.0, 0.5)]));
        assert_eq!(mn_element(&[1.0 / 3.0, 1.0 / 3.0]).unwrap(), unit(&[(1.0 / 3.0, 1.0)]));
        assert_eq!(mn_element(&[0.2, 0.1]), Err(Error::UnsortedPositions));
        assert_eq!(mn_element(&[0.2, 1.5]), Err(Error::PositionOutOfRange(1.5)));
        assert_eq!(mn_element(&[0.1, 0.2, 0.3]), Err(Error::InvalidLadderSize(3)));
    }

    #[test]
    fn t_star_values() {
        assert_eq!(t_star(0.5, 3.0).unwrap(), 0.5);
        assert_abs_diff_eq!(t_star(0.3, 2.0).unwrap(), 0.3, epsilon = 1e-15);
        let v = t_star(0.9, 100.0).unwrap();
        assert!(v > 0.5 && v < 0.51);
        assert!(matches!(t_star(0.0, 2.0), Err(Error::AlphaOutOfRange(_))));
        assert!(matches!(t_star(0.5, 1.0), Err(Error::InvalidP(_))));
    }

    #[test]
    fn nearest_dirac_two_point() {
        let m = unit(&[(0.0, 0.5), (1.0, 0.5)]);
        for p in [1.5, 2.0, 3.0] {
            let (best, d) = nearest_in_mn(&m, 0, p).unwrap();
            assert_abs_diff_eq!(best.atoms().unwrap()[0].0, 0.5, epsilon = 1e-10);
            assert_abs_diff_eq!(d, 0.5, epsilon = 1e-12);
        }
        let alpha = 0.8;
        let m = unit(&[(0.0, 1.0 - alpha), (1.0, alpha)]);
        let (best, _) = nearest_in_mn(&m, 0, 3.0).unwrap();
        assert_abs_diff_eq!(best.atoms().unwrap()[0].0, t_star(alpha, 3.0).unwrap(), epsilon = 1e-8);
    }

    #[test]
    fn q_elements_attain_bound() {
        for n in 0..3 {
            for q in qn_elements::<f64>(n).unwrap() {
                let (_, d) = nearest_in_mn(&q, n, 2.0).unwrap();
                assert_abs_diff_eq!(d, ladder_bound(n, 2.0), epsilon = 1e-10);
            }
        }
        assert_abs_diff_eq!(ladder_bound(2, 2.0), 0.25, epsilon = 1e-15);
    }

    #[test]
    fn ladder_identity_n1() {
        let (a1, a2) = (0.2, 0.9);
        let items = vec![
            (unit(&[(1.0, 1.0)]), a1),
            (unit(&[(0.0, 0.5), (1.0, 0.5)]), a2 - a1),
            (unit(&[(0.0, 1.0)]), 1.0 - a2),
        ];
        let c = convex_hull_combination(&items).unwrap();
        let target = mn_element(&[a1, a2]).unwrap();
        assert!(wasserstein_distance(&c, &target, 1.0).unwrap() < 1e-15);
    }

    #[test]
    fn ladder_identity_n2() {
        let pos = [0.1, 0.3, 0.6, 0.95];
        let terms = ladder_decomposition(&pos).unwrap();
        assert_eq!(terms.len(), 5);
        let c = convex_hull_combination(&terms).unwrap();
        let target = mn_element(&pos).unwrap();
        assert!(wasserstein_distance(&c, &target, 1.0).unwrap() < 1e-15);
    }

    #[test]
    fn combination_rejects_bad_weights() {
        let d = unit(&[(0.5, 1.0)]);
        assert!(matches!(convex_hull_combination(&[(d.clone(), 0.5)]), Err(Error::WeightError(_))));
        assert!(matches!(
            convex_hull_combination(&[(d.clone(), 1.5), (d.clone(), -0.5)]),
            Err(Error::WeightError(_))
        ));
        assert_eq!(convex_hull_combination(&[(d.clone(), 1.0)]).unwrap(), d);
    }
}
