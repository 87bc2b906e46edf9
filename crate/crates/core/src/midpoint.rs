//! Metric midpoints in `W_1`: the area decomposition between two CDFs,
//! bisecting measures, adjacency and the metric characterization of Dirac
//! masses.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::measure::Measure;
use crate::metric::wasserstein_distance;
use crate::pl::{MonotonePl, Piece, Refinement};
use crate::sampling::trial_rng;
use crate::scalar::{CompensatedSum, Scalar};

/// Number of random candidates used by [`midpoint_diameter_probe`] by default.
pub const DEFAULT_PROBE_CANDIDATES: usize = 2000;

/// Split of the region between two CDFs by the abscissa `v` and the level
/// `h`, each halving its area `d`. `alphas` are the areas left-below,
/// right-below, right-above and left-above.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MidpointGeometry<T> {
    pub d: T,
    pub v: T,
    pub h: T,
    pub alphas: [T; 4],
}

/// Interval `[a, b)` on which two adjacent measures have constant CDFs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdjacencyWitness<T> {
    pub a: T,
    pub b: T,
}

/// Vertical and horizontal bisecting measures of a pair.
///
/// `swapped` records that the pair had to be exchanged to satisfy
/// `F_mu(v) < h < F_nu(v-)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BisectingPair<T> {
    pub vertical: Measure<T>,
    pub horizontal: Measure<T>,
    pub swapped: bool,
}

/// Outcome of a random search for far-apart midpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeResult<T> {
    /// Largest distance found between two midpoints.
    pub best: T,
    /// The pair realizing `best`.
    pub pair: (Measure<T>, Measure<T>),
    /// `(D/2, D)`.
    pub theoretical: (T, T),
    /// Number of midpoints compared.
    pub midpoints: usize,
}

/// The two CDFs on the common window, on a common grid.
struct CdfPair<T> {
    knots: Vec<T>,
    f: Vec<Piece<T>>,
    g: Vec<Piece<T>>,
}

impl<T: Scalar> CdfPair<T> {
    fn new(mu: &Measure<T>, nu: &Measure<T>) -> Result<Self> {
        if mu.domain() != nu.domain() {
            return Err(Error::DomainMismatch);
        }
        let (a0, b0) = mu.support();
        let (a1, b1) = nu.support();
        let (lo, hi) = (a0.min(a1), b0.max(b1));
        if !(hi > lo) {
            return Err(Error::EqualEndpoints);
        }
        let f = mu.cdf_window(lo, hi)?;
        let g = nu.cdf_window(lo, hi)?;
        let r = Refinement::of(&[&f, &g])?;
        let mut cols = r.columns.into_iter();
        Ok(Self { knots: r.knots, f: cols.next().unwrap(), g: cols.next().unwrap() })
    }

    fn width(&self, i: usize) -> T {
        self.knots[i + 1] - self.knots[i]
    }
}

/// Signed differences `(e0, e1)` at both ends of each grid interval.
fn differences<T: Scalar>(knots: &[T], f: &[Piece<T>], g: &[Piece<T>]) -> Vec<(T, T)> {
    (0..f.len())
        .map(|i| {
            let w = knots[i + 1] - knots[i];
            let e0 = f[i].start - g[i].start;
            let e1 = if f[i].slope == g[i].slope { e0 } else { f[i].at(w) - g[i].at(w) };
            (e0, e1)
        })
        .collect()
}

/// Sign-constant pieces `(x0, len, |d| at x0, |d| at x0 + len)` of `|f - g|`.
fn abs_pieces<T: Scalar>(knots: &[T], f: &[Piece<T>], g: &[Piece<T>]) -> Vec<(T, T, T, T)> {
    let mut out = Vec::with_capacity(f.len() + 4);
    for (i, (e0, e1)) in differences(knots, f, g).into_iter().enumerate() {
        let (x0, w) = (knots[i], knots[i + 1] - knots[i]);
        let crosses = (e0 < T::zero() && e1 > T::zero()) || (e0 > T::zero() && e1 < T::zero());
        if crosses {
            let r = w * e0.abs() / (e0.abs() + e1.abs());
            out.push((x0, r, e0.abs(), T::zero()));
            out.push((x0 + r, w - r, T::zero(), e1.abs()));
        } else {
            out.push((x0, w, e0.abs(), e1.abs()));
        }
    }
    out
}

/// Smallest `x` with `int_{k_0}^x |f - g| = target`, for `0 < target <= total`.
fn split_area<T: Scalar>(knots: &[T], f: &[Piece<T>], g: &[Piece<T>], target: T) -> T {
    let half = T::lit(0.5);
    let mut acc = CompensatedSum::new();
    let pieces = abs_pieces(knots, f, g);
    for &(x0, len, a, b) in &pieces {
        let area = (a + b) * half * len;
        let before = acc.value();
        if area > T::zero() && before + area >= target {
            let need = (target - before).max(T::zero());
            let s = (b - a) / len;
            let disc = (a * a + (s + s) * need).max(T::zero());
            let denom = a + disc.sqrt();
            let r = if denom > T::zero() { (need + need) / denom } else { T::zero() };
            return x0 + r.min(len);
        }
        acc.add(area);
    }
    *knots.last().unwrap()
}

fn total_area<T: Scalar>(knots: &[T], f: &[Piece<T>], g: &[Piece<T>]) -> T {
    let half = T::lit(0.5);
    abs_pieces(knots, f, g).into_iter().map(|(_, len, a, b)| (a + b) * half * len).collect::<CompensatedSum<T>>().value()
}

/// `(v, h, D)` for a pair of distinct measures.
fn split_points<T: Scalar>(mu: &Measure<T>, nu: &Measure<T>, cdfs: &CdfPair<T>) -> Result<(T, T, T)> {
    let qr = Refinement::of(&[mu.quantile(), nu.quantile()])?;
    let d = total_area(&qr.knots, &qr.columns[0], &qr.columns[1]);
    if !(d > T::zero()) {
        return Err(Error::EqualEndpoints);
    }
    let half = d * T::lit(0.5);
    let h = split_area(&qr.knots, &qr.columns[0], &qr.columns[1], half);
    let dc = total_area(&cdfs.knots, &cdfs.f, &cdfs.g);
    let v = split_area(&cdfs.knots, &cdfs.f, &cdfs.g, dc * T::lit(0.5));
    Ok((v, h, d))
}

/// Root of the affine `start + slope * t` strictly inside `(0, w)`.
fn crossing<T: Scalar>(start: T, slope: T, level: T, w: T) -> Option<T> {
    if slope == T::zero() {
        return None;
    }
    let t = (level - start) / slope;
    (t > T::zero() && t < w).then_some(t)
}

fn alphas<T: Scalar>(c: &CdfPair<T>, v: T, h: T) -> [T; 4] {
    let mut sums = [CompensatedSum::new(), CompensatedSum::new(), CompensatedSum::new(), CompensatedSum::new()];
    let half = T::lit(0.5);
    for i in 0..c.f.len() {
        let (x0, w) = (c.knots[i], c.width(i));
        let (f, g) = (c.f[i], c.g[i]);
        let mut cuts = vec![T::zero(), w];
        if v > x0 && v < x0 + w {
            cuts.push(v - x0);
        }
        cuts.extend(crossing(f.start, f.slope, h, w));
        cuts.extend(crossing(g.start, g.slope, h, w));
        cuts.extend(crossing(f.start - g.start, f.slope - g.slope, T::zero(), w));
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for pair in cuts.windows(2) {
            let len = pair[1] - pair[0];
            if !(len > T::zero()) {
                continue;
            }
            let m = (pair[0] + pair[1]) * half;
            let (fm, gm) = (f.at(m), g.at(m));
            let below = (fm.min(h) - gm.min(h)).abs() * len;
            let above = (fm.max(h) - gm.max(h)).abs() * len;
            let left = x0 + pair[1] <= v;
            if left {
                sums[0].add(below);
                sums[3].add(above);
            } else {
                sums[1].add(below);
                sums[2].add(above);
            }
        }
    }
    [sums[0].value(), sums[1].value(), sums[2].value(), sums[3].value()]
}

/// `(v, h, alpha_1..alpha_4)` for distinct measures.
pub fn midpoint_geometry<T: Scalar>(mu: &Measure<T>, nu: &Measure<T>) -> Result<MidpointGeometry<T>> {
    let cdfs = CdfPair::new(mu, nu)?;
    let (v, h, d) = split_points(mu, nu, &cdfs)?;
    Ok(MidpointGeometry { d, v, h, alphas: alphas(&cdfs, v, h) })
}

/// `|d(mu, xi) - D/2| <= tol` and `|d(xi, nu) - D/2| <= tol` in `W_1`.
pub fn is_midpoint<T: Scalar>(xi: &Measure<T>, mu: &Measure<T>, nu: &Measure<T>, tol: T) -> Result<bool> {
    let one = T::one();
    let d = wasserstein_distance(mu, nu, one)?;
    if !(d > T::zero()) {
        return Err(Error::EqualEndpoints);
    }
    let half = d * T::lit(0.5);
    let a = wasserstein_distance(mu, xi, one)?;
    let b = wasserstein_distance(xi, nu, one)?;
    Ok((a - half).abs() <= tol && (b - half).abs() <= tol)
}

fn bisect_tol<T: Scalar>(d: T) -> T {
    T::tolerance(1e-12) * d.max(T::one())
}

/// CDF equal to `f` left of `x` and to `g` from `x` on.
fn glue_cdfs<T: Scalar>(f: &MonotonePl<T>, g: &MonotonePl<T>, x: T) -> Result<MonotonePl<T>> {
    let mut parts = Vec::with_capacity(2);
    if x > f.lo() {
        parts.push(f.restrict(f.lo(), x)?);
    }
    if x < g.hi() {
        parts.push(g.restrict(x, g.hi())?);
    }
    MonotonePl::concat(&parts, T::tolerance(1e-12))
}

/// Quantile equal to `f` below level `y` and to `g` from `y` on.
fn glue_quantiles<T: Scalar>(f: &MonotonePl<T>, g: &MonotonePl<T>, y: T) -> Result<MonotonePl<T>> {
    MonotonePl::concat(&[f.restrict(T::zero(), y)?, g.restrict(y, T::one())?], T::tolerance(1e-12))
}

fn window<T: Scalar>(mu: &Measure<T>, nu: &Measure<T>) -> (T, T) {
    let (a0, b0) = mu.support();
    let (a1, b1) = nu.support();
    (a0.min(a1), b0.max(b1))
}

/// Vertical and horizontal bisecting measures; requires `alpha_2 = alpha_4 > 0`.
pub fn bisecting_measures<T: Scalar>(mu: &Measure<T>, nu: &Measure<T>) -> Result<BisectingPair<T>> {
    let geo = midpoint_geometry(mu, nu)?;
    if !(geo.alphas[1] > bisect_tol(geo.d) && geo.alphas[3] > bisect_tol(geo.d)) {
        return Err(Error::NotBisectable);
    }
    let (v, h) = (geo.v, geo.h);
    let straight = mu.cdf_eval(v) < h && h < nu.cdf_eval_left(v);
    let reverse = nu.cdf_eval(v) < h && h < mu.cdf_eval_left(v);
    let (lower, upper, swapped) = match (straight, reverse) {
        (true, _) => (mu, nu, false),
        (false, true) => (nu, mu, true),
        _ => return Err(Error::NotBisectable),
    };
    let (lo, hi) = window(mu, nu);
    let fl = lower.cdf_window(lo, hi)?;
    let fu = upper.cdf_window(lo, hi)?;
    let vertical = Measure::from_cdf(mu.domain(), &glue_cdfs(&fl, &fu, v)?)?;
    let horizontal = Measure::from_pl(mu.domain(), glue_quantiles(upper.quantile(), lower.quantile(), h)?)?;
    Ok(BisectingPair { vertical, horizontal, swapped })
}

pub fn bisecting_vertical<T: Scalar>(mu: &Measure<T>, nu: &Measure<T>) -> Result<Measure<T>> {
    Ok(bisecting_measures(mu, nu)?.vertical)
}

pub fn bisecting_horizontal<T: Scalar>(mu: &Measure<T>, nu: &Measure<T>) -> Result<Measure<T>> {
    Ok(bisecting_measures(mu, nu)?.horizontal)
}

/// The interval `[a, b)` off which the CDFs agree and on which both are
/// constant, when it exists. The hull of the disagreement set is the only
/// candidate, so the witness is unique.
pub fn is_adjacent<T: Scalar>(mu: &Measure<T>, nu: &Measure<T>) -> Result<Option<AdjacencyWitness<T>>> {
    let c = CdfPair::new(mu, nu)?;
    let differs: Vec<usize> = (0..c.f.len()).filter(|&i| c.f[i] != c.g[i]).collect();
    let (Some(&first), Some(&last)) = (differs.first(), differs.last()) else {
        return Err(Error::EqualEndpoints);
    };
    let constant = |col: &[Piece<T>]| {
        let v = col[first].start;
        col[first..=last].iter().all(|p| p.slope == T::zero() && p.start == v)
    };
    if constant(&c.f) && constant(&c.g) {
        Ok(Some(AdjacencyWitness { a: c.knots[first], b: c.knots[last + 1] }))
    } else {
        Ok(None)
    }
}

/// Regions of constant sign of `g - f` on a grid: `(first, last, sign)`.
fn sign_regions<T: Scalar>(diff: &[(T, T)]) -> Vec<(usize, usize, i8)> {
    let sign = |e: (T, T)| {
        let m = e.0 + e.1;
        if m > T::zero() {
            1
        } else if m < T::zero() {
            -1
        } else {
            0
        }
    };
    let mut out: Vec<(usize, usize, i8)> = Vec::new();
    for (i, &e) in diff.iter().enumerate() {
        let s = sign(e);
        match out.last_mut() {
            Some(last) if last.2 == s && last.1 + 1 == i => last.1 = i,
            _ => out.push((i, i, s)),
        }
    }
    out
}

/// `(1 - theta) f + theta g` with a random step function `theta` that is
/// monotone within each sign region of `g - f` and carries area `target`.
fn random_blend<T: Scalar, R: Rng + ?Sized>(
    rng: &mut R,
    knots: &[T],
    f: &[Piece<T>],
    g: &[Piece<T>],
    target: T,
) -> Option<MonotonePl<T>> {
    // split at sign changes so each interval has one sign
    let mut ks = vec![knots[0]];
    let mut fs = Vec::new();
    let mut gs = Vec::new();
    for (i, (e0, e1)) in differences(knots, f, g).into_iter().enumerate() {
        let (x0, w) = (knots[i], knots[i + 1] - knots[i]);
        let crosses = (e0 < T::zero() && e1 > T::zero()) || (e0 > T::zero() && e1 < T::zero());
        if crosses {
            let r = w * e0.abs() / (e0.abs() + e1.abs());
            if r > T::zero() && r < w {
                fs.push(f[i]);
                gs.push(g[i]);
                ks.push(x0 + r);
                fs.push(Piece::new(f[i].at(r), f[i].slope));
                gs.push(Piece::new(g[i].at(r), g[i].slope));
                ks.push(knots[i + 1]);
                continue;
            }
        }
        fs.push(f[i]);
        gs.push(g[i]);
        ks.push(knots[i + 1]);
    }
    let diff = differences(&ks, &gs, &fs);
    let half = T::lit(0.5);
    let areas: Vec<T> = (0..fs.len()).map(|i| (diff[i].0.abs() + diff[i].1.abs()) * half * (ks[i + 1] - ks[i])).collect();
    let total: T = areas.iter().copied().collect::<CompensatedSum<T>>().value();
    let mut theta = vec![T::zero(); fs.len()];
    for (first, last, s) in sign_regions(&diff) {
        let count = last - first + 1;
        let mut draws: Vec<f64> = (0..count).map(|_| rng.random::<f64>()).collect();
        if rng.random_bool(0.3) {
            // coarse steps make extreme blends more likely
            draws.iter_mut().for_each(|x| *x = if *x < 0.5 { 0.0 } else { 1.0 });
        }
        draws.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if s < 0 {
            draws.reverse();
        }
        for (k, x) in draws.into_iter().enumerate() {
            theta[first + k] = T::lit(x);
        }
    }
    let area: T = theta.iter().zip(&areas).map(|(&t, &a)| t * a).collect::<CompensatedSum<T>>().value();
    if area > target {
        let c = target / area;
        theta.iter_mut().for_each(|t| *t = *t * c);
    } else if area < target {
        let rest = total - area;
        if !(rest > T::zero()) {
            return None;
        }
        let c = (total - target) / rest;
        theta.iter_mut().for_each(|t| *t = T::one() - (T::one() - *t) * c);
    }
    let pieces = (0..fs.len())
        .map(|i| {
            let t = theta[i];
            let u = T::one() - t;
            Piece::new(u * fs[i].start + t * gs[i].start, u * fs[i].slope + t * gs[i].slope)
        })
        .collect();
    MonotonePl::new_lenient(ks, pieces, T::tolerance(1e-10)).ok()
}

/// Random search for the diameter of the midpoint set of `mu` and `nu`.
///
/// Candidates: the bisecting measures, both full glues at `v`, the CDF and
/// quantile averages, and `candidates` random blends on the CDF and quantile
/// sides. Every candidate that is a midpoint within `1e-10 * max(D, 1)`
/// enters the pairwise maximization.
pub fn midpoint_diameter_probe(
    mu: &Measure<f64>,
    nu: &Measure<f64>,
    candidates: usize,
    seed: u64,
) -> Result<ProbeResult<f64>> {
    let geo = midpoint_geometry(mu, nu)?;
    let d = geo.d;
    let tol = 1e-10 * d.max(1.0);
    let domain = mu.domain();
    let (lo, hi) = window(mu, nu);
    let f = mu.cdf_window(lo, hi)?;
    let g = nu.cdf_window(lo, hi)?;
    let cr = Refinement::of(&[&f, &g])?;
    let qr = Refinement::of(&[mu.quantile(), nu.quantile()])?;

    let mut pool: Vec<Measure<f64>> = Vec::new();
    if let Ok(b) = bisecting_measures(mu, nu) {
        pool.push(b.vertical);
        pool.push(b.horizontal);
    }
    for (a, b) in [(&f, &g), (&g, &f)] {
        if let Ok(c) = glue_cdfs(a, b, geo.v) {
            if let Ok(m) = Measure::from_cdf(domain, &c) {
                pool.push(m);
            }
        }
    }
    let (k, p) = cr.combine(&[0.5, 0.5]);
    if let Ok(c) = MonotonePl::new_lenient(k, p, 1e-12) {
        pool.extend(Measure::from_cdf(domain, &c));
    }
    let (k, p) = qr.combine(&[0.5, 0.5]);
    pool.extend(Measure::from_pl_lenient(domain, k, p));

    let random: Vec<Measure<f64>> = (0..candidates)
        .into_par_iter()
        .filter_map(|i| {
            let mut rng = trial_rng(seed, i as u64);
            if i % 2 == 0 {
                let c = random_blend(&mut rng, &cr.knots, &cr.columns[0], &cr.columns[1], d * 0.5)?;
                Measure::from_cdf(domain, &c).ok()
            } else {
                let q = random_blend(&mut rng, &qr.knots, &qr.columns[0], &qr.columns[1], d * 0.5)?;
                Measure::from_pl(domain, q).ok()
            }
        })
        .collect();
    pool.extend(random);
    let midpoints: Vec<Measure<f64>> = pool
        .into_iter()
        .filter(|m| is_midpoint(m, mu, nu, tol).unwrap_or(false))
        .collect();
    if midpoints.is_empty() {
        return Err(Error::InvalidRepresentation("no midpoint candidates survived".into()));
    }
    let n = midpoints.len();
    let (best, i, j) = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut best = (0.0, i, i);
            for j in (i + 1)..n {
                let dij = wasserstein_distance(&midpoints[i], &midpoints[j], 1.0).unwrap_or(0.0);
                if dij > best.0 {
                    best = (dij, i, j);
                }
            }
            best
        })
        .reduce(|| (0.0, 0, 0), |a, b| if b.0 > a.0 || (b.0 == a.0 && (b.1, b.2) < (a.1, a.2)) { b } else { a });
    Ok(ProbeResult {
        best,
        pair: (midpoints[i].clone(), midpoints[j].clone()),
        theoretical: (d * 0.5, d),
        midpoints: n,
    })
}

/// Size above which [`dirac_certificate`] can only succeed for Dirac masses:
/// `4 (diam supp + 1)`. Every certificate needs either an atom isolated in a
/// window of radius `n / 2` or a support gap of length at least `n`.
pub fn dirac_certificate_bound<T: Scalar>(eta: &Measure<T>) -> T {
    let (a, b) = eta.support();
    T::lit(4.0) * (b - a + T::one())
}

/// Adjacent pair `(mu_n, nu_n)` at distance `n` whose vertical or
/// horizontal bisecting measure is `eta`, if one exists.
///
/// The search is exhaustive: a vertical bisecting measure of an adjacent
/// pair is an atom of mass `w` at the center of a mass-free window of radius
/// `n / (2w)`, and a horizontal one is a support gap `(a, b)` with atoms at
/// both ends of mass at least `n / (2 (b - a))`. Each candidate is checked
/// against adjacency, distance and bisecting measures before it is returned.
pub fn dirac_certificate<T: Scalar>(eta: &Measure<T>, n: T) -> Result<Option<(Measure<T>, Measure<T>)>> {
    if !(n > T::zero()) || !n.is_finite() {
        return Err(Error::ParameterOutOfRange(format!("certificate size {n} must be positive")));
    }
    let q = eta.quantile();
    let knots = q.knots();
    let pieces = q.pieces();
    let m = pieces.len();
    let two = T::lit(2.0);
    let mut candidates = Vec::new();
    for i in 0..m {
        if pieces[i].slope != T::zero() {
            continue;
        }
        let c = pieces[i].start;
        let w = knots[i + 1] - knots[i];
        let s = n / (two * w);
        let left_ok = i == 0 || q.left_limit(i - 1) <= c - s;
        let right_ok = i + 1 == m || pieces[i + 1].start >= c + s;
        if left_ok && right_ok {
            let moved = |shift: T| {
                let mut ps = pieces.to_vec();
                ps[i] = Piece::constant(c + shift);
                Measure::from_pl_lenient(eta.domain(), knots.to_vec(), ps)
            };
            if let (Ok(a), Ok(b)) = (moved(-s), moved(s)) {
                candidates.push((a, b));
            }
        }
    }
    for i in 0..m.saturating_sub(1) {
        let (pa, pb) = (pieces[i], pieces[i + 1]);
        if pa.slope != T::zero() || pb.slope != T::zero() {
            continue;
        }
        let gap = pb.start - pa.start;
        let (wa, wb) = (knots[i + 1] - knots[i], knots[i + 2] - knots[i + 1]);
        let half_mass = n / (two * gap);
        if half_mass <= wa.min(wb) {
            let shifted = |delta: T| {
                let mut ks = knots.to_vec();
                ks[i + 1] = ks[i + 1] + delta;
                Measure::from_pl_lenient(eta.domain(), ks, pieces.to_vec())
            };
            if let (Ok(a), Ok(b)) = (shifted(half_mass), shifted(-half_mass)) {
                candidates.push((a, b));
            }
        }
    }
    let tol = T::tolerance(1e-9) * n.max(T::one());
    for (a, b) in candidates {
        if certificate_holds(eta, &a, &b, n, tol)? {
            return Ok(Some((a, b)));
        }
    }
    Ok(None)
}

fn certificate_holds<T: Scalar>(eta: &Measure<T>, a: &Measure<T>, b: &Measure<T>, n: T, tol: T) -> Result<bool> {
    if a == b || is_adjacent(a, b)?.is_none() {
        return Ok(false);
    }
    if (wasserstein_distance(a, b, T::one())? - n).abs() > tol {
        return Ok(false);
    }
    let Ok(bis) = bisecting_measures(a, b) else {
        return Ok(false);
    };
    let one = T::one();
    Ok(wasserstein_distance(&bis.vertical, eta, one)? <= tol || wasserstein_distance(&bis.horizontal, eta, one)? <= tol)
}
