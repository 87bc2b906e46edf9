//! Seeded random measures used by the verification suites.
//!
//! Unit-interval samplers place every level and position on the dyadic grid
//! `2^-30 Z`, so reflections `x -> 1 - x` and generalized inverses are exact
//! in binary floating point.

use rand::seq::index;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::measure::{Domain, Measure};
use crate::pl::{MonotonePl, Piece};
use crate::scalar::Scalar;

const DYADIC_BITS: i32 = 30;

/// Independent generator for trial `trial` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Flat-simplex weights (normalized exponential spacings).
pub fn simplex_weights<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).map(|x: f64| x.max(1e-300)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

/// Discrete measure on the line: 1 to `max_atoms` atoms at `10 * N(0,1)`
/// positions with flat-simplex weights.
pub fn random_discrete_real<T: Scalar, R: Rng + ?Sized>(rng: &mut R, max_atoms: usize) -> Measure<T> {
    let n = rng.random_range(1..=max_atoms);
    let weights = simplex_weights(rng, n);
    let atoms: Vec<(T, T)> = weights
        .into_iter()
        .map(|w| {
            let z: f64 = StandardNormal.sample(rng);
            (T::lit(10.0 * z), T::lit(w))
        })
        .collect();
    Measure::from_atoms(Domain::RealLine, &atoms).expect("sampled atoms are valid")
}

fn dyadic<T: Scalar>(k: u64) -> T {
    T::lit(k as f64) * T::lit(2f64.powi(-DYADIC_BITS))
}

/// `n - 1` distinct sorted interior cut points of `[0,1]` on the dyadic grid,
/// with 0 and 1 appended.
fn dyadic_cuts<R: Rng + ?Sized>(rng: &mut R, n: usize, bits: i32) -> Vec<u64> {
    let full = 1u64 << bits;
    let mut cuts: Vec<u64> = index::sample(rng, (full - 1) as usize, n - 1).into_iter().map(|i| i as u64 + 1).collect();
    cuts.sort_unstable();
    let mut all = Vec::with_capacity(n + 1);
    all.push(0);
    all.extend(cuts);
    all.push(full);
    all
}

/// Discrete measure on `[0,1]` with dyadic positions and weights; 1 to
/// `max_atoms` atoms.
pub fn random_discrete_unit<T: Scalar, R: Rng + ?Sized>(rng: &mut R, max_atoms: usize) -> Measure<T> {
    let n = rng.random_range(1..=max_atoms);
    let cuts = dyadic_cuts(rng, n, DYADIC_BITS);
    let full = 1u64 << DYADIC_BITS;
    let atoms: Vec<(T, T)> = cuts
        .windows(2)
        .map(|w| (dyadic::<T>(rng.random_range(0..=full)), dyadic::<T>(w[1] - w[0])))
        .collect();
    Measure::from_atoms(Domain::UnitInterval, &atoms).expect("sampled atoms are valid")
}

/// Measure on `[0,1]` with up to `max_pieces` quantile segments whose slopes
/// are powers of two and whose levels and values are dyadic.
pub fn random_pl_unit<T: Scalar, R: Rng + ?Sized>(rng: &mut R, max_pieces: usize) -> Measure<T> {
    let bits = 12;
    let n = rng.random_range(1..=max_pieces);
    let cuts = dyadic_cuts(rng, n, bits);
    let unit = 2f64.powi(-bits);
    let mut knots = Vec::with_capacity(n + 1);
    let mut pieces = Vec::with_capacity(n);
    let mut level = 0.0;
    for w in cuts.windows(2) {
        knots.push(w[0] as f64 * unit);
        let start = if rng.random_bool(0.5) { level } else { level + rng.random_range(0..64) as f64 * unit };
        let slope = if rng.random_bool(0.3) { 0.0 } else { 2f64.powi(rng.random_range(-3..=2)) };
        let width = (w[1] - w[0]) as f64 * unit;
        pieces.push((start, slope));
        level = start + slope * width;
    }
    knots.push(1.0);
    let mut scale = 1.0;
    while level * scale > 1.0 {
        scale *= 0.5;
    }
    let knots: Vec<T> = knots.into_iter().map(T::lit).collect();
    let pieces: Vec<Piece<T>> = pieces.into_iter().map(|(a, b)| Piece::new(T::lit(a * scale), T::lit(b * scale))).collect();
    let q = MonotonePl::new(knots, pieces).expect("constructed monotone");
    Measure::from_pl(Domain::UnitInterval, q).expect("values in [0,1]")
}

/// Measure on the line with up to `max_pieces` quantile segments, mixing
/// jumps, flat pieces and linear pieces.
pub fn random_pl_real<T: Scalar, R: Rng + ?Sized>(rng: &mut R, max_pieces: usize) -> Measure<T> {
    let n = rng.random_range(1..=max_pieces);
    let mut levels: Vec<f64> = (0..n - 1).map(|_| rng.random::<f64>()).collect();
    levels.sort_by(|a, b| a.partial_cmp(b).unwrap());
    levels.dedup();
    let mut knots = vec![0.0];
    knots.extend(levels.into_iter().filter(|&u| u > 0.0 && u < 1.0));
    knots.push(1.0);
    let z: f64 = StandardNormal.sample(rng);
    let mut value = 3.0 * z;
    let mut pieces = Vec::with_capacity(knots.len() - 1);
    for w in knots.windows(2) {
        if rng.random_bool(0.5) {
            value += rng.random::<f64>() * 3.0;
        }
        let slope = if rng.random_bool(0.3) { 0.0 } else { rng.random::<f64>() * 8.0 };
        pieces.push(Piece::new(T::lit(value), T::lit(slope)));
        value += slope * (w[1] - w[0]);
    }
    let knots: Vec<T> = knots.into_iter().map(T::lit).collect();
    let q = MonotonePl::new_lenient(knots, pieces, T::tolerance(1e-12)).expect("constructed monotone");
    Measure::from_pl(Domain::RealLine, q).expect("finite quantile")
}

/// Random measure on `[0,1]` with barycenter `t`, obtained by an affine
/// rescaling of a random measure that fixes `0` (when shrinking towards 0)
/// or `1` (when shrinking towards 1).
pub fn random_in_slice<R: Rng + ?Sized>(rng: &mut R, t: f64, max_atoms: usize) -> Measure<f64> {
    let base: Measure<f64> = if rng.random_bool(0.5) {
        random_discrete_unit(rng, max_atoms)
    } else {
        random_pl_unit(rng, max_atoms.min(8))
    };
    let m = base.barycenter();
    let (knots, segs) = (base.breaks().to_vec(), base.segments());
    if m <= 0.0 || m >= 1.0 {
        return Measure::dirac(Domain::UnitInterval, t).expect("t in [0,1]");
    }
    let segs: Vec<(f64, f64)> = if t <= m {
        let c = t / m;
        segs.into_iter().map(|(a, b)| (c * a, c * b)).collect()
    } else {
        let c = (1.0 - t) / (1.0 - m);
        segs.into_iter().map(|(a, b)| (1.0 - (1.0 - a) * c, b * c)).collect()
    };
    let pieces = segs.into_iter().map(|(a, b)| Piece::new(a, b)).collect();
    Measure::from_pl_lenient(Domain::UnitInterval, knots, pieces).expect("rescaling keeps [0,1]")
}
