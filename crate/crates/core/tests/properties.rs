use proptest::collection::vec;
use proptest::prelude::*;
use wline::json::{measure_from_json, measure_to_json};
use wline::metric::{geodesic_point, w1_cdf_side, wasserstein_distance};
use wline::{Domain, Measure};

fn atoms(domain: Domain) -> impl Strategy<Value = Vec<(f64, f64)>> {
    let pos = match domain {
        Domain::RealLine => -10.0..10.0f64,
        Domain::UnitInterval => 0.0..1.0f64,
    };
    vec((pos, 0.01..1.0f64), 1..8).prop_map(|raw| {
        let total: f64 = raw.iter().map(|a| a.1).sum();
        raw.into_iter().map(|(x, w)| (x, w / total)).collect()
    })
}

fn real_measure() -> impl Strategy<Value = Measure<f64>> {
    prop_oneof![
        atoms(Domain::RealLine).prop_map(|a| Measure::from_atoms(Domain::RealLine, &a).unwrap()),
        (-5.0..5.0f64, 0.01..5.0f64).prop_map(|(a, w)| Measure::uniform(Domain::RealLine, a, a + w).unwrap()),
    ]
}

fn unit_measure() -> impl Strategy<Value = Measure<f64>> {
    atoms(Domain::UnitInterval).prop_map(|a| Measure::from_atoms(Domain::UnitInterval, &a).unwrap())
}

fn order() -> impl Strategy<Value = f64> {
    prop_oneof![Just(1.0), Just(2.0), 1.0..4.0f64]
}

proptest! {
    #[test]
    fn metric_axioms(a in real_measure(), b in real_measure(), c in real_measure(), p in order()) {
        let ab = wasserstein_distance(&a, &b, p).unwrap();
        let ba = wasserstein_distance(&b, &a, p).unwrap();
        let ac = wasserstein_distance(&a, &c, p).unwrap();
        let cb = wasserstein_distance(&c, &b, p).unwrap();
        prop_assert!(ab >= 0.0);
        prop_assert!((ab - ba).abs() <= 1e-12 * ab.max(1.0));
        prop_assert!(ab <= ac + cb + 1e-10);
        prop_assert_eq!(wasserstein_distance(&a, &a, p).unwrap(), 0.0);
    }

    #[test]
    fn w1_sides_agree(a in real_measure(), b in real_measure()) {
        let q = wasserstein_distance(&a, &b, 1.0).unwrap();
        let c = w1_cdf_side(&a, &b).unwrap();
        prop_assert!((q - c).abs() <= 1e-10 * q.max(1.0));
    }

    #[test]
    fn cdf_and_quantile_invert(a in real_measure(), y in 0.001..0.999f64) {
        let x = a.quantile_eval(y).unwrap();
        prop_assert!(a.cdf_eval(x) >= y - 1e-12);
        prop_assert!(a.cdf_eval_left(x) <= y + 1e-12);
    }

    #[test]
    fn flip_is_an_involutive_isometry(a in unit_measure(), b in unit_measure()) {
        let fa = a.flip().unwrap();
        prop_assert!(wasserstein_distance(&fa.flip().unwrap(), &a, 1.0).unwrap() <= 1e-12);
        let d = wasserstein_distance(&a, &b, 1.0).unwrap();
        let fd = wasserstein_distance(&fa, &b.flip().unwrap(), 1.0).unwrap();
        prop_assert!((d - fd).abs() <= 1e-12);
    }

    #[test]
    fn geodesics_have_constant_speed(a in real_measure(), b in real_measure(), s in 0.0..1.0f64, p in order()) {
        let mid = geodesic_point(&a, &b, s).unwrap().measure;
        let d = wasserstein_distance(&a, &b, p).unwrap();
        let to_mid = wasserstein_distance(&a, &mid, p).unwrap();
        let from_mid = wasserstein_distance(&mid, &b, p).unwrap();
        prop_assert!((to_mid - s * d).abs() <= 1e-9 * d.max(1.0));
        prop_assert!((from_mid - (1.0 - s) * d).abs() <= 1e-9 * d.max(1.0));
    }

    #[test]
    fn json_round_trips(a in real_measure()) {
        // weights are differences of knots, so a knot may move by an ulp
        let text = measure_to_json(&a);
        let back = measure_from_json(&text).unwrap();
        prop_assert!(wasserstein_distance(&a, &back, 1.0).unwrap() <= 1e-14);
        prop_assert_eq!(a.is_discrete(), back.is_discrete());
        if let (Some(x), Some(y)) = (a.atoms(), back.atoms()) {
            prop_assert_eq!(x.len(), y.len());
            for ((p, w), (q, v)) in x.into_iter().zip(y) {
                prop_assert!(p == q && (w - v).abs() <= 1e-14);
            }
        }
    }
}
