//! Property tests for the curve and measure metrics.

use proptest::prelude::*;
use sle_core::conformal::c;
use sle_core::curvespace::{concat, dd_lower_bound, dist_dc, dist_dd_upper, Curve, CurveMetricKind};
use sle_core::measures::{dist_ds, prokhorov, PathEnsemble};
use sle_core::C64;

const TOL: f64 = 1e-9;

/// Polyline from `start` built from (time step, displacement) increments.
fn build(start: C64, steps: &[(f64, f64, f64)]) -> Curve {
    let mut times = vec![0.0];
    let mut points = vec![start];
    for &(dt, dx, dy) in steps {
        times.push(times.last().unwrap() + dt);
        points.push(points.last().unwrap() + c(dx, dy));
    }
    Curve::new(times, points).unwrap()
}

fn steps(max: usize) -> impl Strategy<Value = Vec<(f64, f64, f64)>> {
    prop::collection::vec((0.05..1.0f64, -1.0..1.0f64, -1.0..1.0f64), 1..max)
}

fn curve() -> impl Strategy<Value = Curve> {
    (-0.5..0.5f64, -0.5..0.5f64, steps(7)).prop_map(|(x, y, s)| build(c(x, y), &s))
}

fn ensemble() -> impl Strategy<Value = PathEnsemble> {
    prop::collection::vec((0.1..2.0f64, curve()), 1..4).prop_map(|atoms| PathEnsemble::new(atoms).unwrap())
}

/// Both curves sampled at the union of their normalized vertex times.
fn common_refinement(a: &Curve, b: &Curve) -> (Curve, Curve) {
    let mut us: Vec<f64> =
        a.times().iter().map(|t| t / a.duration()).chain(b.times().iter().map(|t| t / b.duration())).collect();
    us.sort_by(f64::total_cmp);
    us.dedup();
    let at = |cv: &Curve| {
        Curve::new(us.iter().map(|u| u * cv.duration()).collect(), us.iter().map(|u| cv.eval(u * cv.duration())).collect())
            .unwrap()
    };
    (at(a), at(b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn linear_metric_is_a_metric(a in curve(), b in curve(), x in curve()) {
        prop_assert_eq!(dist_dc(&a, &a), 0.0);
        prop_assert!((dist_dc(&a, &b) - dist_dc(&b, &a)).abs() <= TOL);
        prop_assert!(dist_dc(&a, &b) <= dist_dc(&a, &x) + dist_dc(&x, &b) + TOL);
    }

    #[test]
    fn reparam_distance_is_bracketed(a in curve(), b in curve()) {
        let (ra, rb) = common_refinement(&a, &b);
        let dd = dist_dd_upper(&ra, &rb);
        prop_assert!(dd <= dist_dc(&ra, &rb) + TOL);
        prop_assert!(dd_lower_bound(&a, &b) <= dist_dd_upper(&a, &b) + TOL);
        // endpoints and durations are matched by every reparametrization
        let floor = (a.start() - b.start()).norm().max((a.end() - b.end()).norm());
        prop_assert!(dist_dd_upper(&a, &b) + TOL >= floor);
    }

    #[test]
    fn concatenation_is_subadditive(a1 in curve(), a0 in curve(), s1 in steps(5), s0 in steps(5)) {
        let (b1, b0) = (build(a1.end(), &s1), build(a0.end(), &s0));
        let lhs = dist_dd_upper(&concat(&a1, &b1).unwrap(), &concat(&a0, &b0).unwrap());
        prop_assert!(lhs <= dist_dd_upper(&a1, &a0) + dist_dd_upper(&b1, &b0) + TOL);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn prokhorov_is_symmetric_and_additive(m0 in ensemble(), n0 in ensemble(), m1 in ensemble(), n1 in ensemble()) {
        for kind in [CurveMetricKind::LinearReparam, CurveMetricKind::Reparam] {
            prop_assert!((prokhorov(&m0, &n0, kind) - prokhorov(&n0, &m0, kind)).abs() <= TOL);
            let lhs = prokhorov(&m0.sum(&m1), &n0.sum(&n1), kind);
            prop_assert!(lhs <= prokhorov(&m0, &n0, kind) + prokhorov(&m1, &n1, kind) + TOL);
        }
    }

    #[test]
    fn scaling_a_measure_moves_it_by_the_mass_gap(m in ensemble(), a in 1.0..4.0f64) {
        let d = prokhorov(&m, &m.scale(a).unwrap(), CurveMetricKind::Reparam);
        prop_assert!((d - (a - 1.0) * m.total_mass()).abs() <= 1e-9 * a * m.total_mass());
    }

    #[test]
    fn relative_metric_ignores_common_scale(m in ensemble(), n in ensemble(), a in 0.1..10.0f64) {
        let d = dist_ds(&m, &n).unwrap();
        prop_assert!((dist_ds(&m.scale(a).unwrap(), &n.scale(a).unwrap()).unwrap() - d).abs() <= 1e-9);
        prop_assert!(dist_ds(&m, &m).unwrap() <= TOL);
    }
}

#[test]
fn harness_metric_suite_has_no_failures() {
    let rows = sle_core::harness::metric::metric_suite(200, 99, 1e-9).unwrap();
    assert_eq!(rows.len(), 6);
    for r in rows {
        assert_eq!(r.failures, 0, "{r:?}");
        assert_eq!(r.trials, 200);
    }
}
