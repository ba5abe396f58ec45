use super::*;
use crate::curvespace::reverse;
use crate::loewner::sample_chordal;
use approx::assert_relative_eq;
use std::f64::consts::PI;

fn params(kappa: f64) -> GreenParams {
    GreenParams::new(kappa).unwrap()
}

fn segment(len: f64, n: usize) -> Curve {
    Curve::from_fn(1.0, n, |t| c(len * t, 0.0)).unwrap()
}

/// Koch curve on `[0, 1]` after `level` refinements, uniform in vertex index.
fn koch(level: u32) -> Curve {
    let mut pts = vec![c(0.0, 0.0), c(1.0, 0.0)];
    let rot = C64::from_polar(1.0, PI / 3.0);
    for _ in 0..level {
        let mut next = Vec::with_capacity(4 * pts.len());
        for w in pts.windows(2) {
            let d = (w[1] - w[0]) / 3.0;
            next.extend([w[0], w[0] + d, w[0] + d + d * rot, w[0] + 2.0 * d]);
        }
        next.push(*pts.last().unwrap());
        pts = next;
    }
    Curve::uniform(pts, 1.0).unwrap()
}

#[test]
fn extrapolation_recovers_synthetic_limits() {
    let eps: Vec<f64> = (0..7).map(|k| 0.25 * 0.5f64.powi(k)).collect();
    for (v, b, th) in [(1.3, 2.0, 0.4), (0.0, -0.7, 0.9), (5.0, 0.3, 0.05)] {
        let raw: Vec<f64> = eps.iter().map(|e| v + b * e.powf(th)).collect();
        let (fv, fth, fb, res) = extrapolate(&eps, &raw);
        assert!((fth.unwrap() - th).abs() < 1e-9, "{fth:?}");
        assert_relative_eq!(fv, v, epsilon = 1e-9);
        assert_relative_eq!(fb, b, epsilon = 1e-9);
        assert!(res < 1e-9);
    }
    let (v, th, _, _) = extrapolate(&eps[..2], &[3.0, 2.0]);
    assert_eq!((v, th), (2.0, None));
}

#[test]
fn region_clipping() {
    let sq = Region::Rect(Rect::new(0.0, 0.0, 1.0, 1.0).unwrap());
    assert_eq!(sq.clip(c(-1.0, 0.5), c(3.0, 0.5)), Some((0.25, 0.5)));
    assert_eq!(sq.clip(c(-1.0, 2.0), c(3.0, 2.0)), None);
    let d = Region::disk(c(0.0, 0.0), 1.0).unwrap();
    let (s0, s1) = d.clip(c(-2.0, 0.0), c(2.0, 0.0)).unwrap();
    assert_relative_eq!(s0, 0.25, epsilon = 1e-15);
    assert_relative_eq!(s1, 0.75, epsilon = 1e-15);
    assert_eq!(d.clip(c(-2.0, 1.5), c(2.0, 1.5)), None);
    assert_eq!(d.clip(c(0.1, 0.1), c(0.1, 0.1)), Some((0.0, 1.0)));
    assert!(Region::disk(c(0.0, 0.0), 0.0).is_err());
}

#[test]
fn straight_segment_has_vanishing_content() {
    let p = params(8.0 / 3.0);
    let seg = segment(1.0, 50);
    let est = minkowski_content(&seg, &Region::Plane, &p, &Ladder::default()).unwrap();
    // the neighbourhood is a stadium: area 2Lε + πε²
    for (&e, &r) in est.eps_ladder.iter().zip(&est.raw) {
        let exact = e.powf(p.d - 2.0) * (2.0 * e + PI * e * e);
        assert_relative_eq!(r, exact, max_relative = 0.03);
    }
    assert!(est.raw.windows(2).all(|w| w[1] < w[0]));
    let finer = minkowski_content(&seg, &Region::Plane, &p, &Ladder::Relative { k0: 4, k1: 10 }).unwrap();
    let finest = minkowski_content(&seg, &Region::Plane, &p, &Ladder::Relative { k0: 8, k1: 14 }).unwrap();
    assert!(finer.value < 0.5 * est.value && finest.value < 0.5 * finer.value);
    assert!(finest.value < 0.02 * est.raw[0], "{}", finest.value);
}

#[test]
fn scaling_covariance() {
    let p = params(8.0 / 3.0);
    let (trace, _) = sample_chordal(p.kappa, 0.5, 1e-3, 17).unwrap();
    let ladder = Ladder::Relative { k0: 0, k1: 3 };
    let a = minkowski_content(&trace, &Region::Plane, &p, &ladder).unwrap();
    let b = minkowski_content(&trace.map_points(|z| 2.0 * z), &Region::Plane, &p, &ladder).unwrap();
    for (x, y) in a.raw.iter().zip(&b.raw) {
        assert_relative_eq!(*y, 2f64.powf(p.d) * x, max_relative = 1e-9);
    }
    assert_relative_eq!(b.value, 2f64.powf(p.d) * a.value, max_relative = 1e-6);
}

#[test]
fn empty_intersection_is_exactly_zero() {
    let p = params(2.0);
    let far = Region::disk(c(10.0, 10.0), 1.0).unwrap();
    let est = minkowski_content(&segment(1.0, 10), &far, &p, &Ladder::default()).unwrap();
    assert_eq!(est.value, 0.0);
    assert!(est.raw.iter().all(|&r| r == 0.0));
    assert_eq!(theta_in_set(&segment(1.0, 10), &far), 0.0);
}

#[test]
fn ladder_validation_and_budget() {
    assert!(Ladder::Explicit(vec![0.1, 0.2]).rungs(1.0).is_err());
    assert!(Ladder::Explicit(vec![0.1, -0.2]).rungs(1.0).is_err());
    assert!(Ladder::Relative { k0: 3, k1: 1 }.rungs(1.0).is_err());
    let p = params(2.0);
    let err = minkowski_content(&segment(1.0, 4), &Region::Plane, &p, &Ladder::Explicit(vec![1e-2, 1e-7]));
    match err {
        Err(SleError::ResourceLimit { suggested_floor, .. }) => {
            assert!(suggested_floor > 1e-7 && suggested_floor < 1e-2);
            let ok = Ladder::Explicit(vec![1e-2, suggested_floor * 1.01]);
            assert!(minkowski_content(&segment(1.0, 4), &Region::Plane, &p, &ok).is_ok());
        }
        other => panic!("expected a resource limit, got {other:?}"),
    }
}

#[test]
fn reversal_preserves_natural_length_exactly() {
    let p = params(4.0);
    let (trace, _) = sample_chordal(p.kappa, 0.3, 1e-4, 2).unwrap();
    let ladder = Ladder::Explicit(vec![0.4, 0.2, 0.1, 0.05]);
    let a = natural_length(&trace, &p, &ladder).unwrap();
    let b = natural_length(&reverse(&trace), &p, &ladder).unwrap();
    assert_eq!(a.value, b.value);
    let (fwd, _) = natural_reparam_with_estimate(&trace, &p, &ladder).unwrap();
    let (bwd, _) = natural_reparam_with_estimate(&reverse(&trace), &p, &ladder).unwrap();
    assert_eq!(fwd.duration(), bwd.duration());
}

#[test]
fn natural_time_of_koch_prefixes() {
    // self-similarity: each quarter of the Koch curve carries a quarter of
    // the content, and d = log 4 / log 3 corresponds to κ = 8(d - 1)
    let d = 4f64.ln() / 3f64.ln();
    let p = params(8.0 * (d - 1.0));
    let curve = koch(6);
    let ladder = Ladder::Relative { k0: 2, k1: 6 };
    let nat = natural_reparam(&curve, &p, &ladder).unwrap();
    let total = nat.duration();
    let n = curve.len() - 1;
    for q in 1..4 {
        let t = nat.times()[q * n / 4];
        assert!((t / total - q as f64 / 4.0).abs() < 0.02, "quarter {q}: {}", t / total);
    }
    assert!(nat.times().windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn natural_time_matches_content_of_prefixes() {
    let p = params(8.0 / 3.0);
    let (trace, _) = sample_chordal(p.kappa, 1.0, 2e-4, 9).unwrap();
    let ladder = Ladder::Explicit(vec![0.2, 0.1, 0.05, 0.025]);
    let (nat, est) = natural_reparam_with_estimate(&trace, &p, &ladder).unwrap();
    assert_eq!(nat.points(), trace.points());
    assert_relative_eq!(nat.duration(), est.value, max_relative = 1e-12);
    for j in 1..4 {
        let t = nat.duration() * j as f64 / 4.0;
        let k = nat.times().partition_point(|&s| s <= t);
        let prefix = nat.prefix(k - 1);
        let direct = minkowski_content(&prefix, &Region::Plane, &p, &ladder).unwrap().value;
        assert!((direct - prefix.duration()).abs() < 0.08 * nat.duration(), "{direct} vs {}", prefix.duration());
    }
}

#[test]
fn degenerate_traces_are_rejected() {
    let p = params(2.0);
    assert!(matches!(
        natural_reparam(&Curve::point(c(0.0, 1.0)), &p, &Ladder::default()),
        Err(SleError::Degenerate(_))
    ));
    assert!(matches!(
        natural_reparam(&Curve::uniform(vec![c(0.0, 1.0); 5], 1.0).unwrap(), &p, &Ladder::Explicit(vec![0.1, 0.05])),
        Err(SleError::Degenerate(_))
    ));
}

#[test]
fn occupation_time_examples() {
    let nat = Curve::from_fn(2.0, 100, |t| c(t, 0.3 * (3.0 * t).sin())).unwrap();
    let all = Region::Rect(Rect::new(-1.0, -1.0, 3.0, 1.0).unwrap());
    assert_relative_eq!(theta_in_set(&nat, &all), 2.0, epsilon = 1e-12);
    let q1 = Region::Rect(Rect::new(0.0, -1.0, 0.7, 1.0).unwrap());
    let q2 = Region::Rect(Rect::new(0.7, -1.0, 1.3, 1.0).unwrap());
    let q = Region::Rect(Rect::new(0.0, -1.0, 1.3, 1.0).unwrap());
    let gap = nat.times().windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    assert!((theta_in_set(&nat, &q) - theta_in_set(&nat, &q1) - theta_in_set(&nat, &q2)).abs() <= gap);
    assert_relative_eq!(theta_in_set(&nat, &q), 1.3, epsilon = 1e-12);
}

mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn occupation_is_additive_over_dyadic_subdivisions(seed in 0u64..10_000, k in 1usize..4) {
            let mut rng = crate::rng::PathRng::new(seed, 0);
            let mut z = c(0.0, 0.0);
            let pts: Vec<C64> = (0..200).map(|_| { z += c(rng.normal(), rng.normal()) * 0.05; z }).collect();
            let nat = Curve::uniform(pts, 1.0).unwrap();
            let sq = Rect::square(c(0.0, 0.0), 0.8).unwrap();
            let whole = theta_in_set(&nat, &Region::Rect(sq));
            let parts: f64 = sq.subdivide(1 << k).into_iter().map(|r| theta_in_set(&nat, &Region::Rect(r))).sum();
            let gap = 1.0 / 199.0;
            // each grid line crossing is counted on both sides at most once
            let crossings = nat.points().windows(2).filter(|w| (w[0].re * (1 << k) as f64 / 0.8).floor() != (w[1].re * (1 << k) as f64 / 0.8).floor()
                || (w[0].im * (1 << k) as f64 / 0.8).floor() != (w[1].im * (1 << k) as f64 / 0.8).floor()).count();
            prop_assert!((whole - parts).abs() <= (crossings as f64 * gap).max(1e-12));
        }
    }
}
