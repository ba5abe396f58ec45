use super::*;
use crate::conformal::c;
use crate::green::{green_halfplane, Configuration};
use crate::measures::PathEnsemble;
use approx::assert_relative_eq;

fn params(kappa: f64) -> GreenParams {
    GreenParams::new(kappa).unwrap()
}

#[test]
fn drift_vanishes_on_the_symmetry_axis() {
    let p = params(8.0 / 3.0);
    let s = TiltState::new(c(0.0, 1.3)).unwrap();
    assert_eq!(s.drift(&p), 0.0);
    // and pushes the driver towards the target
    assert!(tilt_drift(p.a, c(0.5, 1.0)) > 0.0);
    assert!(tilt_drift(p.a, c(-0.5, 1.0)) < 0.0);
}

#[test]
fn drift_matches_finite_differences() {
    for kappa in [1.0, 2.0, 8.0 / 3.0, 4.0] {
        let err = drift_fd_check(&params(kappa), 1000, 3).unwrap();
        assert!(err < 1e-6, "κ = {kappa}: {err:e}");
    }
}

#[test]
fn log_martingale_at_time_zero_is_the_green_function() {
    let p = params(3.0).with_constant(0.7).unwrap();
    for z in [c(0.3, 0.4), c(-2.0, 0.1), c(0.0, 5.0)] {
        assert_relative_eq!(log_martingale(&p, 0.0, z), green_halfplane(z, &p).unwrap().ln(), epsilon = 1e-12);
    }
    // covariance under the scaling z ↦ λz, for which |g'| = λ
    let (z, lam) = (c(0.3, 0.4), 2.5f64);
    assert_relative_eq!(
        log_martingale(&p, lam.ln(), z * lam),
        green_halfplane(z, &p).unwrap().ln(),
        epsilon = 1e-12
    );
}

#[test]
fn martingale_mean_is_flat() {
    let p = params(8.0 / 3.0);
    let checkpoints: Vec<f64> = (1..=5).map(|k| 0.2 * k as f64).collect();
    let rep = martingale_check(&p, c(0.2, 1.0), &checkpoints, 600, 2e-3, 1e-2, 11).unwrap();
    assert!(rep.max_z < 4.0, "{rep:?}");
    assert!(rep.stopped.windows(2).all(|w| w[1] >= w[0]));
    assert!(martingale_check(&p, c(0.0, 1.0), &[0.2, 0.1], 10, 1e-3, 1e-2, 0).is_err());
}

#[test]
fn twosided_paths_pass_through_the_target() {
    let cfg = Configuration::disk(8.0 / 3.0, c(-1.0, 0.0), c(1.0, 0.0)).unwrap();
    let zeta = c(0.1, 0.2);
    let r = default_stop_radius(&cfg, zeta).unwrap();
    let opts = TwoSidedOptions::new(0.05);
    for path in 0..3 {
        let s = sample_twosided(&cfg, zeta, r, &opts, 5, path).unwrap();
        let curve = &s.curve;
        assert!((curve.start() - c(-1.0, 0.0)).norm() < 1e-9);
        assert_eq!(curve.end(), c(1.0, 0.0));
        assert_eq!(curve.points()[s.hit_index], zeta);
        assert!(s.stop_distance <= r);
        assert!(s.hit_time > 0.0 && s.hit_time < curve.duration());
        assert_eq!(curve.eval(s.hit_time), zeta);
        assert!(curve.points().iter().all(|z| z.norm() <= 1.0 + 1e-9));
    }
}

#[test]
fn stop_distance_shrinks_with_the_stop_radius() {
    let cfg = Configuration::disk(2.0, c(-1.0, 0.0), c(1.0, 0.0)).unwrap();
    let zeta = c(0.0, 0.0);
    let opts = TwoSidedOptions::new(0.05);
    let mean_stop = |r: f64| {
        let d: Vec<f64> = (0..6)
            .map(|k| {
                let (mut chain, _, _) = grow_tilted(&cfg, zeta, r, &opts, 9, k).unwrap();
                let d = (chain.tip_domain() - zeta).norm();
                assert!(d <= r);
                d
            })
            .collect();
        d.iter().sum::<f64>() / d.len() as f64
    };
    assert!(mean_stop(0.01) < mean_stop(0.04));
}

#[test]
fn sampler_preconditions() {
    let cfg = Configuration::disk(2.0, c(-1.0, 0.0), c(1.0, 0.0)).unwrap();
    let opts = TwoSidedOptions::new(0.05);
    assert!(matches!(sample_twosided(&cfg, c(0.0, 0.0), 0.3, &opts, 0, 0), Err(SleError::Precondition(_))));
    assert!(sample_twosided(&cfg, c(2.0, 0.0), 0.01, &opts, 0, 0).is_err());
}

#[test]
fn circle_stopping() {
    let line = Curve::from_fn(4.0, 5, |t| c(t - 2.0, 0.5)).unwrap();
    let cut = stop_at_circle(&line, c(0.0, 0.0), 1.0).unwrap();
    let x = -(0.75f64).sqrt();
    assert_relative_eq!(cut.end().re, x, epsilon = 1e-12);
    assert_relative_eq!(cut.duration(), x + 2.0, epsilon = 1e-12);
    assert_relative_eq!(circle_hit_angle(&line, c(0.0, 0.0), 1.0).unwrap(), (c(x, 0.5)).arg(), epsilon = 1e-12);
    assert!(stop_at_circle(&line, c(0.0, 0.0), 0.4).is_none());
    assert_eq!(stop_at_circle(&line, c(-2.0, 0.5), 0.1).unwrap().len(), 1);
}

#[test]
fn oracle_weights_and_empty_ensembles() {
    let p = params(2.0);
    let curves: Vec<Curve> =
        (0..10).map(|k| Curve::from_fn(1.0, 3, |t| c(t, 0.1 * k as f64)).unwrap()).collect();
    let o = oracle_reweighted(&curves, c(0.5, 0.0), 0.15, &p).unwrap();
    assert_eq!((o.survivors, o.total), (2, 10));
    assert_relative_eq!(o.mass, 0.15f64.powf(p.d - 2.0) * 0.2, epsilon = 1e-12);
    assert_relative_eq!(o.normalized().unwrap().total_mass(), 1.0, epsilon = 1e-12);
    match oracle_reweighted(&curves, c(0.5, 5.0), 0.15, &p) {
        Err(SleError::EmptyEnsemble { survivors: 0, total: 10 }) => {}
        other => panic!("{other:?}"),
    }
}

#[test]
fn escape_probabilities() {
    let curves: Vec<Curve> = (1..=4).map(|k| Curve::uniform(vec![c(-1.0, 0.0), c(0.0, k as f64), c(1.0, 0.0)], 1.0).unwrap()).collect();
    let rows = escape_stat(&curves, &[0.5, 1.0, 2.0, 3.5, 5.0]);
    let ps: Vec<f64> = rows.iter().map(|r| r.p).collect();
    assert_eq!(ps, vec![1.0, 1.0, 0.75, 0.25, 0.0]);
    assert!(rows.iter().all(|r| r.lo <= r.p && r.p <= r.hi));
    let w = escape_stat_weighted(&curves, &[0.0, 0.0, 1.0, 3.0], &[3.5]);
    assert_relative_eq!(w[0].p, 0.75);
    assert_relative_eq!(w[0].n_eff, 1.6);
}

#[test]
fn rn_comparison_of_identical_and_disjoint_laws() {
    let mk = |angles: &[f64]| {
        let curves = angles.iter().map(|&th| Curve::uniform(vec![C64::from_polar(2.0, th), c(0.0, 0.0)], 1.0).unwrap()).collect();
        PathEnsemble::uniform(curves, 1.0).unwrap()
    };
    let angles: Vec<f64> = (0..400).map(|k| -3.1 + 6.2 * k as f64 / 400.0).collect();
    let rep = rn_comparison(&mk(&angles), &mk(&angles), c(0.0, 0.0), 1.0, 4, 10.0).unwrap();
    assert!(rep.spread < 1e-12);
    let upper: Vec<f64> = angles.iter().map(|t| t.abs()).collect();
    assert!(matches!(
        rn_comparison(&mk(&angles), &mk(&upper), c(0.0, 0.0), 1.0, 4, 10.0),
        Err(SleError::InsufficientOverlap(_))
    ));
}

#[test]
fn total_mass_ratio_shrinks_with_the_square() {
    let p = params(8.0 / 3.0);
    let cfg = Configuration::disk(p.kappa, c(-1.0, 0.0), c(1.0, 0.0)).unwrap();
    let zeta = c(0.1, 0.1);
    assert_eq!(tmass_log_ratio(&cfg, zeta, 0.0, &p, 1e-9).unwrap(), 0.0);
    let r: Vec<f64> = (2..6).map(|k| tmass_log_ratio(&cfg, zeta, 0.5f64.powi(k), &p, 1e-10).unwrap().abs()).collect();
    assert!(r.windows(2).all(|w| w[1] < w[0]), "{r:?}");
    // smooth integrand: the ratio is 1 + O(side²)
    assert!(r[3] < 0.3 * r[2]);
}
