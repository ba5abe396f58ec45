//! Reversibility of two-sided radial SLE in the disk through 0.
//!
//! Rotating the reversed curve by π gives a path from -1 to 1 through 0
//! again, which must have the same law as the original.

use rayon::prelude::*;
use sle_core::conformal::c;
use sle_core::curvespace::reverse;
use sle_core::green::Configuration;
use sle_core::stats::ks_two_sample;
use sle_core::twosided::{circle_hit_angle, sample_twosided, TwoSidedOptions};

#[test]
fn rotated_reversal_has_the_same_first_hit_angle_law() {
    let kappa = 8.0 / 3.0;
    let cfg = Configuration::disk(kappa, c(-1.0, 0.0), c(1.0, 0.0)).unwrap();
    let opts = TwoSidedOptions { natural: false, ..TwoSidedOptions::new(0.05) };
    let n = 240u64;
    let curves: Vec<_> =
        (0..n).into_par_iter().filter_map(|k| sample_twosided(&cfg, c(0.0, 0.0), 0.01, &opts, 71, k).ok()).collect();
    assert!(curves.len() as u64 >= n * 9 / 10, "{} of {n} samples", curves.len());
    let half = curves.len() / 2;
    let forward: Vec<f64> =
        curves[..half].iter().map(|s| circle_hit_angle(&s.curve, c(0.0, 0.0), 0.5).unwrap()).collect();
    let reversed: Vec<f64> = curves[half..]
        .iter()
        .map(|s| circle_hit_angle(&reverse(&s.curve).map_points(|z| -z), c(0.0, 0.0), 0.5).unwrap())
        .collect();
    let (d, p) = ks_two_sample(&forward, &reversed);
    assert!(p > 1e-3, "KS distance {d:.3}, p = {p:.2e}");
    // the statistic must actually see the start: from -1 the hit sits near π
    let near_start = forward.iter().filter(|a| a.abs() > std::f64::consts::FRAC_PI_2).count();
    assert!(near_start * 10 >= forward.len() * 9);
}
