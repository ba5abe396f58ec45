//! The ε-neighbourhood area of chordal SLE scales like ε^{2-d}.

use sle_core::content::{natural_length, Ladder};
use sle_core::green::GreenParams;
use sle_core::loewner::sample_chordal_path;
use sle_core::stats::linear_fit;

fn area_slope(kappa: f64) -> f64 {
    let p = GreenParams::new(kappa).unwrap();
    let eps = vec![0.04, 0.028, 0.02, 0.014, 0.01];
    let mut log_area = vec![0.0; eps.len()];
    let traces = 4;
    for k in 0..traces {
        let (curve, _) = sample_chordal_path(kappa, 1.0, 2.5e-6, 2024, k).unwrap();
        let est = natural_length(&curve, &p, &Ladder::Explicit(eps.clone())).unwrap();
        for (j, (raw, e)) in est.raw.iter().zip(&eps).enumerate() {
            log_area[j] += (raw * e.powf(2.0 - p.d)).ln() / traces as f64;
        }
    }
    let xs: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
    linear_fit(&xs, &log_area).slope
}

#[test]
fn neighbourhood_area_exponent_matches_dimension() {
    for kappa in [2.0, 8.0 / 3.0, 4.0] {
        let want = 1.0 - kappa / 8.0;
        let got = area_slope(kappa);
        assert!((got - want).abs() <= 0.1, "κ = {kappa}: slope {got:.3}, expected {want:.3}");
    }
}
