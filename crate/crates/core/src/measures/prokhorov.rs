//! Exact Prokhorov distance between atomic measures.
//!
//! For atomic `μ, ν` with `M = |μ| ∨ |ν|` and `F(δ)` the maximum transport
//! between them along pairs at curve distance `≤ δ`, Hall's theorem gives
//! `sup_B (μ(B) - ν(B^ε)) = |μ| - F(δ)` for every `ε` in `(δ_k, δ_{k+1}]`
//! between consecutive pair distances, and the same for the symmetric
//! condition. Both hold iff `ε ≥ M - F(δ_k)`, so
//! `d(μ, ν) = min_k max(δ_k, M - F(δ_k))` over `δ_0 = 0` and all pair
//! distances. `M - F` is nonincreasing in `k`, so the minimum sits at the
//! crossing found by bisection over the sorted distances.

use super::flow::bipartite_max_flow;
use super::PathEnsemble;
use crate::curvespace::{dist_dc, dist_dd_upper_capped, Curve, CurveMetricKind};
use crate::error::{invalid, Result};
use rayon::prelude::*;

/// Relative slack under which a transport deficit counts as zero.
const DEFICIT_TOL: f64 = 1e-12;

/// Prokhorov distance built on the chosen curve metric.
pub fn prokhorov(a: &PathEnsemble, b: &PathEnsemble, kind: CurveMetricKind) -> f64 {
    match kind {
        CurveMetricKind::LinearReparam => prokhorov_by(a, b, |x, y, _| dist_dc(x, y)),
        CurveMetricKind::Reparam => prokhorov_by(a, b, dist_dd_upper_capped),
    }
}

/// Prokhorov distance for an arbitrary curve distance. `dist(x, y, cap)` may
/// return any value `≥ cap` once the true distance is known to reach `cap`.
pub fn prokhorov_by<F>(a: &PathEnsemble, b: &PathEnsemble, dist: F) -> f64
where
    F: Fn(&Curve, &Curve, f64) -> f64 + Sync,
{
    if a.is_empty() || b.is_empty() {
        return a.total_mass().max(b.total_mass());
    }
    let m = a.total_mass().max(b.total_mass());
    let mut cap = m / 8.0;
    loop {
        let full = cap >= m;
        let cap_now = if full { f64::INFINITY } else { cap };
        let edges: Vec<(usize, usize, f64)> = (0..a.len())
            .into_par_iter()
            .flat_map_iter(|i| {
                let x = &a.curves()[i];
                let dist = &dist;
                b.curves().iter().enumerate().filter_map(move |(j, y)| {
                    let d = dist(x, y, cap_now);
                    (d < cap_now).then_some((i, j, d))
                })
            })
            .collect();
        let (d, settled) = solve(a.weights(), b.weights(), edges, m);
        if settled || full || d < cap {
            return d.min(m);
        }
        cap *= 2.0;
    }
}

/// Prokhorov distance from a full distance matrix (`da.len() × db.len()`,
/// row major).
pub fn prokhorov_matrix(wa: &[f64], wb: &[f64], dist: &[f64]) -> f64 {
    let ma: f64 = wa.iter().sum();
    let mb: f64 = wb.iter().sum();
    if wa.is_empty() || wb.is_empty() {
        return ma.max(mb);
    }
    let nb = wb.len();
    let edges = dist.iter().enumerate().map(|(k, &d)| (k / nb, k % nb, d)).collect();
    solve(wa, wb, edges, ma.max(mb)).0.min(ma.max(mb))
}

/// Minimise `max(δ, M - F(δ))` over the listed pair distances. Returns the
/// value and whether it is certified without looking at longer pairs.
fn solve(wa: &[f64], wb: &[f64], mut edges: Vec<(usize, usize, f64)>, m: f64) -> (f64, bool) {
    edges.sort_by(|x, y| x.2.total_cmp(&y.2));
    let mut thresholds: Vec<f64> = vec![0.0];
    for e in &edges {
        if e.2 > *thresholds.last().unwrap() {
            thresholds.push(e.2);
        }
    }
    let memo = std::cell::RefCell::new(vec![None; thresholds.len()]);
    let deficit = |k: usize| -> f64 {
        if let Some(d) = memo.borrow()[k] {
            return d;
        }
        let end = edges.partition_point(|e| e.2 <= thresholds[k]);
        let f = bipartite_max_flow(wa, wb, edges[..end].iter().map(|e| (e.0, e.1)));
        let d = if m - f <= DEFICIT_TOL * m { 0.0 } else { m - f };
        memo.borrow_mut()[k] = Some(d);
        d
    };
    // first k with thresholds[k] >= deficit(k)
    let (mut lo, mut hi) = (0usize, thresholds.len());
    while lo < hi {
        let mid = (lo + hi) / 2;
        if thresholds[mid] >= deficit(mid) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    if lo < thresholds.len() {
        let prev = if lo == 0 { f64::INFINITY } else { deficit(lo - 1) };
        (thresholds[lo].min(prev), true)
    } else {
        // every listed threshold is below its deficit; longer pairs decide
        (deficit(thresholds.len() - 1), false)
    }
}

/// Check `||μ| - |ν|| ≤ d(μ, ν) ≤ |μ| ∨ |ν|` for the computed distance.
pub fn total_mass_bounds_check(a: &PathEnsemble, b: &PathEnsemble, kind: CurveMetricKind) -> bool {
    let d = prokhorov(a, b, kind);
    let (ma, mb) = (a.total_mass(), b.total_mass());
    let tol = 1e-12 * ma.max(mb).max(1.0);
    (ma - mb).abs() <= d + tol && d <= ma.max(mb) + tol
}

/// `d_S(μ, ν) = |log(|μ| / |ν|)| + d_D(μ^#, ν^#)`, with `d_D` realized by the
/// alignment upper bound.
pub fn dist_ds(a: &PathEnsemble, b: &PathEnsemble) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(invalid("d_S needs two measures of positive mass"));
    }
    let log_gap = (a.total_mass() / b.total_mass()).ln().abs();
    Ok(log_gap + prokhorov(&a.normalized()?, &b.normalized()?, CurveMetricKind::Reparam))
}

/// Check the mixture contraction
/// `d(Σ a_i μ_i, Σ a_i ν_i) ≤ sup_i d(μ_i, ν_i)` for weights summing to 1.
pub fn weighted_average_identity_check(
    mus: &[PathEnsemble],
    nus: &[PathEnsemble],
    weights: &[f64],
    kind: CurveMetricKind,
) -> Result<bool> {
    if mus.len() != nus.len() || mus.len() != weights.len() {
        return Err(invalid("families and weights must have equal length"));
    }
    if weights.iter().any(|&w| !(w >= 0.0)) || (weights.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(invalid("weights must be nonnegative and sum to 1"));
    }
    let lhs = prokhorov(
        &PathEnsemble::mixture(weights.iter().copied().zip(mus))?,
        &PathEnsemble::mixture(weights.iter().copied().zip(nus))?,
        kind,
    );
    let rhs = mus.iter().zip(nus).map(|(m, n)| prokhorov(m, n, kind)).fold(0.0, f64::max);
    Ok(lhs <= rhs + 1e-12 * (1.0 + rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal::c;
    use crate::rng::PathRng;

    fn seg(x: f64, y: f64) -> Curve {
        Curve::uniform(vec![c(0.0, 0.0), c(x, y)], 1.0).unwrap()
    }

    /// Prokhorov by definition: scan ε over a fine grid and test every
    /// subset `B` of atoms.
    fn brute_force(wa: &[f64], wb: &[f64], dist: &[f64]) -> f64 {
        let (n, m) = (wa.len(), wb.len());
        let ok = |eps: f64| {
            for mask in 0u32..(1 << n) {
                let mb: f64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| wa[i]).sum();
                let nb: f64 = (0..m)
                    .filter(|&j| (0..n).any(|i| mask >> i & 1 == 1 && dist[i * m + j] < eps))
                    .map(|j| wb[j])
                    .sum();
                if mb > nb + eps + 1e-12 {
                    return false;
                }
            }
            for mask in 0u32..(1 << m) {
                let nb: f64 = (0..m).filter(|j| mask >> j & 1 == 1).map(|j| wb[j]).sum();
                let ma: f64 = (0..n)
                    .filter(|&i| (0..m).any(|j| mask >> j & 1 == 1 && dist[i * m + j] < eps))
                    .map(|i| wa[i])
                    .sum();
                if nb > ma + eps + 1e-12 {
                    return false;
                }
            }
            true
        };
        let (mut lo, mut hi) = (0.0, wa.iter().sum::<f64>().max(wb.iter().sum()) + 1e-9);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if ok(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }

    #[test]
    fn agrees_with_definition_on_small_measures() {
        let mut rng = PathRng::new(5, 0);
        for _ in 0..300 {
            let n = 1 + (rng.uniform() * 4.0) as usize;
            let m = 1 + (rng.uniform() * 4.0) as usize;
            let wa: Vec<f64> = (0..n).map(|_| 0.05 + rng.uniform() * 0.4).collect();
            let wb: Vec<f64> = (0..m).map(|_| 0.05 + rng.uniform() * 0.4).collect();
            let dist: Vec<f64> = (0..n * m).map(|_| (rng.uniform() * 8.0).floor() * 0.07).collect();
            let exact = prokhorov_matrix(&wa, &wb, &dist);
            let bf = brute_force(&wa, &wb, &dist);
            assert!((exact - bf).abs() < 1e-9, "{exact} vs {bf}");
        }
    }

    #[test]
    fn two_point_masses() {
        let a = PathEnsemble::new(vec![(1.0, seg(0.0, 1.0))]).unwrap();
        let b = PathEnsemble::new(vec![(1.0, seg(0.3, 1.0))]).unwrap();
        for kind in [CurveMetricKind::LinearReparam, CurveMetricKind::Reparam] {
            assert!((prokhorov(&a, &b, kind) - 0.3).abs() < 1e-12);
            assert_eq!(prokhorov(&a, &a, kind), 0.0);
        }
        // far apart: capped by the unit mass
        let far = PathEnsemble::new(vec![(1.0, seg(5.0, 1.0))]).unwrap();
        assert_eq!(prokhorov(&a, &far, CurveMetricKind::LinearReparam), 1.0);
    }

    #[test]
    fn scaling_and_empty_cases() {
        let e = PathEnsemble::new(vec![(0.4, seg(0.0, 1.0)), (0.6, seg(1.0, 1.0)), (0.5, seg(0.2, 0.3))]).unwrap();
        let s = e.scale(1.5).unwrap();
        let d = prokhorov(&e, &s, CurveMetricKind::Reparam);
        assert!((d - 0.5 * e.total_mass()).abs() < 1e-12);
        let z = PathEnsemble::empty();
        assert_eq!(prokhorov(&e, &z, CurveMetricKind::Reparam), e.total_mass());
        assert_eq!(prokhorov(&z, &z, CurveMetricKind::Reparam), 0.0);
        assert!(total_mass_bounds_check(&e, &z, CurveMetricKind::Reparam));
        assert!(total_mass_bounds_check(&e, &s, CurveMetricKind::LinearReparam));
    }

    #[test]
    fn ds_examples() {
        let e = PathEnsemble::new(vec![(0.4, seg(0.0, 1.0)), (0.6, seg(1.0, 1.0))]).unwrap();
        assert_eq!(dist_ds(&e, &e).unwrap(), 0.0);
        let s = e.scale(std::f64::consts::E).unwrap();
        assert!((dist_ds(&e, &s).unwrap() - 1.0).abs() < 1e-12);
        assert!(dist_ds(&e, &PathEnsemble::empty()).is_err());
    }

    #[test]
    fn mixture_contraction_small() {
        let mu = vec![
            PathEnsemble::new(vec![(1.0, seg(0.0, 1.0))]).unwrap(),
            PathEnsemble::new(vec![(0.5, seg(1.0, 1.0)), (0.5, seg(1.0, 2.0))]).unwrap(),
        ];
        let nu = vec![
            PathEnsemble::new(vec![(1.0, seg(0.1, 1.0))]).unwrap(),
            PathEnsemble::new(vec![(0.5, seg(1.2, 1.0)), (0.5, seg(1.0, 2.05))]).unwrap(),
        ];
        assert!(weighted_average_identity_check(&mu, &nu, &[0.3, 0.7], CurveMetricKind::LinearReparam).unwrap());
        assert!(weighted_average_identity_check(&mu, &mu, &[0.5, 0.5], CurveMetricKind::Reparam).unwrap());
        assert!(weighted_average_identity_check(&mu, &nu, &[0.5, 0.6], CurveMetricKind::Reparam).is_err());
    }
}
