//! Monotone vertex alignments between two polylines.
//!
//! An alignment is a staircase path through the vertex-pair grid from
//! `(0, 0)` to `(n - 1, m - 1)`. Interpolating linearly between consecutive
//! path nodes gives continuous nondecreasing reparametrizations whose time
//! gap and point gap are both maximized at nodes, so the cost
//! `max |Δt| + max |Δp|` of any path is attained by a real reparametrization
//! pair. Minimizing it over all paths is a two-criteria bottleneck problem,
//! solved exactly by walking its Pareto staircase.

use super::Curve;

const MAX_PARETO_STEPS: usize = 256;
const PROBES: usize = 6;

/// Upper bound for `d_D(a, b)`: the optimal vertex-alignment cost.
pub fn dist_dd_upper(a: &Curve, b: &Curve) -> f64 {
    dist_dd_upper_capped(a, b, f64::INFINITY)
}

/// Like [`dist_dd_upper`] but allowed to return any value `≥ cap` as soon as
/// the result is known to be at least `cap`.
pub fn dist_dd_upper_capped(a: &Curve, b: &Curve, cap: f64) -> f64 {
    let lb = dd_lower_bound(a, b);
    if lb >= cap {
        return lb;
    }
    let (n, m) = (a.len(), b.len());
    let mut dt = vec![0.0; n * m];
    let mut dp = vec![0.0; n * m];
    for i in 0..n {
        let (ti, pi) = (a.times[i], a.points[i]);
        for j in 0..m {
            dt[i * m + j] = (ti - b.times[j]).abs();
            dp[i * m + j] = (pi - b.points[j]).norm();
        }
    }
    let mut scratch = vec![0.0; m];
    let mut best = f64::INFINITY;
    let mut p_limit = f64::INFINITY;
    for _ in 0..MAX_PARETO_STEPS {
        let tau = bottleneck(n, m, &dt, |k| dp[k] < p_limit, &mut scratch);
        if !tau.is_finite() || tau >= best.min(cap) {
            break;
        }
        let p = bottleneck(n, m, &dp, |k| dt[k] <= tau, &mut scratch);
        best = best.min(tau + p);
        p_limit = p;
    }
    best
}

/// Lower bound for `d_D(a, b)`: duration gap plus the largest of the start
/// gap, the end gap and the directed Hausdorff distances from a few probe
/// vertices of each curve to the other polyline.
pub fn dd_lower_bound(a: &Curve, b: &Curve) -> f64 {
    let mut p = (a.start() - b.start()).norm().max((a.end() - b.end()).norm());
    for (x, y) in [(a, b), (b, a)] {
        let last = x.len() - 1;
        for k in 1..PROBES {
            p = p.max(y.distance_to(x.points[k * last / PROBES]));
        }
    }
    (a.duration() - b.duration()).abs() + p
}

/// Minimal over staircase paths of the maximal `cost` on the path, using only
/// cells where `allowed` holds; infinity if no path exists.
fn bottleneck(n: usize, m: usize, cost: &[f64], allowed: impl Fn(usize) -> bool, row: &mut [f64]) -> f64 {
    const INF: f64 = f64::INFINITY;
    for i in 0..n {
        let mut diag_prev = INF;
        for j in 0..m {
            let k = i * m + j;
            let up = row[j];
            let best_prev = if i == 0 && j == 0 {
                f64::NEG_INFINITY
            } else {
                let left = if j > 0 { row[j - 1] } else { INF };
                let up = if i > 0 { up } else { INF };
                let diag = if i > 0 && j > 0 { diag_prev } else { INF };
                left.min(up).min(diag)
            };
            diag_prev = up;
            row[j] = if allowed(k) && best_prev < INF { cost[k].max(best_prev) } else { INF };
        }
    }
    row[m - 1]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal::c;
    use crate::curvespace::{dist_dc, Curve};

    fn ramp(k: i32, n: usize) -> Curve {
        let s = 2f64.powi(k);
        Curve::from_fn(1.0, n, |t| c((s * t).min(1.0), 0.0)).unwrap()
    }

    /// Exhaustive minimum over all staircase paths, for tiny grids.
    fn brute(a: &Curve, b: &Curve) -> f64 {
        fn rec(a: &Curve, b: &Curve, i: usize, j: usize, t: f64, p: f64, best: &mut f64) {
            let t = t.max((a.times()[i] - b.times()[j]).abs());
            let p = p.max((a.points()[i] - b.points()[j]).norm());
            if i + 1 == a.len() && j + 1 == b.len() {
                *best = best.min(t + p);
                return;
            }
            if i + 1 < a.len() {
                rec(a, b, i + 1, j, t, p, best);
            }
            if j + 1 < b.len() {
                rec(a, b, i, j + 1, t, p, best);
            }
            if i + 1 < a.len() && j + 1 < b.len() {
                rec(a, b, i + 1, j + 1, t, p, best);
            }
        }
        let mut best = f64::INFINITY;
        rec(a, b, 0, 0, 0.0, 0.0, &mut best);
        best
    }

    #[test]
    fn identical_curves_have_zero_distance() {
        let g = ramp(2, 30);
        assert_eq!(dist_dd_upper(&g, &g), 0.0);
    }

    #[test]
    fn dyadic_ramps_are_close_under_reparametrization() {
        let n = 1024;
        for (m, k) in [(1, 2), (1, 3), (2, 4)] {
            let d = dist_dd_upper(&ramp(m, n), &ramp(k, n));
            let slack = 2f64.powi(k) / n as f64;
            assert!(d <= 2f64.powi(-m) + slack, "m={m} n={k} d={d}");
            assert!(dist_dc(&ramp(m, n), &ramp(k, n)) >= 0.5 - 1e-12);
        }
    }

    #[test]
    fn matches_exhaustive_search_on_small_grids() {
        use crate::rng::PathRng;
        let mut rng = PathRng::new(11, 0);
        for _ in 0..200 {
            let mk = |rng: &mut PathRng, n: usize| {
                let mut t = 0.0;
                let mut times = vec![0.0];
                let mut pts = vec![c(rng.normal(), rng.normal())];
                for _ in 1..n {
                    t += rng.uniform();
                    times.push(t);
                    pts.push(c(rng.normal(), rng.normal()));
                }
                Curve::new(times, pts).unwrap()
            };
            let na = 1 + (rng.uniform() * 5.0) as usize;
            let nb = 1 + (rng.uniform() * 5.0) as usize;
            let a = mk(&mut rng, na);
            let b = mk(&mut rng, nb);
            let fast = dist_dd_upper(&a, &b);
            let slow = brute(&a, &b);
            assert!((fast - slow).abs() < 1e-12, "{fast} vs {slow}");
            assert!(dd_lower_bound(&a, &b) <= fast + 1e-12);
            assert_eq!(fast, dist_dd_upper(&b, &a));
        }
    }
}
