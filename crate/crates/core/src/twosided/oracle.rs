//! Reweighted-chordal oracle for the two-sided law, escape statistics and
//! Radon–Nikodym comparisons of ensembles stopped on a circle.

use crate::conformal::C64;
use crate::curvespace::Curve;
use crate::error::{invalid, Result, SleError};
use crate::green::{green_config, green_integral_rect, Configuration, GreenParams};
use crate::measures::{PathEnsemble, Rect};
use crate::stats::wilson_interval_p;
use serde::Serialize;

/// Chordal traces passing within `ε` of `ζ`, each weighted `ε^{d-2}/N`.
#[derive(Clone, Debug)]
pub struct OracleEnsemble {
    pub ensemble: PathEnsemble,
    pub eps: f64,
    pub survivors: usize,
    pub total: usize,
    /// `ε^{d-2} P̂{dist(γ, ζ) < ε}`.
    pub mass: f64,
    pub mass_stderr: f64,
}

impl OracleEnsemble {
    /// Probability measure with equal weights on the survivors.
    pub fn normalized(&self) -> Result<PathEnsemble> {
        self.ensemble.normalized()
    }
}

pub fn oracle_reweighted(traces: &[Curve], zeta: C64, eps: f64, p: &GreenParams) -> Result<OracleEnsemble> {
    if !(eps > 0.0) {
        return Err(invalid(format!("oracle radius must be positive, got {eps}")));
    }
    let total = traces.len();
    let scale = eps.powf(p.d - 2.0);
    let kept: Vec<Curve> = traces.iter().filter(|c| c.distance_to(zeta) < eps).cloned().collect();
    let survivors = kept.len();
    if survivors == 0 {
        return Err(SleError::EmptyEnsemble { survivors, total });
    }
    let q = survivors as f64 / total as f64;
    let mass = scale * q;
    let mass_stderr = scale * (q * (1.0 - q) / total as f64).sqrt();
    let ensemble = PathEnsemble::uniform(kept, mass)?;
    Ok(OracleEnsemble { ensemble, eps, survivors, total, mass, mass_stderr })
}

/// First parameter at which the segment `[a, b]` meets the closed disk
/// `B(centre, r)`.
fn segment_entry(a: C64, b: C64, centre: C64, r: f64) -> Option<f64> {
    let d = b - a;
    let f = a - centre;
    if f.norm_sqr() <= r * r {
        return Some(0.0);
    }
    let qa = d.norm_sqr();
    if qa == 0.0 {
        return None;
    }
    let qb = 2.0 * (f.re * d.re + f.im * d.im);
    let qc = f.norm_sqr() - r * r;
    let disc = qb * qb - 4.0 * qa * qc;
    if disc < 0.0 {
        return None;
    }
    let s = (-qb - disc.sqrt()) / (2.0 * qa);
    (0.0..=1.0).contains(&s).then_some(s)
}

/// The curve up to its first hit of the circle `|z - centre| = r`, ending on
/// the circle; `None` if it never gets that close.
pub fn stop_at_circle(curve: &Curve, centre: C64, r: f64) -> Option<Curve> {
    let (t, p) = (curve.times(), curve.points());
    if (p[0] - centre).norm() <= r {
        return Some(Curve::point(p[0]));
    }
    for k in 1..p.len() {
        if let Some(s) = segment_entry(p[k - 1], p[k], centre, r) {
            let mut times = t[..k].to_vec();
            let mut points = p[..k].to_vec();
            times.push(t[k - 1] + s * (t[k] - t[k - 1]));
            points.push(p[k - 1] + (p[k] - p[k - 1]) * s);
            return Curve::new(times, points).ok();
        }
    }
    None
}

/// Argument of the first hitting point of the circle, seen from its centre.
pub fn circle_hit_angle(curve: &Curve, centre: C64, r: f64) -> Option<f64> {
    stop_at_circle(curve, centre, r).map(|c| (c.end() - centre).arg())
}

/// Escape probability `P{max |γ| ≥ r}` with a 95% Wilson interval.
#[derive(Clone, Debug, Serialize)]
pub struct EscapeRow {
    pub r: f64,
    pub p: f64,
    pub lo: f64,
    pub hi: f64,
    /// Effective sample size `(Σ w)² / Σ w²`.
    pub n_eff: f64,
}

pub fn escape_stat(curves: &[Curve], radii: &[f64]) -> Vec<EscapeRow> {
    escape_stat_weighted(curves, &vec![1.0; curves.len()], radii)
}

/// Escape probabilities under the probability measure proportional to the
/// weights. Zero-weight curves are ignored.
pub fn escape_stat_weighted(curves: &[Curve], weights: &[f64], radii: &[f64]) -> Vec<EscapeRow> {
    let reach: Vec<f64> = curves.iter().map(|c| c.points().iter().map(|z| z.norm()).fold(0.0, f64::max)).collect();
    let sw: f64 = weights.iter().sum();
    let sw2: f64 = weights.iter().map(|w| w * w).sum();
    let n_eff = if sw2 > 0.0 { sw * sw / sw2 } else { 0.0 };
    radii
        .iter()
        .map(|&r| {
            let p = if r <= 1.0 {
                1.0
            } else if sw > 0.0 {
                reach.iter().zip(weights).filter(|(m, _)| **m >= r).map(|(_, w)| w).sum::<f64>() / sw
            } else {
                0.0
            };
            let (lo, hi) = wilson_interval_p(p, n_eff, 1.96);
            EscapeRow { r, p, lo, hi, n_eff }
        })
        .collect()
}

/// Binned comparison of the first-hit angle on a circle under two weighted
/// ensembles.
#[derive(Clone, Debug, Serialize)]
pub struct RnReport {
    pub bin_edges: Vec<f64>,
    /// Normalized mass per bin.
    pub mass_a: Vec<f64>,
    pub mass_b: Vec<f64>,
    /// `log(mass_a / mass_b)` per bin.
    pub log_ratio: Vec<f64>,
    /// Largest `|log_ratio|`.
    pub spread: f64,
    /// Curves that never hit the circle, per ensemble.
    pub missed: (usize, usize),
}

/// Estimate the log Radon–Nikodym derivative between the laws of the first
/// hitting angle of `|z - centre| = r` under `a` and `b`, over `bins` equal
/// angular bins. Each bin needs an effective count of at least `min_count`
/// on both sides.
pub fn rn_comparison(
    a: &PathEnsemble,
    b: &PathEnsemble,
    centre: C64,
    r: f64,
    bins: usize,
    min_count: f64,
) -> Result<RnReport> {
    if bins == 0 {
        return Err(invalid("need at least one bin"));
    }
    let hist = |e: &PathEnsemble| {
        let mut m = vec![0.0; bins];
        let mut w2 = vec![0.0; bins];
        let mut missed = 0;
        for (w, c) in e.iter() {
            match circle_hit_angle(c, centre, r) {
                Some(th) => {
                    let u = (th + std::f64::consts::PI) / (2.0 * std::f64::consts::PI);
                    let k = ((u * bins as f64) as usize).min(bins - 1);
                    m[k] += w;
                    w2[k] += w * w;
                }
                None => missed += 1,
            }
        }
        let neff: Vec<f64> = m.iter().zip(&w2).map(|(s, q)| if *q > 0.0 { s * s / q } else { 0.0 }).collect();
        let tot: f64 = m.iter().sum();
        (m.into_iter().map(|x| x / tot).collect::<Vec<f64>>(), neff, missed)
    };
    let (ma, na, xa) = hist(a);
    let (mb, nb, xb) = hist(b);
    let thin: Vec<usize> = (0..bins).filter(|&k| na[k] < min_count || nb[k] < min_count).collect();
    if !thin.is_empty() {
        let detail: Vec<String> = thin.iter().map(|&k| format!("bin {k}: {:.1} vs {:.1}", na[k], nb[k])).collect();
        return Err(SleError::InsufficientOverlap(format!(
            "effective counts below {min_count}: {}",
            detail.join(", ")
        )));
    }
    let log_ratio: Vec<f64> = ma.iter().zip(&mb).map(|(x, y)| (x / y).ln()).collect();
    let spread = log_ratio.iter().fold(0.0f64, |s, v| s.max(v.abs()));
    let pi = std::f64::consts::PI;
    let bin_edges = (0..=bins).map(|k| -pi + 2.0 * pi * k as f64 / bins as f64).collect();
    Ok(RnReport { bin_edges, mass_a: ma, mass_b: mb, log_ratio, spread, missed: (xa, xb) })
}

/// `log(∫_Q G / (G(ζ) A(Q)))` for the square `Q` of side `side` centred at
/// `ζ`, by quadrature. Zero for a degenerate square.
pub fn tmass_log_ratio(cfg: &Configuration, zeta: C64, side: f64, p: &GreenParams, tol: f64) -> Result<f64> {
    if side == 0.0 {
        return Ok(0.0);
    }
    let q = Rect::square(zeta, side)?;
    let g0 = green_config(cfg, zeta, p)?;
    Ok((green_integral_rect(cfg, &q, p, tol) / (g0 * q.area())).ln())
}
