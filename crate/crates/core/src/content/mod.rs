//! Minkowski content of discretized traces, natural reparametrization and
//! the natural time a trace spends in a region.
//!
//! Content at scale `ε` is `raw(ε) = ε^{d-2} Area{p : dist(p, γ ∩ S) < ε}`,
//! measured on a pixel grid of pitch `ε/8`. The limit is extrapolated by
//! fitting `raw(ε) = v + b ε^θ` with `θ ∈ [0.05, 1]`.

mod raster;

use crate::conformal::{c, C64};
use crate::curvespace::Curve;
use crate::error::{invalid, Result, SleError};
use crate::green::GreenParams;
use crate::measures::Rect;
use raster::Raster;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Pixels per `ε` are `PITCH_DIVISOR`.
pub const PITCH_DIVISOR: f64 = 8.0;
/// Largest pixel grid allowed for one rung.
pub const MAX_PIXELS: f64 = (1u64 << 28) as f64;
/// Checkpoints used by [`natural_reparam`].
pub const NATURAL_CHECKPOINTS: usize = 64;
const THETA_RANGE: (f64, f64) = (0.05, 1.0);
const THETA_STEPS: usize = 190;

/// Region predicate for content and occupation time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Region {
    Plane,
    Rect(Rect),
    Disk { centre: C64, radius: f64 },
}

impl Region {
    pub fn disk(centre: C64, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(invalid(format!("disk radius must be positive, got {radius}")));
        }
        Ok(Region::Disk { centre, radius })
    }

    /// Closed membership.
    pub fn contains(&self, p: C64) -> bool {
        match *self {
            Region::Plane => true,
            Region::Rect(r) => p.re >= r.x0 && p.re <= r.x1 && p.im >= r.y0 && p.im <= r.y1,
            Region::Disk { centre, radius } => (p - centre).norm() <= radius,
        }
    }

    pub fn diameter(&self) -> f64 {
        match *self {
            Region::Plane => f64::INFINITY,
            Region::Rect(r) => r.diagonal(),
            Region::Disk { radius, .. } => 2.0 * radius,
        }
    }

    /// Parameter interval `[s0, s1] ⊆ [0, 1]` of `a + s (b - a)` inside the
    /// region (regions are convex).
    pub fn clip(&self, a: C64, b: C64) -> Option<(f64, f64)> {
        let d = b - a;
        match *self {
            Region::Plane => Some((0.0, 1.0)),
            Region::Rect(r) => {
                let (mut s0, mut s1) = (0.0f64, 1.0f64);
                for (p, q, lo, hi) in [(a.re, d.re, r.x0, r.x1), (a.im, d.im, r.y0, r.y1)] {
                    if q == 0.0 {
                        if p < lo || p > hi {
                            return None;
                        }
                    } else {
                        let (t0, t1) = ((lo - p) / q, (hi - p) / q);
                        s0 = s0.max(t0.min(t1));
                        s1 = s1.min(t0.max(t1));
                    }
                }
                (s0 <= s1).then_some((s0, s1))
            }
            Region::Disk { centre, radius } => {
                let f = a - centre;
                let aa = d.norm_sqr();
                if aa == 0.0 {
                    return (f.norm() <= radius).then_some((0.0, 1.0));
                }
                let bb = (f * d.conj()).re;
                let disc = bb * bb - aa * (f.norm_sqr() - radius * radius);
                if disc < 0.0 {
                    return None;
                }
                let sq = disc.sqrt();
                let (s0, s1) = (((-bb - sq) / aa).max(0.0), ((-bb + sq) / aa).min(1.0));
                (s0 <= s1).then_some((s0, s1))
            }
        }
    }
}

/// Scales at which raw content is measured.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Ladder {
    /// `ε_k = 2^{-k} diam / 8` for `k = k0..=k1`, `diam` that of `γ ∩ S`.
    Relative { k0: u32, k1: u32 },
    Explicit(Vec<f64>),
}

impl Default for Ladder {
    fn default() -> Self {
        Ladder::Relative { k0: 0, k1: 6 }
    }
}

impl Ladder {
    pub fn rungs(&self, diam: f64) -> Result<Vec<f64>> {
        let eps = match self {
            Ladder::Relative { k0, k1 } => {
                if k1 < k0 {
                    return Err(invalid(format!("empty ladder {k0}..{k1}")));
                }
                (*k0..=*k1).map(|k| diam / 8.0 * 0.5f64.powi(k as i32)).collect()
            }
            Ladder::Explicit(v) => v.clone(),
        };
        if eps.is_empty() || eps.iter().any(|e| !(*e > 0.0) || !e.is_finite()) {
            return Err(invalid("ladder values must be positive and finite"));
        }
        if eps.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(invalid("ladder must be strictly decreasing"));
        }
        Ok(eps)
    }
}

/// Extrapolated content with the per-rung raw values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContentEstimate {
    pub value: f64,
    pub eps_ladder: Vec<f64>,
    pub raw: Vec<f64>,
    /// Fitted exponent of the residual drift; `None` with fewer than three
    /// rungs, in which case `value` is the finest raw value.
    pub theta: Option<f64>,
    pub amplitude: f64,
    /// Root mean square of the fit residuals.
    pub residual: f64,
}

impl ContentEstimate {
    fn zero(eps_ladder: Vec<f64>) -> Self {
        let raw = vec![0.0; eps_ladder.len()];
        ContentEstimate { value: 0.0, eps_ladder, raw, theta: None, amplitude: 0.0, residual: 0.0 }
    }
}

/// Least-squares fit of `raw = v + b ε^θ` over a grid of `θ`.
/// Returns `(v, θ, b, rms residual)`.
pub fn extrapolate(eps: &[f64], raw: &[f64]) -> (f64, Option<f64>, f64, f64) {
    let n = eps.len();
    if n < 3 {
        return (raw[n - 1], None, 0.0, 0.0);
    }
    let mut best = (f64::INFINITY, 0.0, 0.0, 0.0);
    for i in 0..=THETA_STEPS {
        let th = THETA_RANGE.0 + (THETA_RANGE.1 - THETA_RANGE.0) * i as f64 / THETA_STEPS as f64;
        let (v, b, ssr) = fit_fixed(eps, raw, th);
        if ssr < best.0 {
            best = (ssr, v, b, th);
        }
    }
    let (ssr, v, b, th) = best;
    (v, Some(th), b, (ssr / n as f64).sqrt())
}

/// `raw = v + b ε^θ` for fixed `θ`: `(v, b, ssr)`.
fn fit_fixed(eps: &[f64], raw: &[f64], theta: f64) -> (f64, f64, f64) {
    let n = eps.len() as f64;
    let xs: Vec<f64> = eps.iter().map(|e| e.powf(theta)).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = raw.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(raw).map(|(x, y)| (x - mx) * (y - my)).sum();
    let b = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let v = my - b * mx;
    let ssr = xs.iter().zip(raw).map(|(x, y)| (y - v - b * x).powi(2)).sum();
    (v, b, ssr)
}

fn clipped_segments(trace: &Curve, region: &Region) -> Vec<(C64, C64)> {
    let p = trace.points();
    if p.len() == 1 {
        return if region.contains(p[0]) { vec![(p[0], p[0])] } else { Vec::new() };
    }
    p.windows(2)
        .filter_map(|w| {
            let (s0, s1) = region.clip(w[0], w[1])?;
            let d = w[1] - w[0];
            Some((w[0] + d * s0, w[0] + d * s1))
        })
        .collect()
}

fn bbox(segs: &[(C64, C64)]) -> (C64, C64) {
    let mut lo = c(f64::INFINITY, f64::INFINITY);
    let mut hi = c(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for &(a, b) in segs {
        for q in [a, b] {
            lo = c(lo.re.min(q.re), lo.im.min(q.im));
            hi = c(hi.re.max(q.re), hi.im.max(q.im));
        }
    }
    (lo, hi)
}

/// Check the pixel budget of every rung.
fn check_budget(lo: C64, hi: C64, eps: &[f64]) -> Result<()> {
    let fits = |e: f64| {
        let pad = c(e, e);
        Raster::pixel_count(lo - pad, hi + pad, e / PITCH_DIVISOR) <= MAX_PIXELS
    };
    if let Some(&bad) = eps.iter().find(|&&e| !fits(e)) {
        // the pixel count is decreasing in ε, so bisect for the floor
        let (mut a, mut b) = (bad, eps[0].max(bad) * 2.0);
        while !fits(b) {
            b *= 2.0;
        }
        for _ in 0..60 {
            let m = (a * b).sqrt();
            if fits(m) {
                b = m;
            } else {
                a = m;
            }
        }
        return Err(SleError::ResourceLimit {
            message: format!("ε = {bad:e} needs more than {MAX_PIXELS:e} pixels"),
            suggested_floor: b,
        });
    }
    Ok(())
}

/// Neighbourhood areas after each prefix `segs[..cuts[j]]`.
fn prefix_areas(segs: &[(C64, C64)], lo: C64, hi: C64, e: f64, cuts: &[usize]) -> Vec<f64> {
    let pad = c(e, e);
    let mut ras = Raster::new(lo - pad, hi + pad, e / PITCH_DIVISOR);
    let mut out = Vec::with_capacity(cuts.len());
    let mut k = 0;
    for &cut in cuts {
        while k < cut {
            ras.fill_capsule(segs[k].0, segs[k].1, e);
            k += 1;
        }
        out.push(ras.area());
    }
    out
}

/// `Cont_d(γ ∩ S)` estimated on an `ε` ladder. Rungs finer than the
/// trace's spatial resolution see a smooth polyline and drag the
/// extrapolation towards zero, so ladders should stay above it.
pub fn minkowski_content(trace: &Curve, region: &Region, p: &GreenParams, ladder: &Ladder) -> Result<ContentEstimate> {
    let segs = clipped_segments(trace, region);
    if segs.is_empty() {
        let diam = if region.diameter().is_finite() { region.diameter() } else { trace.diameter() };
        return Ok(ContentEstimate::zero(ladder.rungs(diam.max(f64::MIN_POSITIVE))?));
    }
    let (lo, hi) = bbox(&segs);
    let diam = (hi - lo).norm();
    let eps = ladder.rungs(if diam > 0.0 { diam } else { region.diameter().min(1.0) })?;
    check_budget(lo, hi, &eps)?;
    let cuts = [segs.len()];
    let raw: Vec<f64> = eps
        .par_iter()
        .map(|&e| e.powf(p.d - 2.0) * prefix_areas(&segs, lo, hi, e, &cuts)[0])
        .collect();
    let (v, theta, b, residual) = extrapolate(&eps, &raw);
    Ok(ContentEstimate { value: v.max(0.0), eps_ladder: eps, raw, theta, amplitude: b, residual })
}

/// Natural length `t_γ = Cont_d(γ)`.
pub fn natural_length(trace: &Curve, p: &GreenParams, ladder: &Ladder) -> Result<ContentEstimate> {
    minkowski_content(trace, &Region::Plane, p, ladder)
}

/// Same points with timestamps replaced by the content of trace prefixes,
/// measured at [`NATURAL_CHECKPOINTS`] checkpoints and interpolated by arc
/// length in between.
pub fn natural_reparam(trace: &Curve, p: &GreenParams, ladder: &Ladder) -> Result<Curve> {
    natural_reparam_with_estimate(trace, p, ladder).map(|r| r.0)
}

/// [`natural_reparam`] together with the whole-trace estimate.
pub fn natural_reparam_with_estimate(trace: &Curve, p: &GreenParams, ladder: &Ladder) -> Result<(Curve, ContentEstimate)> {
    let n = trace.len();
    if n < 2 || trace.diameter() == 0.0 {
        return Err(SleError::Degenerate("a trace that never moves has zero content".into()));
    }
    let segs = clipped_segments(trace, &Region::Plane);
    let (lo, hi) = bbox(&segs);
    let eps = ladder.rungs((hi - lo).norm())?;
    check_budget(lo, hi, &eps)?;
    let m = NATURAL_CHECKPOINTS.min(n - 1);
    let mut cuts: Vec<usize> = (0..=m).map(|j| (j * (n - 1) + m / 2) / m).collect();
    cuts.dedup();
    let areas: Vec<Vec<f64>> = eps
        .par_iter()
        .map(|&e| {
            let s = e.powf(p.d - 2.0);
            prefix_areas(&segs, lo, hi, e, &cuts).into_iter().map(|a| s * a).collect()
        })
        .collect();
    let raw: Vec<f64> = areas.iter().map(|r| *r.last().unwrap()).collect();
    let (v, theta, b, residual) = extrapolate(&eps, &raw);
    let total = v.max(0.0);
    if !(total > 0.0) {
        return Err(SleError::Degenerate(format!("content of a {n}-point trace extrapolates to {v:e}")));
    }
    // prefix contents at the checkpoints, with the exponent of the total
    let mut prefix: Vec<f64> = (0..cuts.len())
        .map(|j| {
            let col: Vec<f64> = areas.iter().map(|r| r[j]).collect();
            match theta {
                Some(th) => fit_fixed(&eps, &col, th).0,
                None => *col.last().unwrap(),
            }
        })
        .collect();
    prefix[0] = 0.0;
    for j in 1..prefix.len() {
        prefix[j] = prefix[j].max(prefix[j - 1]);
    }
    let floor = 1e-6 * total / cuts.len() as f64;
    let mut incs: Vec<f64> = prefix.windows(2).map(|w| (w[1] - w[0]).max(floor)).collect();
    let sum: f64 = incs.iter().sum();
    incs.iter_mut().for_each(|x| *x *= total / sum);
    let pts = trace.points();
    let mut times = vec![0.0; n];
    let mut t0 = 0.0;
    for (j, inc) in incs.iter().enumerate() {
        let (i0, i1) = (cuts[j], cuts[j + 1]);
        let seg_len = |i: usize| (pts[i + 1] - pts[i]).norm();
        let arc: f64 = (i0..i1).map(seg_len).sum();
        let mut acc = 0.0;
        for i in i0..i1 {
            acc += if arc > 0.0 { seg_len(i) / arc } else { 1.0 / (i1 - i0) as f64 };
            times[i + 1] = t0 + inc * acc.min(1.0);
        }
        t0 += inc;
    }
    times[n - 1] = total;
    for i in 1..n {
        times[i] = times[i].max(times[i - 1]);
    }
    let est = ContentEstimate { value: total, eps_ladder: eps, raw, theta, amplitude: b, residual };
    Ok((trace.with_times(times)?, est))
}

/// Lebesgue measure of `{t : γ(t) ∈ S}` for a naturally parametrized trace.
pub fn theta_in_set(trace_nat: &Curve, region: &Region) -> f64 {
    let (t, p) = (trace_nat.times(), trace_nat.points());
    (1..p.len())
        .filter_map(|k| region.clip(p[k - 1], p[k]).map(|(s0, s1)| (s1 - s0) * (t[k] - t[k - 1])))
        .sum()
}

#[cfg(test)]
mod tests;
