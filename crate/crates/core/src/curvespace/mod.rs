//! Parametrized planar curves `γ : [0, t_γ] → C`, their reversal and
//! concatenation, and the two curve metrics: `d_C` (linear
//! reparametrization) and an upper bound for `d_D` (arbitrary monotone
//! reparametrization).

mod dtw;
pub mod io;

pub use dtw::{dd_lower_bound, dist_dd_upper, dist_dd_upper_capped};

use crate::conformal::C64;
use crate::error::{invalid, Result, SleError};
use serde::{Deserialize, Serialize};

/// Default endpoint tolerance for [`concat`].
pub const CONCAT_TOLERANCE: f64 = 1e-9;
/// Default refinement of the union grid used by [`dist_dc`].
pub const DC_REFINEMENT: usize = 4;

/// Which curve metric a Prokhorov distance is built on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CurveMetricKind {
    /// `d_C`: durations plus sup distance after linear rescaling.
    LinearReparam,
    /// `d_D`: infimum over monotone reparametrizations (upper bound).
    Reparam,
}

/// Timestamped polyline. Times start at 0, are nondecreasing and end at the
/// duration `t_dur`.
#[derive(Clone, Debug, PartialEq)]
pub struct Curve {
    times: Vec<f64>,
    points: Vec<C64>,
}

impl Curve {
    pub fn new(times: Vec<f64>, points: Vec<C64>) -> Result<Self> {
        if times.is_empty() {
            return Err(SleError::InvalidCurve("curve needs at least one point".into()));
        }
        if times.len() != points.len() {
            return Err(SleError::InvalidCurve(format!(
                "{} times for {} points",
                times.len(),
                points.len()
            )));
        }
        if times[0] != 0.0 {
            return Err(SleError::InvalidCurve(format!("first time is {}, expected 0", times[0])));
        }
        for w in times.windows(2) {
            if !(w[1] >= w[0]) {
                return Err(SleError::InvalidCurve("times must be nondecreasing".into()));
            }
        }
        if times.iter().any(|t| !t.is_finite()) || points.iter().any(|p| !(p.re.is_finite() && p.im.is_finite())) {
            return Err(SleError::InvalidCurve("non-finite coordinate".into()));
        }
        Ok(Curve { times, points })
    }

    /// A zero-duration curve sitting at `p`.
    pub fn point(p: C64) -> Self {
        Curve { times: vec![0.0], points: vec![p] }
    }

    /// Polyline through `points` at unit-free uniform times on `[0, duration]`.
    pub fn uniform(points: Vec<C64>, duration: f64) -> Result<Self> {
        let n = points.len();
        if n == 1 {
            return Curve::new(vec![0.0], points);
        }
        let times = (0..n).map(|i| duration * i as f64 / (n - 1) as f64).collect();
        Curve::new(times, points)
    }

    /// Sample `f` on a uniform grid of `n + 1` times over `[0, duration]`.
    pub fn from_fn(duration: f64, n: usize, f: impl Fn(f64) -> C64) -> Result<Self> {
        let times: Vec<f64> = (0..=n).map(|i| duration * i as f64 / n as f64).collect();
        let points = times.iter().map(|&t| f(t)).collect();
        Curve::new(times, points)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn points(&self) -> &[C64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn duration(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn start(&self) -> C64 {
        self.points[0]
    }

    pub fn end(&self) -> C64 {
        *self.points.last().unwrap()
    }

    /// Position at time `t` (clamped to `[0, t_dur]`), linear between samples.
    pub fn eval(&self, t: f64) -> C64 {
        let n = self.times.len();
        if n == 1 || t <= 0.0 {
            return self.points[0];
        }
        if t >= self.duration() {
            return self.points[n - 1];
        }
        // first index with time > t
        let k = self.times.partition_point(|&s| s <= t);
        let (t0, t1) = (self.times[k - 1], self.times[k]);
        let (p0, p1) = (self.points[k - 1], self.points[k]);
        if t1 <= t0 {
            return p1;
        }
        let s = (t - t0) / (t1 - t0);
        p0 + (p1 - p0) * s
    }

    /// Same points with new timestamps.
    pub fn with_times(&self, times: Vec<f64>) -> Result<Curve> {
        Curve::new(times, self.points.clone())
    }

    /// Apply a map to every point, keeping the timestamps.
    pub fn map_points(&self, f: impl Fn(C64) -> C64) -> Curve {
        Curve { times: self.times.clone(), points: self.points.iter().map(|&p| f(p)).collect() }
    }

    /// Multiply all times by `factor`.
    pub fn scale_time(&self, factor: f64) -> Curve {
        Curve { times: self.times.iter().map(|t| t * factor).collect(), points: self.points.clone() }
    }

    /// Prefix up to and including sample `k`.
    pub fn prefix(&self, k: usize) -> Curve {
        let k = k.min(self.len() - 1);
        Curve { times: self.times[..=k].to_vec(), points: self.points[..=k].to_vec() }
    }

    /// Restriction to `[0, t]`, ending at the interpolated point `γ(t)`.
    pub fn truncate(&self, t: f64) -> Curve {
        if t >= self.duration() {
            return self.clone();
        }
        if t <= 0.0 {
            return Curve::point(self.points[0]);
        }
        let k = self.times.partition_point(|&s| s < t);
        let mut times = self.times[..k].to_vec();
        let mut points = self.points[..k].to_vec();
        times.push(t);
        points.push(self.eval(t));
        Curve { times, points }
    }

    /// Resample at `n` uniformly spaced times (endpoints included).
    pub fn resample_uniform(&self, n: usize) -> Curve {
        let n = n.max(2);
        let t = self.duration();
        if t == 0.0 {
            return Curve::point(self.points[0]);
        }
        let times: Vec<f64> = (0..n).map(|i| t * i as f64 / (n - 1) as f64).collect();
        let points = times.iter().map(|&s| self.eval(s)).collect();
        Curve { times, points }
    }

    pub fn arc_length(&self) -> f64 {
        self.points.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
    }

    /// Largest distance between consecutive samples.
    pub fn max_step(&self) -> f64 {
        self.points.windows(2).map(|w| (w[1] - w[0]).norm()).fold(0.0, f64::max)
    }

    /// Diameter of the sample set.
    pub fn diameter(&self) -> f64 {
        let (lo, hi) = self.bounding_box();
        (hi - lo).norm()
    }

    /// Axis-aligned bounding box as (lower-left, upper-right).
    pub fn bounding_box(&self) -> (C64, C64) {
        let mut lo = self.points[0];
        let mut hi = self.points[0];
        for p in &self.points {
            lo.re = lo.re.min(p.re);
            lo.im = lo.im.min(p.im);
            hi.re = hi.re.max(p.re);
            hi.im = hi.im.max(p.im);
        }
        (lo, hi)
    }

    /// Distance from `z` to the polyline.
    pub fn distance_to(&self, z: C64) -> f64 {
        if self.len() == 1 {
            return (self.points[0] - z).norm();
        }
        self.points
            .windows(2)
            .map(|w| segment_distance(z, w[0], w[1]))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Distance from `z` to the segment `[a, b]`.
#[inline]
pub fn segment_distance(z: C64, a: C64, b: C64) -> f64 {
    let ab = b - a;
    let l2 = ab.norm_sqr();
    if l2 == 0.0 {
        return (z - a).norm();
    }
    let s = (((z - a) * ab.conj()).re / l2).clamp(0.0, 1.0);
    (z - (a + ab * s)).norm()
}

/// Modulus of continuity over sampled index pairs: the largest distance
/// between two samples whose times differ by at most `delta`.
pub fn oscillation(c: &Curve, delta: f64) -> Result<f64> {
    if !delta.is_finite() || delta <= 0.0 {
        return Err(invalid(format!("oscillation needs a positive finite delta, got {delta}")));
    }
    let (t, p) = (c.times(), c.points());
    let mut best: f64 = 0.0;
    let mut j = 0;
    for i in 0..t.len() {
        if j < i {
            j = i;
        }
        while j + 1 < t.len() && t[j + 1] - t[i] <= delta {
            j += 1;
        }
        for k in i + 1..=j {
            best = best.max((p[k] - p[i]).norm());
        }
    }
    Ok(best)
}

/// `d_C(a, b) = |t_a - t_b| + sup_s |a(s t_a) - b(s t_b)|`, the sup taken on
/// the union of both rescaled time grids refined `DC_REFINEMENT` times.
pub fn dist_dc(a: &Curve, b: &Curve) -> f64 {
    dist_dc_refined(a, b, DC_REFINEMENT)
}

pub fn dist_dc_refined(a: &Curve, b: &Curve, refinement: usize) -> f64 {
    let mut grid: Vec<f64> = Vec::with_capacity(a.len() + b.len() + 2);
    for c in [a, b] {
        let d = c.duration();
        if d > 0.0 {
            grid.extend(c.times().iter().map(|t| t / d));
        }
    }
    grid.push(0.0);
    grid.push(1.0);
    grid.sort_by(|x, y| x.total_cmp(y));
    grid.dedup();
    let refinement = refinement.max(1);
    let (ta, tb) = (a.duration(), b.duration());
    let mut sup: f64 = 0.0;
    for w in grid.windows(2) {
        for r in 0..refinement {
            let s = w[0] + (w[1] - w[0]) * r as f64 / refinement as f64;
            sup = sup.max((a.eval(s * ta) - b.eval(s * tb)).norm());
        }
    }
    sup = sup.max((a.end() - b.end()).norm());
    (ta - tb).abs() + sup
}

/// Time reversal `t ↦ γ(t_γ - t)`.
pub fn reverse(c: &Curve) -> Curve {
    let d = c.duration();
    let n = c.len();
    let mut times: Vec<f64> = c.times.iter().rev().map(|t| d - t).collect();
    times[0] = 0.0;
    times[n - 1] = d;
    Curve { times, points: c.points.iter().rev().copied().collect() }
}

/// Concatenation `a ⊕ b`; `a` must end where `b` starts.
pub fn concat(a: &Curve, b: &Curve) -> Result<Curve> {
    concat_with_tolerance(a, b, CONCAT_TOLERANCE)
}

pub fn concat_with_tolerance(a: &Curve, b: &Curve, tol: f64) -> Result<Curve> {
    let gap = (a.end() - b.start()).norm();
    if gap > tol {
        return Err(SleError::Precondition(format!("concat endpoint mismatch {gap:e} > {tol:e}")));
    }
    let ta = a.duration();
    let mut times = a.times[..a.len() - 1].to_vec();
    let mut points = a.points[..a.len() - 1].to_vec();
    times.extend(b.times.iter().map(|t| t + ta));
    points.extend_from_slice(&b.points);
    Curve::new(times, points)
}
