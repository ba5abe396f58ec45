//! Chordal Loewner chains in the upper half-plane.
//!
//! Normalization: `∂_t g_t(z) = a / (g_t(z) - U_t)` with `a = 2/κ` and `U` a
//! standard Brownian motion. (The other common normalization,
//! `∂_t g = 2/(g - W)` with `W = √κ B`, is the time change `t ↦ a t` of this
//! one.) The driver is held constant on each step, so every step adds a
//! vertical slit of height `sqrt(2 a Δt)` above the step's driver value.

mod chain;
mod run;
mod zipper;

pub use chain::{Chain, Frame, Resolution, TrackedPoint};
pub use run::{finished_curve, grow, sample_in_frame, EndRule, Outcome, TraceSpec};
pub use zipper::{SlitStep, Zipper};

use crate::conformal::{c, C64};
use crate::curvespace::{segment_distance, Curve};
use crate::error::{invalid, Result, SleError};
use crate::rng::PathRng;
use serde::{Deserialize, Serialize};

/// Points whose image drops below this height count as swallowed.
pub const SWALLOW_THRESHOLD: f64 = 1e-12;
/// Default capacity-time step.
pub const DEFAULT_DT: f64 = 1e-4;
/// Tag written next to every trace to identify the normalization.
pub const CONVENTION: &str = "dg=a/(g-U),a=2/kappa,U=standard-BM";

pub fn check_kappa(kappa: f64) -> Result<()> {
    if kappa.is_finite() && kappa > 0.0 && kappa <= 4.0 {
        Ok(())
    } else {
        Err(invalid(format!("kappa must lie in (0, 4], got {kappa}")))
    }
}

/// Samples `U_0..U_n` of the driving function at capacity times
/// `0 = t_0 < … < t_n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DrivingPath {
    pub kappa: f64,
    pub a: f64,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl DrivingPath {
    pub fn new(kappa: f64, times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        check_kappa(kappa)?;
        if times.len() < 2 || times.len() != values.len() {
            return Err(invalid("driving path needs n ≥ 1 steps and matching lengths"));
        }
        if times[0] != 0.0 || times.windows(2).any(|w| !(w[1] > w[0])) || !times.iter().all(|t| t.is_finite()) {
            return Err(invalid("driving times must start at 0 and increase strictly"));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(invalid("driving values must be finite"));
        }
        Ok(DrivingPath { kappa, a: 2.0 / kappa, times, values })
    }

    /// Driver sampled on a uniform grid of step `dt`.
    pub fn uniform(kappa: f64, dt: f64, values: Vec<f64>) -> Result<Self> {
        let times = (0..values.len()).map(|k| k as f64 * dt).collect();
        DrivingPath::new(kappa, times, values)
    }

    pub fn n_steps(&self) -> usize {
        self.times.len() - 1
    }
}

/// A driving path together with the composed slit maps it generates.
#[derive(Clone, Debug)]
pub struct LoewnerState {
    kappa: f64,
    a: f64,
    times: Vec<f64>,
    values: Vec<f64>,
    zipper: Zipper,
}

impl LoewnerState {
    /// Empty chain with driver started at `u0`.
    pub fn new(kappa: f64, u0: f64) -> Result<Self> {
        check_kappa(kappa)?;
        Ok(LoewnerState { kappa, a: 2.0 / kappa, times: vec![0.0], values: vec![u0], zipper: Zipper::new() })
    }

    pub fn from_driver(driver: &DrivingPath) -> Result<Self> {
        let mut s = LoewnerState::new(driver.kappa, driver.values[0])?;
        for k in 1..driver.times.len() {
            s.push(driver.values[k], driver.times[k] - driver.times[k - 1]);
        }
        Ok(s)
    }

    /// Advance by `dt` with driver value `u_next` (held on the step).
    pub fn push(&mut self, u_next: f64, dt: f64) {
        debug_assert!(dt > 0.0 && u_next.is_finite());
        self.zipper.push(SlitStep { u: u_next, c: 2.0 * self.a * dt });
        self.times.push(self.time() + dt);
        self.values.push(u_next);
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn n_steps(&self) -> usize {
        self.zipper.len()
    }

    pub fn time(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn driver_value(&self) -> f64 {
        *self.values.last().unwrap()
    }

    pub fn zipper(&self) -> &Zipper {
        &self.zipper
    }

    pub fn driver(&self) -> DrivingPath {
        DrivingPath { kappa: self.kappa, a: self.a, times: self.times.clone(), values: self.values.clone() }
    }

    /// Trace point at grid time `t_k` (`k = 0` is the driver's start).
    pub fn trace_point(&self, k: usize) -> C64 {
        if k == 0 {
            c(self.values[0], 0.0)
        } else {
            self.zipper.tip(k - 1)
        }
    }

    /// The whole trace in capacity time.
    pub fn trace(&self) -> Curve {
        let points = (0..=self.n_steps()).map(|k| self.trace_point(k)).collect();
        Curve::new(self.times.clone(), points).expect("trace is a valid curve")
    }

    /// `(steps fully applied, fraction of the next one)` at time `t`.
    fn locate(&self, t: f64) -> Result<(usize, f64)> {
        if !(t >= 0.0) || t > self.time() * (1.0 + 1e-12) {
            return Err(invalid(format!("time {t} outside [0, {}]", self.time())));
        }
        let k = self.times.partition_point(|&s| s <= t);
        let n = k - 1;
        if n >= self.n_steps() {
            return Ok((self.n_steps(), 0.0));
        }
        let frac = (t - self.times[n]) / (self.times[n + 1] - self.times[n]);
        Ok((n, if frac < 1e-12 { 0.0 } else { frac }))
    }

    fn forward(&self, z: C64, from: f64, to: f64) -> Result<(C64, f64)> {
        if !(z.im > 0.0) {
            return Err(invalid(format!("{z} is not in the upper half-plane")));
        }
        let (n0, f0) = self.locate(from)?;
        if f0 != 0.0 {
            return Err(invalid("split times must lie on the step grid"));
        }
        let (n, frac) = self.locate(to)?;
        let (g, d, swallowed) = self.zipper.forward_range(n0, n, frac, z);
        match swallowed {
            Some(k) => Err(SleError::Swallowed { time: self.times[k + 1].min(to) }),
            None => Ok((g, d)),
        }
    }

    /// `g_t(z)`.
    pub fn map_point(&self, z: C64, t: f64) -> Result<C64> {
        self.forward(z, 0.0, t).map(|r| r.0)
    }

    /// `|g_t'(z)|`.
    pub fn map_derivative(&self, z: C64, t: f64) -> Result<f64> {
        self.forward(z, 0.0, t).map(|r| r.1)
    }

    pub fn map_with_derivative(&self, z: C64, t: f64) -> Result<(C64, f64)> {
        self.forward(z, 0.0, t)
    }

    /// `g_{t2} ∘ g_{t1}^{-1}` applied to `z`; `t1` must be a grid time.
    pub fn map_between(&self, z: C64, t1: f64, t2: f64) -> Result<(C64, f64)> {
        self.forward(z, t1, t2)
    }

    /// Driver value in effect at time `t`.
    pub fn driver_at(&self, t: f64) -> Result<f64> {
        let (n, frac) = self.locate(t)?;
        Ok(if frac > 0.0 { self.values[n + 1] } else { self.values[n] })
    }
}

fn step_grid(t_max: f64, dt: f64) -> Result<Vec<f64>> {
    if !(t_max > 0.0) || !(dt > 0.0) || !t_max.is_finite() {
        return Err(invalid("t_max and dt must be positive"));
    }
    if dt >= t_max {
        return Err(invalid(format!("dt = {dt} must be smaller than t_max = {t_max}")));
    }
    let n = (t_max / dt - 1e-9).ceil() as usize;
    let mut steps = vec![dt; n];
    steps[n - 1] = t_max - dt * (n - 1) as f64;
    Ok(steps)
}

/// Chordal SLE_κ trace from 0 to ∞ in the upper half-plane on a uniform
/// capacity grid, using random stream `(seed, 0)`.
pub fn sample_chordal(kappa: f64, t_max: f64, dt: f64, seed: u64) -> Result<(Curve, LoewnerState)> {
    sample_chordal_path(kappa, t_max, dt, seed, 0)
}

/// As [`sample_chordal`] with an explicit path index for ensembles.
pub fn sample_chordal_path(kappa: f64, t_max: f64, dt: f64, seed: u64, path: u64) -> Result<(Curve, LoewnerState)> {
    check_kappa(kappa)?;
    let steps = step_grid(t_max, dt)?;
    let mut rng = PathRng::new(seed, path);
    let mut state = LoewnerState::new(kappa, 0.0)?;
    for h in steps {
        let u = state.driver_value() + h.sqrt() * rng.normal();
        state.push(u, h);
    }
    Ok((state.trace(), state))
}

/// Loewner trace for a deterministic driver `u(t)` (testing hook).
pub fn trace_for_driver(kappa: f64, t_max: f64, dt: f64, u: impl Fn(f64) -> f64) -> Result<(Curve, LoewnerState)> {
    check_kappa(kappa)?;
    let steps = step_grid(t_max, dt)?;
    let mut state = LoewnerState::new(kappa, u(0.0))?;
    for h in steps {
        let t = state.time() + h;
        state.push(u(t), h);
    }
    Ok((state.trace(), state))
}

/// First time the polyline enters the closed disk `B̄(center, radius)`.
pub fn hitting_time(trace: &Curve, center: C64, radius: f64) -> Result<Option<f64>> {
    if !(radius >= 0.0) || !radius.is_finite() {
        return Err(invalid(format!("radius must be nonnegative, got {radius}")));
    }
    let (t, p) = (trace.times(), trace.points());
    if (p[0] - center).norm() <= radius {
        return Ok(Some(0.0));
    }
    let r2 = radius * radius;
    let tol = 1e-12 * (1.0 + center.norm() + radius);
    for k in 1..p.len() {
        if segment_distance(center, p[k - 1], p[k]) > radius + tol {
            continue;
        }
        // earliest s in [0, 1] with |f + s d| = r
        let d = p[k] - p[k - 1];
        let f = p[k - 1] - center;
        let aa = d.norm_sqr();
        let s = if aa == 0.0 {
            0.0
        } else {
            let b = (f * d.conj()).re;
            let disc = (b * b - aa * (f.norm_sqr() - r2)).max(0.0);
            ((-b - disc.sqrt()) / aa).clamp(0.0, 1.0)
        };
        return Ok(Some(t[k - 1] + s * (t[k] - t[k - 1])));
    }
    Ok(None)
}
