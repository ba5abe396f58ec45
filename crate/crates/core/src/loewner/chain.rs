//! Incrementally grown Loewner chains with adaptive steps, forward-tracked
//! interior points and on-demand trace evaluation.

use super::{LoewnerState, SlitStep};
use crate::conformal::{c, csqrt, Mobius, C64};
use crate::curvespace::{segment_distance, Curve};
use crate::error::{Result, SleError};
use crate::rng::PathRng;

/// Conformal map from the sampling half-plane onto the domain where curves
/// are reported.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Frame {
    HalfPlane,
    /// Möbius map `H → D`.
    Mobius(Mobius),
    /// `H → C ∖ ((-∞, -1] ∪ [1, ∞))`, sending 0 to -1, ∞ to 1 and `i` to 0.
    TwoSlitPlane,
}

impl Frame {
    /// Frame for the unit disk from `z` to `w`.
    pub fn disk(z: C64, w: C64) -> Frame {
        Frame::Mobius(Mobius::disk_to_halfplane(z, w).inverse())
    }

    #[inline]
    pub fn to_domain(&self, z: C64) -> C64 {
        match self {
            Frame::HalfPlane => z,
            Frame::Mobius(m) => m.apply(z),
            Frame::TwoSlitPlane => {
                let s = -C64::i() * z;
                let m = s * s;
                (m - 1.0) / (m + 1.0)
            }
        }
    }

    /// `|φ'(z)|`.
    #[inline]
    pub fn scale(&self, z: C64) -> f64 {
        match self {
            Frame::HalfPlane => 1.0,
            Frame::Mobius(m) => m.deriv(z).norm(),
            Frame::TwoSlitPlane => {
                let s = -C64::i() * z;
                let m = s * s;
                (2.0 / ((m + 1.0) * (m + 1.0)) * 2.0 * s).norm()
            }
        }
    }

    /// `|φ''(z)| / 2`.
    pub fn half_second(&self, z: C64) -> f64 {
        match self {
            Frame::HalfPlane => 0.0,
            Frame::Mobius(m) => {
                let den = m.c * z + m.d;
                (m.c * (m.a * m.d - m.b * m.c) / (den * den * den)).norm()
            }
            Frame::TwoSlitPlane => {
                let q = z * z - 1.0;
                0.5 * ((12.0 * z * z + 4.0) / (q * q * q)).norm()
            }
        }
    }

    /// Half-plane displacement at `z` whose image has size about `h`, from
    /// the second-order expansion `|φ'| δ + |φ''| δ² / 2 = h`.
    pub fn preimage_step(&self, z: C64, h: f64) -> f64 {
        let s = self.scale(z);
        let k = self.half_second(z);
        2.0 * h / (s + (s * s + 4.0 * k * h).sqrt())
    }

    /// Image of ∞ (`None` for the half-plane itself).
    pub fn end_point(&self) -> Option<C64> {
        match self {
            Frame::HalfPlane => None,
            Frame::Mobius(m) => m.at_infinity(),
            Frame::TwoSlitPlane => Some(c(1.0, 0.0)),
        }
    }

    pub fn from_domain(&self, p: C64) -> C64 {
        match self {
            Frame::HalfPlane => p,
            Frame::Mobius(m) => m.inverse().apply(p),
            Frame::TwoSlitPlane => {
                let m = (1.0 + p) / (1.0 - p);
                let s = csqrt(m);
                C64::i() * s
            }
        }
    }
}

/// Spatial step policy in domain coordinates.
///
/// The target step is `max(h_min, min(h_far(p), near_factor · dist(p, focus)))`
/// where `h_far(p) = h_max · max(1, |p| / grow_from)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Resolution {
    pub h_max: f64,
    pub h_min: f64,
    pub near_factor: f64,
    pub grow_from: f64,
    /// Disks `(centre, radius)` near which steps are refined.
    pub focus: Vec<(C64, f64)>,
}

impl Resolution {
    pub fn uniform(h: f64) -> Self {
        Resolution { h_max: h, h_min: h, near_factor: f64::INFINITY, grow_from: f64::INFINITY, focus: Vec::new() }
    }

    pub fn spatial(&self, p: C64) -> f64 {
        let far = self.h_max * (p.norm() / self.grow_from).max(1.0);
        let near = self
            .focus
            .iter()
            .map(|&(q, r)| ((p - q).norm() - r).max(0.0))
            .fold(f64::INFINITY, f64::min)
            * self.near_factor;
        far.min(near).max(self.h_min)
    }
}

/// An interior point carried along by the forward maps.
#[derive(Clone, Debug)]
pub struct TrackedPoint {
    /// Original position in the sampling half-plane.
    pub z: C64,
    /// `g_t(z)`.
    pub g: C64,
    /// `log |g_t'(z)|`.
    pub log_deriv: f64,
    /// Cleared once the point has been swallowed or released.
    pub alive: bool,
    /// When set, steps are limited so the slit stays small next to `g_t(z) - U_t`.
    pub constrain: bool,
    /// Koebe lower bound on the distance from `z` to the trace piece added
    /// by the latest step.
    pub last_bound: f64,
}

impl TrackedPoint {
    /// `Z_t = g_t(z) - U_t`.
    pub fn centered(&self, u: f64) -> C64 {
        self.g - u
    }

    /// Conformal radius of the current slit domain seen from `z`.
    pub fn conformal_radius(&self) -> f64 {
        2.0 * self.g.im / self.log_deriv.exp()
    }
}

/// Loewner chain grown step by step from a seeded Brownian driver.
#[derive(Clone, Debug)]
pub struct Chain {
    pub state: LoewnerState,
    pub frame: Frame,
    pub points: Vec<TrackedPoint>,
    rng: PathRng,
    /// Step-size limit factor `η` for constrained points: `2 a Δt ≤ η |Z|²`.
    pub point_eta: f64,
    /// Recorded trace: grid index and half-plane position.
    rec_index: Vec<usize>,
    rec_point: Vec<C64>,
}

impl Chain {
    pub fn new(kappa: f64, frame: Frame, seed: u64, path: u64) -> Result<Self> {
        let state = LoewnerState::new(kappa, 0.0)?;
        Ok(Chain {
            state,
            frame,
            points: Vec::new(),
            rng: PathRng::new(seed, path),
            point_eta: 0.02,
            rec_index: vec![0],
            rec_point: vec![c(0.0, 0.0)],
        })
    }

    pub fn a(&self) -> f64 {
        self.state.a()
    }

    pub fn time(&self) -> f64 {
        self.state.time()
    }

    pub fn driver(&self) -> f64 {
        self.state.driver_value()
    }

    pub fn n_steps(&self) -> usize {
        self.state.n_steps()
    }

    /// Start tracking half-plane point `z`; returns its index.
    pub fn track(&mut self, z: C64, constrain: bool) -> usize {
        let (g, log_deriv) = if self.n_steps() == 0 {
            (z, 0.0)
        } else {
            let (g, d, _) = self.state.zipper().forward_range(0, self.n_steps(), 0.0, z);
            (g, d.ln())
        };
        self.points.push(TrackedPoint { z, g, log_deriv, alive: g.im > super::SWALLOW_THRESHOLD, constrain, last_bound: 0.0 });
        self.points.len() - 1
    }

    /// Capacity step whose slit-plus-jump size is about `h` in the
    /// half-plane.
    pub fn dt_for_spatial(&self, h: f64) -> f64 {
        let per_sqrt_dt = (2.0 * self.a()).sqrt() + 1.0;
        (h / per_sqrt_dt).powi(2)
    }

    /// Capacity step from the policy at the current tip, further limited by
    /// constrained tracked points and by `dt_cap`.
    pub fn adaptive_dt(&mut self, res: &Resolution, dt_cap: f64) -> f64 {
        let tip = self.tip();
        let p = self.frame.to_domain(tip);
        let h = self.frame.preimage_step(tip, res.spatial(p));
        self.limit_dt(self.dt_for_spatial(h).min(dt_cap))
    }

    /// Apply the tracked-point constraint to a proposed step.
    pub fn limit_dt(&self, dt: f64) -> f64 {
        let u = self.driver();
        let mut dt = dt;
        for p in self.points.iter().filter(|p| p.alive && p.constrain) {
            let z = p.centered(u);
            dt = dt.min(self.point_eta * z.norm_sqr() / (2.0 * self.a()));
        }
        dt
    }

    /// Advance one step of length `dt` with drift `drift` per unit time.
    pub fn step(&mut self, dt: f64, drift: f64) -> Result<()> {
        let t = self.time();
        if !(dt > 1e-15 * (1.0 + t)) || !dt.is_finite() {
            return Err(SleError::StepUnderflow { time: t, dt });
        }
        let u = self.driver() + drift * dt + dt.sqrt() * self.rng.normal();
        if !u.is_finite() {
            return Err(SleError::StepUnderflow { time: t, dt });
        }
        let step = SlitStep { u, c: 2.0 * self.a() * dt };
        let interval = self.state.zipper().interval();
        for p in self.points.iter_mut().filter(|p| p.alive) {
            let mut rho = segment_distance(p.g, c(u, 0.0), c(u, step.c.sqrt()));
            if let Some((lo, hi)) = interval {
                rho = rho.min(segment_distance(p.g, c(lo, 0.0), c(hi, 0.0)));
            }
            p.last_bound = rho / (4.0 * p.log_deriv.exp());
            let (g, d) = step.forward(p.g, 1.0);
            p.g = g;
            p.log_deriv += d.norm().ln();
            if g.im < super::SWALLOW_THRESHOLD || !g.im.is_finite() {
                p.alive = false;
            }
        }
        self.state.push(u, dt);
        Ok(())
    }

    /// Current tip in the half-plane, recorded in the trace.
    pub fn tip(&mut self) -> C64 {
        let n = self.n_steps();
        if *self.rec_index.last().unwrap() == n {
            return *self.rec_point.last().unwrap();
        }
        let p = self.state.trace_point(n);
        self.rec_index.push(n);
        self.rec_point.push(p);
        p
    }

    /// Current tip in domain coordinates.
    pub fn tip_domain(&mut self) -> C64 {
        let t = self.tip();
        self.frame.to_domain(t)
    }

    /// Whether the tip of the latest step has been evaluated.
    pub fn tip_known(&self) -> bool {
        *self.rec_index.last().unwrap() == self.n_steps()
    }

    /// Number of recorded trace points.
    pub fn recorded_len(&self) -> usize {
        self.rec_index.len()
    }

    /// Recorded trace points in domain coordinates, in capacity time.
    pub fn recorded_curve(&self) -> Curve {
        let times = self.rec_index.iter().map(|&k| self.state.times()[k]).collect();
        let points = self.rec_point.iter().map(|&p| self.frame.to_domain(p)).collect();
        Curve::new(times, points).expect("recorded trace is a valid curve")
    }

    /// Recorded points from grid index `from` on (domain coordinates).
    pub fn recorded_since(&self, from: usize) -> (Vec<f64>, Vec<C64>) {
        let k = self.rec_index.partition_point(|&i| i < from);
        (
            self.rec_index[k..].iter().map(|&i| self.state.times()[i]).collect(),
            self.rec_point[k..].iter().map(|&p| self.frame.to_domain(p)).collect(),
        )
    }
}
