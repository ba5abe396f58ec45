//! The Green's-function martingale `M_t = |g_t'(ζ)|^{2-d} G_H(g_t(ζ) - U_t)`
//! and the driver drift it induces.

use crate::conformal::{c, C64};
use crate::error::{invalid, Result, SleError};
use crate::green::{green_halfplane, GreenParams};
use crate::loewner::{SlitStep, SWALLOW_THRESHOLD};
use crate::rng::PathRng;
use crate::stats::mean_stderr;
use rayon::prelude::*;
use serde::Serialize;

/// Drift of the driver per unit capacity time under the tilt by `M`:
/// `∂_u log M = (4a - 1) Re Z / |Z|²` with `Z = g_t(ζ) - U_t`.
#[inline]
pub fn tilt_drift(a: f64, z: C64) -> f64 {
    (4.0 * a - 1.0) * z.re / z.norm_sqr()
}

/// The same drift in the normalization `∂g = 2/(g - W)`, `W = √κ B`, whose
/// time runs `κ` times slower than capacity time here: `κ ∂_u log M`.
#[inline]
pub fn tilt_drift_kappa_time(p: &GreenParams, z: C64) -> f64 {
    p.kappa * tilt_drift(p.a, z)
}

/// `log M` from `log |g'|` and `Z`.
pub fn log_martingale(p: &GreenParams, log_deriv: f64, z: C64) -> f64 {
    let y = z.im;
    p.c_kappa.ln() + (2.0 - p.d) * log_deriv + (p.d - 2.0) * y.ln() + p.sin_exponent() * (y.ln() - z.norm().ln())
}

/// One target point followed through a Loewner chain.
#[derive(Clone, Debug)]
pub struct TiltState {
    pub t: f64,
    pub u: f64,
    /// `g_t(ζ)`.
    pub g: C64,
    /// `log |g_t'(ζ)|`.
    pub log_deriv: f64,
}

impl TiltState {
    pub fn new(zeta: C64) -> Result<Self> {
        if !(zeta.im > 0.0) {
            return Err(invalid(format!("{zeta} is not in the upper half-plane")));
        }
        Ok(TiltState { t: 0.0, u: 0.0, g: zeta, log_deriv: 0.0 })
    }

    /// `Z_t = g_t(ζ) - U_t`.
    pub fn z(&self) -> C64 {
        self.g - self.u
    }

    pub fn log_m(&self, p: &GreenParams) -> f64 {
        log_martingale(p, self.log_deriv, self.z())
    }

    pub fn drift(&self, p: &GreenParams) -> f64 {
        tilt_drift(p.a, self.z())
    }

    /// Conformal radius of the slit domain seen from `ζ`.
    pub fn crad(&self) -> f64 {
        2.0 * self.g.im / self.log_deriv.exp()
    }

    pub fn alive(&self) -> bool {
        self.g.im > SWALLOW_THRESHOLD
    }

    /// Vertical-slit step of length `dt` to the new driver value `u`.
    pub fn step(&mut self, a: f64, dt: f64, u: f64) {
        let (g, d) = SlitStep { u, c: 2.0 * a * dt }.forward(self.g, 1.0);
        self.g = g;
        self.log_deriv += d.norm().ln();
        self.u = u;
        self.t += dt;
    }
}

/// Largest relative deviation between [`tilt_drift_kappa_time`] and `κ`
/// times a central difference of `log M` in the driver, over `n` random
/// states.
pub fn drift_fd_check(p: &GreenParams, n: usize, seed: u64) -> Result<f64> {
    if n == 0 {
        return Err(invalid("need at least one state"));
    }
    let mut rng = PathRng::new(seed, 0);
    let mut worst: f64 = 0.0;
    for _ in 0..n {
        let g = c(6.0 * rng.uniform() - 3.0, 0.05 + 2.0 * rng.uniform());
        let u = 2.0 * rng.uniform() - 1.0;
        let log_deriv = 4.0 * rng.uniform() - 2.0;
        let z = g - u;
        let h = 1e-5 * z.norm();
        let lm = |du: f64| log_martingale(p, log_deriv, g - (u + du));
        let fd = p.kappa * (lm(h) - lm(-h)) / (2.0 * h);
        let analytic = tilt_drift_kappa_time(p, z);
        // the drift vanishes on the imaginary axis; compare on the scale of
        // its magnitude there
        let scale = analytic.abs().max(p.kappa * (4.0 * p.a - 1.0).abs() / z.norm() * 1e-3);
        worst = worst.max((fd - analytic).abs() / scale);
    }
    Ok(worst)
}

/// Empirical mean of the stopped martingale at each checkpoint.
#[derive(Clone, Debug, Serialize)]
pub struct MartingaleReport {
    pub m0: f64,
    pub checkpoints: Vec<f64>,
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    /// Fraction of paths stopped (small conformal radius or swallowed) by
    /// each checkpoint.
    pub stopped: Vec<f64>,
    /// Largest `|mean - m0| / stderr` over checkpoints.
    pub max_z: f64,
    pub n: usize,
}

/// Run `n` undrifted half-plane chains with steps `dt` (shrunk near `ζ`)
/// and record `M_{t∧τ}` at each checkpoint, `τ` the first time the
/// conformal radius from `ζ` drops below `stop_crad`. Swallowed paths
/// contribute `M = 0` afterwards.
pub fn martingale_check(
    p: &GreenParams,
    zeta: C64,
    checkpoints: &[f64],
    n: usize,
    dt: f64,
    stop_crad: f64,
    seed: u64,
) -> Result<MartingaleReport> {
    if checkpoints.is_empty() || checkpoints.windows(2).any(|w| !(w[1] > w[0])) || !(checkpoints[0] > 0.0) {
        return Err(invalid("checkpoints must be positive and increasing"));
    }
    if !(dt > 0.0) || n < 2 || !(stop_crad > 0.0) {
        return Err(invalid("need dt > 0, n >= 2 and a positive stopping radius"));
    }
    let m0 = green_halfplane(zeta, p)?;
    let eta = 0.02;
    let paths: Vec<Vec<(f64, bool)>> = (0..n as u64)
        .into_par_iter()
        .map(|path| {
            let mut rng = PathRng::new(seed, path);
            let mut s = TiltState::new(zeta)?;
            let mut out = Vec::with_capacity(checkpoints.len());
            let mut stopped = false;
            let mut m = m0;
            for &tc in checkpoints {
                while !stopped && s.t < tc * (1.0 - 1e-12) {
                    let z = s.z();
                    let h = dt.min(eta * z.norm_sqr() / (2.0 * p.a)).min(tc - s.t);
                    if !(h > 1e-300) {
                        return Err(SleError::StepUnderflow { time: s.t, dt: h });
                    }
                    let u = s.u + h.sqrt() * rng.normal();
                    s.step(p.a, h, u);
                    if !s.alive() {
                        stopped = true;
                        m = 0.0;
                    } else {
                        m = s.log_m(p).exp();
                        if s.crad() <= stop_crad {
                            stopped = true;
                        }
                    }
                }
                out.push((m, stopped));
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let mut mean = Vec::new();
    let mut stderr = Vec::new();
    let mut stopped = Vec::new();
    let mut max_z: f64 = 0.0;
    for k in 0..checkpoints.len() {
        let xs: Vec<f64> = paths.iter().map(|v| v[k].0).collect();
        let (m, se) = mean_stderr(&xs);
        max_z = max_z.max((m - m0).abs() / se.max(1e-300));
        mean.push(m);
        stderr.push(se);
        stopped.push(paths.iter().filter(|v| v[k].1).count() as f64 / n as f64);
    }
    Ok(MartingaleReport { m0, checkpoints: checkpoints.to_vec(), mean, stderr, stopped, max_z, n })
}
