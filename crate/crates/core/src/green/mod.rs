//! Chordal SLE Green's function: the half-plane formula, conformal
//! covariance to other configurations, conformal radii, the two-point
//! comparison expression and tail integrability on unbounded domains.

mod calibration;
mod config;

pub use calibration::{Calibration, CalibrationEntry};
pub use config::{Configuration, Domain};

use crate::conformal::{c, Mobius, C64};
use crate::error::{invalid, Result, SleError};
use crate::loewner::check_kappa;
use crate::measures::Rect;
use crate::quad;
use crate::rng::PathRng;
use serde::{Deserialize, Serialize};

/// All `κ`-derived exponents in one place.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GreenParams {
    pub kappa: f64,
    /// `a = 2/κ`.
    pub a: f64,
    /// `d = 1 + κ/8`.
    pub d: f64,
    /// `β = 4a - 1 + d - 2`.
    pub beta: f64,
    pub c_kappa: f64,
}

impl GreenParams {
    pub fn new(kappa: f64) -> Result<Self> {
        check_kappa(kappa)?;
        let a = 2.0 / kappa;
        let d = 1.0 + kappa / 8.0;
        Ok(GreenParams { kappa, a, d, beta: 4.0 * a - 1.0 + d - 2.0, c_kappa: 1.0 })
    }

    pub fn with_constant(mut self, c_kappa: f64) -> Result<Self> {
        if !(c_kappa > 0.0 && c_kappa.is_finite()) {
            return Err(invalid(format!("c_kappa must be positive, got {c_kappa}")));
        }
        self.c_kappa = c_kappa;
        Ok(self)
    }

    /// `4a - 1`, the boundary exponent.
    pub fn sin_exponent(&self) -> f64 {
        4.0 * self.a - 1.0
    }
}

/// `G_H(ζ) = c_κ (Im ζ)^{d-2} (sin arg ζ)^{4a-1}` for the configuration
/// `(H, 0, ∞)`.
pub fn green_halfplane(zeta: C64, p: &GreenParams) -> Result<f64> {
    if !(zeta.im > 0.0) || !zeta.re.is_finite() || !zeta.im.is_finite() {
        return Err(invalid(format!("{zeta} is not in the upper half-plane")));
    }
    Ok(green_h(zeta, p))
}

#[inline]
pub(crate) fn green_h(zeta: C64, p: &GreenParams) -> f64 {
    let s = zeta.im / zeta.norm();
    p.c_kappa * zeta.im.powf(p.d - 2.0) * s.powf(p.sin_exponent())
}

/// `log G_H(ζ)` without the constant.
#[inline]
pub(crate) fn log_green_h(zeta: C64, p: &GreenParams) -> f64 {
    let y = zeta.im;
    (p.d - 2.0) * y.ln() + p.sin_exponent() * (y.ln() - zeta.norm().ln())
}

/// `G_D(ζ)` by covariance, `|f'(ζ)|^{2-d} G_H(f(ζ))` with `f` sending the
/// configuration to `(H, 0, ∞)`.
pub fn green_config(cfg: &Configuration, zeta: C64, p: &GreenParams) -> Result<f64> {
    let (f, df) = cfg.to_standard(zeta)?;
    Ok(df.powf(2.0 - p.d) * green_halfplane(f, p)?)
}

/// Same as [`green_config`] through an explicit Möbius map, which must send
/// the configuration to `(H, 0, ∞)`.
pub fn green_via_map(m: &Mobius, zeta: C64, p: &GreenParams) -> Result<f64> {
    let f = m.apply(zeta);
    Ok(m.deriv(zeta).norm().powf(2.0 - p.d) * green_halfplane(f, p)?)
}

/// `S_{D,z,w}(ζ) = sin arg f(ζ)`.
pub fn sine_factor(cfg: &Configuration, zeta: C64) -> Result<f64> {
    let (f, _) = cfg.to_standard(zeta)?;
    Ok(f.im / f.norm())
}

/// Conformal radius of the domain seen from `ζ`. Closed forms on `H` and
/// the disk; through the tracked map `2 Im g_t(ζ) / |g_t'(ζ)|` in slit
/// domains.
pub fn conformal_radius(cfg: &Configuration, zeta: C64) -> Result<f64> {
    if !cfg.contains(zeta) {
        return Err(invalid(format!("{zeta} is not interior")));
    }
    match &cfg.domain {
        Domain::HalfPlane => Ok(2.0 * zeta.im),
        Domain::UnitDisk => Ok(1.0 - zeta.norm_sqr()),
        Domain::TwoSlitPlane | Domain::SlitHalfPlane { .. } => {
            let (g, dg) = cfg.to_standard(zeta)?;
            Ok(2.0 * g.im / dg)
        }
    }
}

/// Monte Carlo conformal radius with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CradEstimate {
    pub value: f64,
    pub stderr: f64,
    pub log_mean: f64,
    pub log_stderr: f64,
    pub walks: usize,
}

/// `log crad_D(ζ) = E^ζ log |B_τ - ζ|` by walk-on-spheres: each walk jumps
/// to a uniform point on the largest disk inside the domain until it is
/// within `shell` of the boundary.
pub fn conformal_radius_brownian(
    cfg: &Configuration,
    zeta: C64,
    walks: usize,
    shell: f64,
    seed: u64,
) -> Result<CradEstimate> {
    if walks < 2 || !(shell > 0.0) {
        return Err(invalid("need at least two walks and a positive shell"));
    }
    if !cfg.contains(zeta) {
        return Err(invalid(format!("{zeta} is not interior")));
    }
    let dist = cfg.boundary_distance_fn();
    let mut logs = Vec::with_capacity(walks);
    for k in 0..walks {
        let mut rng = PathRng::new(seed, k as u64);
        let mut p = zeta;
        let mut steps = 0usize;
        loop {
            let r = dist(p);
            if r < shell || steps > 1_000_000 {
                break;
            }
            p += C64::from_polar(r, 2.0 * std::f64::consts::PI * rng.uniform());
            steps += 1;
        }
        logs.push((p - zeta).norm().ln());
    }
    let (m, se) = crate::stats::mean_stderr(&logs);
    Ok(CradEstimate { value: m.exp(), stderr: m.exp() * se, log_mean: m, log_stderr: se, walks })
}

/// `(log G(ζ)/G(ζ'), r)` with `r = |ζ - ζ'| / dist(ζ, ∂D)`.
pub fn main_estimate_check(cfg: &Configuration, zeta: C64, zeta_prime: C64, p: &GreenParams) -> Result<(f64, f64)> {
    let r = (zeta - zeta_prime).norm() / cfg.boundary_distance(zeta)?;
    if r > 0.5 {
        return Err(SleError::Precondition(format!("r = {r} exceeds 1/2")));
    }
    if r == 0.0 {
        return Ok((0.0, 0.0));
    }
    let (f, df) = cfg.to_standard(zeta)?;
    let (fp, dfp) = cfg.to_standard(zeta_prime)?;
    let log_ratio = (2.0 - p.d) * (df.ln() - dfp.ln()) + log_green_h(f, p) - log_green_h(fp, p);
    Ok((log_ratio, r))
}

/// Comparison value `G(ζ) G(ω) q^{d-2} (S(ζ) ∨ q)^{-β}` for the unordered
/// two-point Green's function in `(H, 0, ∞)`, with `|ζ| < |ω|` after
/// relabelling and `q = |ζ - ω| / |ω|`. Up to constants only.
pub fn two_point_green_comparison(zeta: C64, omega: C64, p: &GreenParams) -> Result<f64> {
    if zeta == omega {
        return Err(invalid("two-point comparison needs distinct points"));
    }
    let (z, w) = if zeta.norm() <= omega.norm() { (zeta, omega) } else { (omega, zeta) };
    let gz = green_halfplane(z, p)?;
    let gw = green_halfplane(w, p)?;
    let q = (z - w).norm() / w.norm();
    let s = z.im / z.norm();
    Ok(gz * gw * q.powf(p.d - 2.0) * s.max(q).powf(-p.beta))
}

/// Exponent `4a - 1/(4a) - 3` of the radial integrand governing
/// integrability of `G_D` at infinity.
pub fn tail_exponent(kappa: f64) -> Result<f64> {
    check_kappa(kappa)?;
    let x = 8.0 / kappa;
    Ok(x - 1.0 / x - 3.0)
}

/// Whether `∫ G_D dA` converges at infinity for an unbounded domain with
/// both marked points finite: iff `κ < 8(√2 - 1)`.
pub fn tail_integrability(kappa: f64) -> Result<bool> {
    Ok(tail_exponent(kappa)? > -1.0)
}

/// `∫ G_{H,x,y} dA` over `{ζ ∈ H : r0 < |ζ| < r1}`.
pub fn annulus_integral(p: &GreenParams, x: f64, y: f64, r0: f64, r1: f64, tol: f64) -> Result<f64> {
    if x == y || !(r1 > r0 && r0 > 0.0) {
        return Err(invalid("need x != y and 0 < r0 < r1"));
    }
    let cfg = Configuration::halfplane(p.kappa, x, Some(y))?;
    // integrate in log-radius so that wide annuli stay well resolved
    let v = quad::integrate(
        |s| {
            let r = s.exp();
            r * r
                * quad::integrate(
                    |th| {
                        let z = C64::from_polar(r, th);
                        if z.im <= 0.0 {
                            return 0.0;
                        }
                        green_config(&cfg, z, p).unwrap_or(0.0)
                    },
                    0.0,
                    std::f64::consts::PI,
                    tol,
                )
        },
        r0.ln(),
        r1.ln(),
        tol,
    );
    Ok(v)
}

/// `∫_R G_D dA` over a rectangle inside the domain closure.
pub fn green_integral_rect(cfg: &Configuration, rect: &Rect, p: &GreenParams, tol: f64) -> f64 {
    quad::integrate_rect(|z| green_config(cfg, z, p).unwrap_or(0.0), rect.x0, rect.y0, rect.x1, rect.y1, tol)
}

/// `∫_B G_D dA` over the disk `B(centre, radius)`.
pub fn green_integral_disk(cfg: &Configuration, centre: C64, radius: f64, p: &GreenParams, tol: f64) -> f64 {
    quad::integrate_disk(|z| green_config(cfg, z, p).unwrap_or(0.0), centre, radius, tol)
}

/// `∫_D G_D dA` over the whole unit disk (integrable singularities at `z`
/// and `w`), computed in polar coordinates.
pub fn green_integral_unit_disk(cfg: &Configuration, p: &GreenParams, tol: f64) -> Result<f64> {
    if !matches!(cfg.domain, Domain::UnitDisk) {
        return Err(invalid("configuration is not the unit disk"));
    }
    // split the angle at the marked points so each singularity is an endpoint
    let mut cuts = [cfg.z.arg(), cfg.w.map(|w| w.arg()).unwrap_or(0.0)];
    cuts.sort_by(f64::total_cmp);
    let (t0, t1) = (cuts[0], cuts[1]);
    let f = |z: C64| green_config(cfg, z, p).unwrap_or(0.0);
    let o = c(0.0, 0.0);
    let two_pi = 2.0 * std::f64::consts::PI;
    Ok(quad::integrate_polar(f, o, (0.0, 1.0), (t0, t1), tol)
        + quad::integrate_polar(f, o, (0.0, 1.0), (t1, t0 + two_pi), tol))
}
