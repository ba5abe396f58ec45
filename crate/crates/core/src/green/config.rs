use crate::conformal::{c, Mobius, C64};
use crate::curvespace::Curve;
use crate::error::{invalid, Result};
use crate::loewner::{check_kappa, Frame, LoewnerState};
use std::sync::Arc;

/// Simply connected domain of a chordal configuration.
#[derive(Clone, Debug)]
pub enum Domain {
    HalfPlane,
    UnitDisk,
    /// `C ∖ ((-∞, -1] ∪ [1, ∞))` from -1 to 1; contains the unit disk.
    TwoSlitPlane,
    /// `H ∖ γ[0, t]` for the chain in `state`, from the tip `γ(t)` to ∞.
    SlitHalfPlane { state: Arc<LoewnerState>, time: f64 },
}

/// `(D, z, w)` together with `κ`. `w = None` stands for ∞.
#[derive(Clone, Debug)]
pub struct Configuration {
    pub domain: Domain,
    pub z: C64,
    pub w: Option<C64>,
    pub kappa: f64,
}

impl Configuration {
    /// `(H, x, y)`; `y = None` is ∞.
    pub fn halfplane(kappa: f64, x: f64, y: Option<f64>) -> Result<Self> {
        check_kappa(kappa)?;
        if y == Some(x) || !x.is_finite() || y.is_some_and(|y| !y.is_finite()) {
            return Err(invalid("marked points must be distinct finite reals (or ∞)"));
        }
        Ok(Configuration { domain: Domain::HalfPlane, z: c(x, 0.0), w: y.map(|y| c(y, 0.0)), kappa })
    }

    /// `(D, z, w)` on the unit disk.
    pub fn disk(kappa: f64, z: C64, w: C64) -> Result<Self> {
        check_kappa(kappa)?;
        if (z.norm() - 1.0).abs() > 1e-12 || (w.norm() - 1.0).abs() > 1e-12 {
            return Err(invalid("marked points must lie on the unit circle"));
        }
        if (z - w).norm() < 1e-12 {
            return Err(invalid("marked points must be distinct"));
        }
        Ok(Configuration { domain: Domain::UnitDisk, z, w: Some(w), kappa })
    }

    /// `(C ∖ ((-∞, -1] ∪ [1, ∞)), -1, 1)`.
    pub fn two_slit(kappa: f64) -> Result<Self> {
        check_kappa(kappa)?;
        Ok(Configuration { domain: Domain::TwoSlitPlane, z: c(-1.0, 0.0), w: Some(c(1.0, 0.0)), kappa })
    }

    /// `(H ∖ γ[0, t], γ(t), ∞)`; `time` must be on the chain's step grid
    /// (up to rounding, after which it is snapped to the grid).
    pub fn slit(state: Arc<LoewnerState>, time: f64) -> Result<Self> {
        let times = state.times();
        let k = times.partition_point(|&s| s < time);
        let near = [k.saturating_sub(1), k.min(times.len() - 1)]
            .into_iter()
            .min_by(|&i, &j| (times[i] - time).abs().total_cmp(&(times[j] - time).abs()))
            .unwrap();
        if (times[near] - time).abs() > 1e-12 * time.abs().max(1.0) {
            return Err(invalid(format!("time {time} is not on the step grid")));
        }
        let time = times[near];
        let kappa = state.kappa();
        let z = state.trace_point(near);
        Ok(Configuration { domain: Domain::SlitHalfPlane { state, time }, z, w: None, kappa })
    }

    /// Möbius map onto `(H, 0, ∞)` for the explicit domains.
    pub fn standard_mobius(&self) -> Option<Mobius> {
        match self.domain {
            Domain::HalfPlane => Some(match self.w {
                Some(w) => Mobius::halfplane_to_standard(self.z.re, w.re),
                None => Mobius::new(c(1.0, 0.0), -self.z, c(0.0, 0.0), c(1.0, 0.0)),
            }),
            Domain::UnitDisk => Some(Mobius::disk_to_halfplane(self.z, self.w?)),
            Domain::TwoSlitPlane | Domain::SlitHalfPlane { .. } => None,
        }
    }

    /// Sampling frame: the conformal map from `(H, 0, ∞)` onto the
    /// configuration (`None` for slit domains).
    pub fn frame(&self) -> Option<Frame> {
        match self.domain {
            Domain::TwoSlitPlane => Some(Frame::TwoSlitPlane),
            Domain::SlitHalfPlane { .. } => None,
            Domain::HalfPlane if self.z.re == 0.0 && self.w.is_none() => Some(Frame::HalfPlane),
            _ => Some(Frame::Mobius(self.standard_mobius()?.inverse())),
        }
    }

    /// `(f(ζ), |f'(ζ)|)` for a conformal `f` onto `(H, 0, ∞)`.
    pub fn to_standard(&self, zeta: C64) -> Result<(C64, f64)> {
        if !self.contains(zeta) {
            return Err(invalid(format!("{zeta} is not interior")));
        }
        match &self.domain {
            Domain::SlitHalfPlane { state, time } => {
                let (g, dg) = state.map_with_derivative(zeta, *time)?;
                Ok((g - state.driver_at(*time)?, dg))
            }
            Domain::TwoSlitPlane => {
                let f = Frame::TwoSlitPlane.from_domain(zeta);
                Ok((f, 1.0 / Frame::TwoSlitPlane.scale(f)))
            }
            _ => {
                let m = self.standard_mobius().expect("explicit domain");
                Ok((m.apply(zeta), m.deriv(zeta).norm()))
            }
        }
    }

    /// Whether `ζ` is an interior point (the slit is tested through the
    /// map: swallowed or slit points fail later in [`Self::to_standard`]).
    pub fn contains(&self, zeta: C64) -> bool {
        match self.domain {
            Domain::HalfPlane | Domain::SlitHalfPlane { .. } => zeta.im > 0.0 && zeta.re.is_finite(),
            Domain::UnitDisk => zeta.norm() < 1.0,
            Domain::TwoSlitPlane => zeta.re.is_finite() && zeta.im.is_finite() && (zeta.im != 0.0 || zeta.re.abs() < 1.0),
        }
    }

    /// `dist(ζ, ∂D)`.
    pub fn boundary_distance(&self, zeta: C64) -> Result<f64> {
        if !self.contains(zeta) {
            return Err(invalid(format!("{zeta} is not interior")));
        }
        Ok(self.boundary_distance_fn()(zeta))
    }

    /// Distance-to-boundary function, with the slit trace precomputed.
    pub fn boundary_distance_fn(&self) -> Box<dyn Fn(C64) -> f64 + '_> {
        match &self.domain {
            Domain::HalfPlane => Box::new(|p: C64| p.im.max(0.0)),
            Domain::UnitDisk => Box::new(|p: C64| (1.0 - p.norm()).max(0.0)),
            Domain::TwoSlitPlane => Box::new(|p: C64| {
                let ray = |x: f64| if x >= 1.0 { p.im.abs() } else { (c(x, p.im) - c(1.0, 0.0)).norm() };
                ray(p.re).min(ray(-p.re))
            }),
            Domain::SlitHalfPlane { state, time } => {
                let k = state.times().partition_point(|&s| s < *time);
                let trace: Curve = state.trace().prefix(k);
                Box::new(move |p: C64| p.im.max(0.0).min(trace.distance_to(p)))
            }
        }
    }
}
