//! Two-sided radial SLE through an interior point: the chordal chain tilted
//! by the Green's-function martingale until it comes close to the target,
//! then continued as chordal SLE in the slit domain. Also the reweighted
//! chordal oracle, escape statistics and Radon–Nikodym comparisons.

mod oracle;
mod tilt;

pub use oracle::{
    circle_hit_angle, escape_stat, escape_stat_weighted, oracle_reweighted, rn_comparison, stop_at_circle,
    tmass_log_ratio, EscapeRow, OracleEnsemble, RnReport,
};
pub use tilt::{
    drift_fd_check, log_martingale, martingale_check, tilt_drift, tilt_drift_kappa_time, MartingaleReport, TiltState,
};

use crate::conformal::C64;
use crate::content::{natural_reparam, Ladder};
use crate::curvespace::Curve;
use crate::error::{invalid, Result, SleError};
use crate::green::{Configuration, GreenParams};
use crate::loewner::{finished_curve, grow, Chain, EndRule, Outcome, TraceSpec};
use serde::{Deserialize, Serialize};

/// Resolution settings for the two-sided sampler.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoSidedOptions {
    /// Bulk spatial step in domain coordinates.
    pub h: f64,
    /// Scale of the single-rung natural parametrization.
    pub nat_eps: f64,
    /// Steps near the target shrink linearly at this rate per unit distance.
    pub near_factor: f64,
    /// Step size inside the stopping ball; half the stopping radius (capped
    /// by `h`) when unset.
    pub h_target: Option<f64>,
    pub max_steps: usize,
    /// Reparametrize by natural time; otherwise keep capacity time.
    pub natural: bool,
}

impl TwoSidedOptions {
    pub fn new(h: f64) -> Self {
        TwoSidedOptions { h, nat_eps: 2.0 * h, near_factor: 0.5, h_target: None, max_steps: 2_000_000, natural: true }
    }
}

/// Default stopping radius: `dist(ζ, ∂D) / 64`.
pub fn default_stop_radius(cfg: &Configuration, zeta: C64) -> Result<f64> {
    Ok(cfg.boundary_distance(zeta)? / 64.0)
}

/// Full two-sided path `z → ζ → w`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoSidedSample {
    /// With the straight connector `tip → ζ → tip` inserted; natural time
    /// unless the options asked for capacity time.
    pub curve: Curve,
    /// Time at which the curve is at `ζ`.
    pub hit_time: f64,
    /// Index of the `ζ` vertex in `curve`.
    pub hit_index: usize,
    pub weight: f64,
    /// `|tip - ζ|` when the tilted segment stopped.
    pub stop_distance: f64,
    /// Capacity time of the stop.
    pub capacity_hit_time: f64,
}

fn prepare(cfg: &Configuration, zeta: C64, stop_radius: f64, opts: &TwoSidedOptions) -> Result<(TraceSpec, GreenParams, C64)> {
    let frame = cfg.frame().ok_or_else(|| invalid("two-sided sampling needs a configuration with an explicit frame"))?;
    let dist = cfg.boundary_distance(zeta)?;
    if !(stop_radius > 0.0 && stop_radius < dist / 4.0) {
        return Err(SleError::Precondition(format!(
            "stop radius {stop_radius} must lie in (0, dist(ζ, ∂D)/4 = {})",
            dist / 4.0
        )));
    }
    let p = GreenParams::new(cfg.kappa)?;
    let mut spec = TraceSpec::new(cfg.kappa, frame, opts.h)?.with_focus(
        zeta,
        stop_radius,
        opts.h_target.unwrap_or(0.5 * stop_radius).min(opts.h),
        opts.near_factor,
    );
    spec.max_steps = opts.max_steps;
    Ok((spec, p, frame.from_domain(zeta)))
}

/// Grow the tilted chain until the tip is within `stop_radius` of `ζ`.
/// The far end never stops this phase. Returns the chain, the spec for the
/// continuation and the index of the tracked target.
pub fn grow_tilted(
    cfg: &Configuration,
    zeta: C64,
    stop_radius: f64,
    opts: &TwoSidedOptions,
    seed: u64,
    path: u64,
) -> Result<(Chain, TraceSpec, usize)> {
    let (spec, p, zh) = prepare(cfg, zeta, stop_radius, opts)?;
    let mut chain = Chain::new(cfg.kappa, spec.frame, seed, path)?;
    let idx = chain.track(zh, true);
    let a = p.a;
    let tilted = TraceSpec { end: EndRule::Never, ..spec.clone() };
    let outcome = grow(
        &mut chain,
        &tilted,
        |ch| tilt_drift(a, ch.points[idx].centered(ch.driver())),
        |ch, tip| !ch.points[idx].alive || (tip - zeta).norm() <= stop_radius,
    )?;
    let time = chain.time();
    if !chain.points[idx].alive || outcome != Outcome::Stopped {
        return Err(SleError::RetryWithRefinement { time });
    }
    Ok((chain, spec, idx))
}

/// Tilted first segment only, in capacity time, ending inside
/// `B(ζ, stop_radius)`.
pub fn sample_tilted_segment(
    cfg: &Configuration,
    zeta: C64,
    stop_radius: f64,
    opts: &TwoSidedOptions,
    seed: u64,
    path: u64,
) -> Result<Curve> {
    let (chain, _, _) = grow_tilted(cfg, zeta, stop_radius, opts, seed, path)?;
    Ok(chain.recorded_curve())
}

/// Two-sided radial sample through `ζ`, naturally parametrized at the
/// single scale `opts.nat_eps` when `opts.natural` is set.
pub fn sample_twosided(
    cfg: &Configuration,
    zeta: C64,
    stop_radius: f64,
    opts: &TwoSidedOptions,
    seed: u64,
    path: u64,
) -> Result<TwoSidedSample> {
    let (mut chain, spec, idx) = grow_tilted(cfg, zeta, stop_radius, opts, seed, path)?;
    let capacity_hit_time = chain.time();
    let k_hit = chain.recorded_len() - 1;
    let tip = chain.tip_domain();
    chain.points[idx].alive = false;
    let outcome = grow(&mut chain, &spec, |_| 0.0, |_, _| false)?;
    if outcome == Outcome::StepLimit {
        return Err(SleError::ResourceLimit {
            message: format!("continuation exceeded {} steps", spec.max_steps),
            suggested_floor: opts.h,
        });
    }
    let full = finished_curve(&chain, &spec, outcome);
    let mut times = full.times()[..=k_hit].to_vec();
    let mut points = full.points()[..=k_hit].to_vec();
    times.extend([capacity_hit_time, capacity_hit_time]);
    points.extend([zeta, tip]);
    times.extend_from_slice(&full.times()[k_hit + 1..]);
    points.extend_from_slice(&full.points()[k_hit + 1..]);
    let joined = Curve::new(times, points)?;
    let nat = if opts.natural {
        let p = GreenParams::new(cfg.kappa)?;
        natural_reparam(&joined, &p, &Ladder::Explicit(vec![opts.nat_eps]))?
    } else {
        joined
    };
    let hit_index = k_hit + 1;
    Ok(TwoSidedSample {
        hit_time: nat.times()[hit_index],
        curve: nat,
        hit_index,
        weight: 1.0,
        stop_distance: (tip - zeta).norm(),
        capacity_hit_time,
    })
}

#[cfg(test)]
mod tests;
