//! Growing chains in a domain frame until they reach the far end, with an
//! optional driver drift and a caller-supplied stopping rule.

use super::{check_kappa, Chain, Frame, Resolution};
use crate::conformal::C64;
use crate::curvespace::Curve;
use crate::error::{invalid, Result};

/// When a trace counts as complete.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EndRule {
    /// Tip within this distance of the frame's image of ∞.
    NearEnd(f64),
    /// Tip at least this far from the origin (half-plane frames).
    Far(f64),
    /// Capacity time reached.
    Time(f64),
    /// Only the caller's rule or the step limit ends the run.
    Never,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceSpec {
    pub kappa: f64,
    pub frame: Frame,
    pub res: Resolution,
    /// Upper bound on any capacity step.
    pub dt_cap: f64,
    pub end: EndRule,
    pub max_steps: usize,
}

impl TraceSpec {
    /// Spatial step `h` in domain coordinates, growing linearly beyond
    /// radius 2, ending within `2h` of the far end (or beyond `1/h` in the
    /// half-plane).
    pub fn new(kappa: f64, frame: Frame, h: f64) -> Result<Self> {
        check_kappa(kappa)?;
        if !(h > 0.0 && h < 1.0) {
            return Err(invalid(format!("spatial step must lie in (0, 1), got {h}")));
        }
        let end = match frame.end_point() {
            Some(_) => EndRule::NearEnd(2.0 * h),
            None => EndRule::Far(1.0 / h),
        };
        let res = Resolution { h_max: h, h_min: h, near_factor: f64::INFINITY, grow_from: 2.0, focus: Vec::new() };
        Ok(TraceSpec { kappa, frame, res, dt_cap: f64::INFINITY, end, max_steps: 5_000_000 })
    }

    /// Refine steps near `centre`: within distance `r` of it steps shrink to
    /// `h_min`, and they grow linearly (`near_factor` per unit distance)
    /// outside.
    pub fn with_focus(mut self, centre: C64, r: f64, h_min: f64, near_factor: f64) -> Self {
        self.res.focus.push((centre, r));
        self.res.h_min = self.res.h_min.min(h_min);
        self.res.near_factor = near_factor;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    /// The end rule fired.
    Ended,
    /// The caller's rule fired.
    Stopped,
    /// `max_steps` reached first.
    StepLimit,
}

/// Grow `chain` one adaptive step at a time. `drift` is evaluated before
/// each step; `stop` sees the chain and the new tip (domain coordinates)
/// after it.
pub fn grow(
    chain: &mut Chain,
    spec: &TraceSpec,
    mut drift: impl FnMut(&Chain) -> f64,
    mut stop: impl FnMut(&mut Chain, C64) -> bool,
) -> Result<Outcome> {
    let end_point = spec.frame.end_point();
    loop {
        if chain.n_steps() >= spec.max_steps {
            return Ok(Outcome::StepLimit);
        }
        let mut dt = chain.adaptive_dt(&spec.res, spec.dt_cap);
        if let EndRule::Time(t) = spec.end {
            let rem = t - chain.time();
            if rem <= 1e-12 * t {
                return Ok(Outcome::Ended);
            }
            dt = dt.min(rem);
        }
        let d = drift(chain);
        chain.step(dt, d)?;
        let tip = chain.tip_domain();
        let ended = match spec.end {
            EndRule::NearEnd(r) => end_point.is_some_and(|w| (tip - w).norm() < r),
            EndRule::Far(r) => tip.norm() >= r,
            EndRule::Time(_) | EndRule::Never => false,
        };
        if ended {
            return Ok(Outcome::Ended);
        }
        if stop(chain, tip) {
            return Ok(Outcome::Stopped);
        }
    }
}

/// Recorded curve, closed off at the far end when the end rule fired with
/// a finite end point.
pub fn finished_curve(chain: &Chain, spec: &TraceSpec, outcome: Outcome) -> Curve {
    let curve = chain.recorded_curve();
    match (outcome, spec.end, spec.frame.end_point()) {
        (Outcome::Ended, EndRule::NearEnd(_), Some(w)) => {
            let mut times = curve.times().to_vec();
            let mut points = curve.points().to_vec();
            times.push(curve.duration());
            points.push(w);
            Curve::new(times, points).expect("closing point keeps the curve valid")
        }
        _ => curve,
    }
}

/// Undrifted chordal trace in the frame's domain, in capacity time.
pub fn sample_in_frame(spec: &TraceSpec, seed: u64, path: u64) -> Result<(Curve, Chain, Outcome)> {
    let mut chain = Chain::new(spec.kappa, spec.frame, seed, path)?;
    let outcome = grow(&mut chain, spec, |_| 0.0, |_, _| false)?;
    Ok((finished_curve(&chain, spec, outcome), chain, outcome))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal::c;

    #[test]
    fn disk_traces_run_from_start_to_end() {
        let frame = Frame::disk(c(-1.0, 0.0), c(1.0, 0.0));
        let spec = TraceSpec::new(8.0 / 3.0, frame, 0.05).unwrap();
        for path in 0..4 {
            let (curve, _, outcome) = sample_in_frame(&spec, 1, path).unwrap();
            assert_eq!(outcome, Outcome::Ended);
            assert!((curve.start() - c(-1.0, 0.0)).norm() < 1e-12);
            assert_eq!(curve.end(), c(1.0, 0.0));
            assert!(curve.points().iter().all(|p| p.norm() <= 1.0 + 1e-9));
            // consecutive recorded points respect the spatial step up to the
            // Brownian increment
            assert!(curve.max_step() < 0.5, "{}", curve.max_step());
        }
    }

    #[test]
    fn time_rule_stops_exactly() {
        let mut spec = TraceSpec::new(4.0, Frame::HalfPlane, 0.05).unwrap();
        spec.end = EndRule::Time(0.3);
        let (curve, chain, outcome) = sample_in_frame(&spec, 2, 0).unwrap();
        assert_eq!(outcome, Outcome::Ended);
        assert!((chain.time() - 0.3).abs() < 1e-12);
        assert!((curve.duration() - 0.3).abs() < 1e-12);
    }

    #[test]
    fn focus_refines_steps_near_a_point() {
        let frame = Frame::disk(c(-1.0, 0.0), c(1.0, 0.0));
        let spec = TraceSpec::new(8.0 / 3.0, frame, 0.05).unwrap().with_focus(c(0.0, 0.0), 0.05, 0.005, 0.25);
        let (curve, _, _) = sample_in_frame(&spec, 3, 0).unwrap();
        let p = curve.points();
        for w in p.windows(2) {
            if w[0].norm() < 0.05 && w[1].norm() < 0.05 {
                assert!((w[1] - w[0]).norm() < 0.03);
            }
        }
    }
}
