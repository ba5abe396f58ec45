//! The verification suites. Each returns a pass flag, a one-line summary,
//! JSON metrics and optional extra files.

use super::{metric, Artifact, ExperimentConfig, Suite};
use crate::aggregate::{
    length_biased_chordal, theta_moment_scan, verify_lengthbias, AggregateOptions, Allocation, JRule, ScanOptions,
    VerifyOptions,
};
use crate::conformal::{c, Mobius, C64};
use crate::content::{minkowski_content, Ladder, Region};
use crate::curvespace::{Curve, CurveMetricKind};
use crate::error::{invalid, Result, SleError};
use crate::green::{annulus_integral, green_config, green_halfplane, tail_exponent, tail_integrability, Configuration, GreenParams};
use crate::loewner::{sample_in_frame, EndRule, Frame, Outcome, TraceSpec};
use crate::measures::io::write_ensemble;
use crate::measures::{prokhorov, PathEnsemble, Rect, SampleRule, Truncation};
use crate::rng::{derive_seed, PathRng};
use crate::stats::weighted_linear_fit;
use crate::twosided::{
    drift_fd_check, escape_stat, escape_stat_weighted, martingale_check, sample_tilted_segment, sample_twosided,
    stop_at_circle, EscapeRow, TwoSidedOptions,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

pub(super) struct SuiteOutcome {
    pub passed: bool,
    pub summary: String,
    pub metrics: Value,
    pub artifacts: Vec<Artifact>,
}

impl SuiteOutcome {
    fn new(passed: bool, summary: String, metrics: Value) -> Self {
        SuiteOutcome { passed, summary, metrics, artifacts: Vec::new() }
    }
}

pub(super) fn dispatch(cfg: &ExperimentConfig, suite: Suite) -> Result<SuiteOutcome> {
    let seed = derive_seed(cfg.seed, suite as u64 + 1);
    match suite {
        Suite::GreenCovariance => green_covariance(cfg, seed),
        Suite::GreenMc => green_mc(cfg, seed),
        Suite::Martingale => martingale(cfg, seed),
        Suite::Drift => drift(cfg, seed),
        Suite::TwosidedOracle => twosided_oracle(cfg, seed),
        Suite::Escape => escape(cfg, seed),
        Suite::ContentScaling => content_scaling(cfg, seed),
        Suite::Lengthbias => lengthbias(cfg, seed),
        Suite::Metric => metric_props(cfg, seed),
        Suite::Integrability => integrability(cfg),
        Suite::All => Err(invalid("`all` is expanded before dispatch")),
    }
}

fn kappa_label(kappa: f64) -> String {
    format!("κ={:.4}", kappa).trim_end_matches('0').trim_end_matches('.').to_string()
}

/// Run `f` over paths `0, 1, …` in parallel batches until `want` of them
/// return `Some` or `cap` paths are spent. Returns the successes in path
/// order, cut right after the `want`-th, and the number of paths used up to
/// that point.
fn sample_until<T: Send>(want: usize, cap: usize, f: impl Fn(u64) -> Result<Option<T>> + Sync) -> Result<(Vec<T>, usize)> {
    let mut out = Vec::with_capacity(want);
    let mut used = 0usize;
    while out.len() < want && used < cap {
        let rate = if out.is_empty() { 1.0 } else { out.len() as f64 / used as f64 };
        let batch = (((want - out.len()) as f64 / rate * 1.1).ceil() as usize).max(16).min(cap - used);
        let got: Vec<Option<T>> = (used as u64..(used + batch) as u64).into_par_iter().map(&f).collect::<Result<_>>()?;
        for r in got {
            used += 1;
            if let Some(v) = r {
                out.push(v);
                if out.len() == want {
                    return Ok((out, used));
                }
            }
        }
    }
    Ok((out, used))
}

/// Sampler errors that reject one sample without invalidating the run.
fn recoverable(e: &SleError) -> bool {
    matches!(e, SleError::RetryWithRefinement { .. } | SleError::StepUnderflow { .. } | SleError::ResourceLimit { .. })
}

// ---------------------------------------------------------------- covariance

/// Largest relative covariance error of `G_{H,0,∞}` under `maps` random real
/// Möbius maps of unit determinant, each at a random point.
pub fn covariance_error(kappa: f64, maps: usize, seed: u64) -> Result<f64> {
    let p = GreenParams::new(kappa)?;
    let base = Configuration::halfplane(kappa, 0.0, None)?;
    let mut rng = PathRng::new(seed, 0);
    let mut worst: f64 = 0.0;
    for _ in 0..maps {
        let a = loop {
            let a = rng.normal();
            if a.abs() > 0.05 {
                break a;
            }
        };
        let (b, cc) = (rng.normal(), rng.normal());
        let f = Mobius::new(c(a, 0.0), c(b, 0.0), c(cc, 0.0), c((1.0 + b * cc) / a, 0.0));
        let image = Configuration::halfplane(kappa, f.apply(c(0.0, 0.0)).re, f.at_infinity().map(|v| v.re))?;
        let zeta = c(rng.normal(), 0.05 + rng.uniform());
        let lhs = green_config(&base, zeta, &p)?;
        let rhs = f.deriv(zeta).norm().powf(2.0 - p.d) * green_config(&image, f.apply(zeta), &p)?;
        worst = worst.max((lhs - rhs).abs() / lhs.abs());
    }
    Ok(worst)
}

fn green_covariance(cfg: &ExperimentConfig, seed: u64) -> Result<SuiteOutcome> {
    let tol = cfg.tolerances.covariance_rel;
    let mut rows = Vec::new();
    let mut passed = true;
    for (i, &kappa) in cfg.kappas_for(Suite::GreenCovariance).iter().enumerate() {
        let err = covariance_error(kappa, cfg.budgets.covariance_maps, derive_seed(seed, i as u64))?;
        passed &= err < tol;
        rows.push(json!({ "kappa": kappa, "max_rel_error": err, "maps": cfg.budgets.covariance_maps }));
    }
    let worst = rows.iter().map(|r| r["max_rel_error"].as_f64().unwrap_or(f64::NAN)).fold(0.0, f64::max);
    Ok(SuiteOutcome::new(passed, format!("max relative error {worst:.2e} (tolerance {tol:.0e})"), json!({ "rows": rows })))
}

// ------------------------------------------------------------------ green mc

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GreenMcOptions {
    /// Test points in the upper half-plane.
    pub points: Vec<(f64, f64)>,
    /// Decreasing radii `ε`.
    pub eps: Vec<f64>,
    pub n: usize,
    pub h: f64,
    /// Traces end once the tip is this far from the origin.
    pub far: f64,
    /// Steps at distance `r` from a test point are `near_factor · r`, at
    /// least `near_factor · min ε`. Away from the points they are a tenth of
    /// the distance to the origin.
    pub near_factor: f64,
    pub seed: u64,
}

impl GreenMcOptions {
    pub fn new(n: usize, h: f64, seed: u64) -> Self {
        GreenMcOptions {
            points: vec![(0.0, 1.0), (1.0, 1.0), (-0.6, 0.5), (0.4, 1.8), (-1.5, 2.0)],
            eps: vec![0.1, 0.05, 0.025],
            n,
            h,
            far: 200.0,
            near_factor: 0.25,
            seed,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GreenMcPoint {
    pub zeta: (f64, f64),
    /// `G_H(ζ)` with unit constant.
    pub green: f64,
    /// `ε^{d-2} P̂{dist(γ, ζ) < ε}` per rung, with standard errors.
    pub estimates: Vec<f64>,
    pub stderr: Vec<f64>,
    /// Largest `|est_k - est_{k+1}|` over the combined standard error.
    pub ladder_z: f64,
    /// Inverse-variance mean over rungs of `est / G_H(ζ)`.
    pub constant: f64,
    pub constant_stderr: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GreenMcReport {
    pub kappa: f64,
    pub eps: Vec<f64>,
    pub points: Vec<GreenMcPoint>,
    /// Inverse-variance mean of the per-point constants.
    pub c_kappa: f64,
    pub c_kappa_stderr: f64,
    /// `max |ĉ_ζ / ĉ - 1|`.
    pub spread: f64,
    pub max_ladder_z: f64,
    pub n: usize,
    pub failures: usize,
}

fn inverse_variance_mean(v: &[f64], se: &[f64]) -> (f64, f64) {
    let w: Vec<f64> = se.iter().map(|s| 1.0 / (s * s).max(1e-300)).collect();
    let sw: f64 = w.iter().sum();
    (v.iter().zip(&w).map(|(x, w)| x * w).sum::<f64>() / sw, sw.recip().sqrt())
}

/// Chordal traces in `H` from 0 to ∞, refined near every test point; the
/// hit frequency of each `ε`-ball is compared with `G_H`.
pub fn green_mc_ladder(kappa: f64, opts: &GreenMcOptions) -> Result<GreenMcReport> {
    if opts.points.is_empty() || opts.points.iter().any(|&(_, y)| !(y > 0.0)) {
        return Err(invalid("test points must lie in the upper half-plane"));
    }
    let p = GreenParams::new(kappa)?;
    let eps = Ladder::Explicit(opts.eps.clone()).rungs(1.0)?;
    let emin = eps[eps.len() - 1];
    let mut spec = TraceSpec::new(kappa, Frame::HalfPlane, opts.h)?;
    for &(x, y) in &opts.points {
        spec = spec.with_focus(c(x, y), 0.0, opts.near_factor * emin, opts.near_factor);
    }
    spec.res.grow_from = opts.h / 0.1;
    spec.end = EndRule::Far(opts.far);
    let zetas: Vec<C64> = opts.points.iter().map(|&(x, y)| c(x, y)).collect();
    let dists: Vec<Option<Vec<f64>>> = (0..opts.n as u64)
        .into_par_iter()
        .map(|k| {
            let (curve, _, outcome) = sample_in_frame(&spec, opts.seed, k)?;
            if outcome == Outcome::StepLimit {
                log::warn!("green trace {k} hit the step limit");
                return Ok(None);
            }
            Ok(Some(zetas.iter().map(|&z| curve.distance_to(z)).collect()))
        })
        .collect::<Result<_>>()?;
    let ok: Vec<&Vec<f64>> = dists.iter().flatten().collect();
    let n = ok.len();
    if n < 2 {
        return Err(SleError::EmptyEnsemble { survivors: n, total: opts.n });
    }
    let mut points = Vec::new();
    for (j, &z) in zetas.iter().enumerate() {
        let green = green_halfplane(z, &p)?;
        let (mut est, mut se) = (Vec::new(), Vec::new());
        for &e in &eps {
            let q = ok.iter().filter(|v| v[j] < e).count() as f64 / n as f64;
            let scale = e.powf(p.d - 2.0);
            est.push(scale * q);
            // one pseudo-count keeps the error positive when no trace hits
            let qq = q.max(1.0 / n as f64);
            se.push(scale * (qq * (1.0 - qq) / n as f64).sqrt());
        }
        let ladder_z = est
            .windows(2)
            .zip(se.windows(2))
            .map(|(v, s)| (v[0] - v[1]).abs() / (s[0] * s[0] + s[1] * s[1]).sqrt())
            .fold(0.0, f64::max);
        let ratios: Vec<f64> = est.iter().map(|v| v / green).collect();
        let ratio_se: Vec<f64> = se.iter().map(|v| v / green).collect();
        let (constant, constant_stderr) = inverse_variance_mean(&ratios, &ratio_se);
        points.push(GreenMcPoint { zeta: (z.re, z.im), green, estimates: est, stderr: se, ladder_z, constant, constant_stderr });
    }
    let (c_kappa, c_kappa_stderr) = inverse_variance_mean(
        &points.iter().map(|q| q.constant).collect::<Vec<_>>(),
        &points.iter().map(|q| q.constant_stderr).collect::<Vec<_>>(),
    );
    let spread = points.iter().map(|q| (q.constant / c_kappa - 1.0).abs()).fold(0.0, f64::max);
    let max_ladder_z = points.iter().map(|q| q.ladder_z).fold(0.0, f64::max);
    Ok(GreenMcReport { kappa, eps, points, c_kappa, c_kappa_stderr, spread, max_ladder_z, n, failures: opts.n - n })
}

fn green_mc(cfg: &ExperimentConfig, seed: u64) -> Result<SuiteOutcome> {
    let tol = &cfg.tolerances;
    let mut reports = Vec::new();
    let mut passed = true;
    let mut parts = Vec::new();
    for (i, &kappa) in cfg.kappas_for(Suite::GreenMc).iter().enumerate() {
        let opts = GreenMcOptions::new(cfg.budgets.green_mc_n, cfg.h, derive_seed(seed, i as u64));
        let r = green_mc_ladder(kappa, &opts)?;
        let ok = r.max_ladder_z <= tol.ladder_sigmas && r.spread < tol.green_spread;
        passed &= ok;
        parts.push(format!("{}: spread {:.3}, ladder z {:.2}", kappa_label(kappa), r.spread, r.max_ladder_z));
        reports.push(r);
    }
    Ok(SuiteOutcome::new(passed, parts.join("; "), json!({ "reports": reports })))
}

// ---------------------------------------------------------------- martingale

fn martingale(cfg: &ExperimentConfig, seed: u64) -> Result<SuiteOutcome> {
    let checkpoints: Vec<f64> = (1..=10).map(|k| 0.1 * k as f64).collect();
    let mut reports = Vec::new();
    let mut passed = true;
    let mut parts = Vec::new();
    for (i, &kappa) in cfg.kappas_for(Suite::Martingale).iter().enumerate() {
        let p = GreenParams::new(kappa)?;
        let r = martingale_check(
            &p,
            c(0.2, 1.0),
            &checkpoints,
            cfg.budgets.martingale_n,
            1e-3,
            (-4f64).exp(),
            derive_seed(seed, i as u64),
        )?;
        passed &= r.max_z <= cfg.tolerances.martingale_sigmas;
        parts.push(format!("{}: max |z| {:.2}", kappa_label(kappa), r.max_z));
        reports.push(json!({ "kappa": kappa, "zeta": [0.2, 1.0], "report": r }));
    }
    Ok(SuiteOutcome::new(passed, parts.join("; "), json!({ "reports": reports })))
}

// --------------------------------------------------------------------- drift

fn drift(cfg: &ExperimentConfig, seed: u64) -> Result<SuiteOutcome> {
    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    for (i, &kappa) in cfg.kappas_for(Suite::Drift).iter().enumerate() {
        let p = GreenParams::new(kappa)?;
        let err = drift_fd_check(&p, cfg.budgets.drift_states, derive_seed(seed, i as u64))?;
        worst = worst.max(err);
        rows.push(json!({ "kappa": kappa, "max_rel_error": err, "states": cfg.budgets.drift_states }));
    }
    let tol = cfg.tolerances.drift_rel;
    Ok(SuiteOutcome::new(
        worst < tol,
        format!("max relative drift error {worst:.2e} (tolerance {tol:.0e})"),
        json!({ "rows": rows }),
    ))
}

// ------------------------------------------------------------ oracle (disk)

/// Two-sided first segments against reweighted chordal traces, both stopped
/// on the circle `|z - ζ| = ρ` in the unit disk from -1 to 1, `ζ = 0`.
#[derive(Clone, Debug, Serialize)]
pub struct OracleComparison {
    pub kappa: f64,
    pub circle_radius: f64,
    /// Oracle radius `ε`.
    pub eps: f64,
    pub n: usize,
    pub chordal_total: usize,
    /// `ε^{d-2} P̂{dist(γ, 0) < ε}` with its standard error.
    pub oracle_mass: f64,
    pub oracle_mass_stderr: f64,
    pub twosided_failures: usize,
    /// Points per curve after uniform resampling in time.
    pub curve_points: usize,
    /// Prokhorov distance (`d_D`) of the normalized laws.
    pub distance: f64,
    /// Same distance between two independent two-sided sets of the same
    /// size: the Monte Carlo floor of `distance`.
    pub null_distance: f64,
    #[serde(skip)]
    pub twosided: PathEnsemble,
}

fn normalized_thin(curves: Vec<Curve>, points: usize) -> Result<PathEnsemble> {
    PathEnsemble::uniform(curves.iter().map(|c| c.resample_uniform(points)).collect(), 1.0)
}

pub fn twosided_oracle_comparison(kappa: f64, n: usize, h: f64, seed: u64) -> Result<OracleComparison> {
    const RHO: f64 = 0.2;
    const EPS: f64 = 0.05;
    const POINTS: usize = 16;
    if n < 2 {
        return Err(invalid("need at least two samples per law"));
    }
    let cfg = Configuration::disk(kappa, c(-1.0, 0.0), c(1.0, 0.0))?;
    let frame = cfg.frame().ok_or_else(|| invalid("disk configuration without a frame"))?;
    let p = GreenParams::new(kappa)?;
    let zeta = c(0.0, 0.0);

    let spec = TraceSpec::new(kappa, frame, h)?.with_focus(zeta, 0.0, EPS / 4.0, 0.25);
    let ch_seed = derive_seed(seed, 1);
    let (survivors, total) = sample_until(n, 40 * n, |k| {
        let (curve, _, outcome) = sample_in_frame(&spec, ch_seed, k)?;
        if outcome == Outcome::StepLimit || curve.distance_to(zeta) >= EPS {
            return Ok(None);
        }
        Ok(stop_at_circle(&curve, zeta, RHO))
    })?;
    if survivors.len() < 2 {
        return Err(SleError::EmptyEnsemble { survivors: survivors.len(), total });
    }
    let q = survivors.len() as f64 / total as f64;
    let scale = EPS.powf(p.d - 2.0);

    let opts = TwoSidedOptions { natural: false, ..TwoSidedOptions::new(h) };
    let (cfg, opts) = (&cfg, &opts);
    let tilted = |s: u64| {
        move |k: u64| match sample_tilted_segment(cfg, zeta, EPS, opts, s, k) {
            Ok(seg) => Ok(stop_at_circle(&seg, zeta, RHO)),
            Err(e) if recoverable(&e) => {
                log::warn!("tilted segment {k}: {e}");
                Ok(None)
            }
            Err(e) => Err(e),
        }
    };
    let (ts, used) = sample_until(survivors.len(), 2 * n, tilted(derive_seed(seed, 2)))?;
    let (ts_null, _) = sample_until(survivors.len(), 2 * n, tilted(derive_seed(seed, 3)))?;
    let twosided_failures = used - ts.len();
    let twosided = normalized_thin(ts, POINTS)?;
    let oracle = normalized_thin(survivors, POINTS)?;
    let null = normalized_thin(ts_null, POINTS)?;
    Ok(OracleComparison {
        kappa,
        circle_radius: RHO,
        eps: EPS,
        n: oracle.len(),
        chordal_total: total,
        oracle_mass: scale * q,
        oracle_mass_stderr: scale * (q * (1.0 - q) / total as f64).sqrt(),
        twosided_failures,
        curve_points: POINTS,
        distance: prokhorov(&twosided, &oracle, CurveMetricKind::Reparam),
        null_distance: prokhorov(&twosided, &null, CurveMetricKind::Reparam),
        twosided,
    })
}

fn twosided_oracle(cfg: &ExperimentConfig, seed: u64) -> Result<SuiteOutcome> {
    let tol = cfg.tolerances.oracle_distance;
    let mut reports = Vec::new();
    let mut artifacts = Vec::new();
    let mut passed = true;
    let mut parts = Vec::new();
    for (i, &kappa) in cfg.kappas_for(Suite::TwosidedOracle).iter().enumerate() {
        let r = twosided_oracle_comparison(kappa, cfg.budgets.oracle_n, cfg.h, derive_seed(seed, i as u64))?;
        passed &= r.distance <= tol;
        parts.push(format!(
            "{}: distance {:.3} (null {:.3}, threshold {tol})",
            kappa_label(kappa),
            r.distance,
            r.null_distance
        ));
        let mut buf = Vec::new();
        write_ensemble(&mut buf, &r.twosided)?;
        artifacts.push(Artifact { name: format!("twosided-oracle-k{i}.ens"), contents: buf });
        reports.push(r);
    }
    Ok(SuiteOutcome { passed, summary: parts.join("; "), metrics: json!({ "reports": reports }), artifacts })
}

// -------------------------------------------------------------------- escape

#[derive(Clone, Debug, Serialize)]
pub struct EscapeLaw {
    pub rows: Vec<EscapeRow>,
    pub slope: f64,
    pub slope_stderr: f64,
    /// Samples drawn and samples rejected by the sampler.
    pub n: usize,
    pub failures: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct EscapeReport {
    pub kappa: f64,
    /// `-(4a - 1)/2`.
    pub exponent: f64,
    pub twosided: EscapeLaw,
    /// Chordal traces weighted by their content in the square `S`.
    pub chordal: EscapeLaw,
    pub square_side: f64,
    pub chordal_hits: usize,
}

/// Weighted log-log fit of escape probability against radius over the rows
/// with `0 < p < 1`; weights are the inverse delta-method variances
/// `n_eff p / (1 - p)` of `log p`. `None` with fewer than two usable rows.
pub fn escape_slope(rows: &[EscapeRow]) -> Option<(f64, f64)> {
    let used: Vec<&EscapeRow> = rows.iter().filter(|r| r.p > 0.0 && r.p < 1.0 && r.n_eff > 0.0).collect();
    if used.len() < 2 {
        return None;
    }
    let x: Vec<f64> = used.iter().map(|r| r.r.ln()).collect();
    let y: Vec<f64> = used.iter().map(|r| r.p.ln()).collect();
    let w: Vec<f64> = used.iter().map(|r| r.n_eff * r.p / (1.0 - r.p)).collect();
    let fit = weighted_linear_fit(&x, &y, &w);
    // with inverse-variance weights the slope variance is 1 / Sxx
    let sw: f64 = w.iter().sum();
    let mx = x.iter().zip(&w).map(|(x, w)| x * w).sum::<f64>() / sw;
    let sxx: f64 = x.iter().zip(&w).map(|(x, w)| w * (x - mx).powi(2)).sum();
    Some((fit.slope, sxx.recip().sqrt()))
}

fn escape_law(rows: Vec<EscapeRow>, n: usize, failures: usize) -> EscapeLaw {
    let (slope, slope_stderr) = escape_slope(&rows).unwrap_or((f64::NAN, f64::NAN));
    EscapeLaw { rows, slope, slope_stderr, n, failures }
}

/// Escape statistics in the two-slit plane `C ∖ ((-∞,-1] ∪ [1,∞))` from -1
/// to 1 through `ζ = 0`, for two-sided radial SLE and for chordal SLE
/// weighted by its content in a square around 0.
pub fn escape_report(kappa: f64, n: usize, h: f64, radii: &[f64], seed: u64) -> Result<EscapeReport> {
    const SIDE: f64 = 0.5;
    let cfg = Configuration::two_slit(kappa)?;
    let frame = cfg.frame().ok_or_else(|| invalid("two-slit configuration without a frame"))?;
    let p = GreenParams::new(kappa)?;
    let zeta = c(0.0, 0.0);

    let opts = TwoSidedOptions { natural: false, ..TwoSidedOptions::new(h) };
    let ts_seed = derive_seed(seed, 1);
    let ts: Vec<Option<Curve>> = (0..n as u64)
        .into_par_iter()
        .map(|k| match sample_twosided(&cfg, zeta, 1.0 / 64.0, &opts, ts_seed, k) {
            Ok(s) => Ok(Some(s.curve)),
            Err(e) if recoverable(&e) => {
                log::warn!("two-sided sample {k}: {e}");
                Ok(None)
            }
            Err(e) => Err(e),
        })
        .collect::<Result<_>>()?;
    let ts: Vec<Curve> = ts.into_iter().flatten().collect();

    let eps = SIDE / 8.0;
    let square = Region::Rect(Rect::square(zeta, SIDE)?);
    let spec = TraceSpec::new(kappa, frame, h)?.with_focus(zeta, SIDE / std::f64::consts::SQRT_2, eps / 2.0, 0.25);
    let ch_seed = derive_seed(seed, 2);
    let ch: Vec<Option<(f64, Curve)>> = (0..n as u64)
        .into_par_iter()
        .map(|k| {
            let (curve, _, outcome) = sample_in_frame(&spec, ch_seed, k)?;
            if outcome == Outcome::StepLimit {
                log::warn!("chordal sample {k} hit the step limit");
                return Ok(None);
            }
            let w = minkowski_content(&curve, &square, &p, &Ladder::Explicit(vec![eps]))?.value;
            Ok(Some((w, curve)))
        })
        .collect::<Result<_>>()?;
    let ch: Vec<(f64, Curve)> = ch.into_iter().flatten().collect();
    let (weights, curves): (Vec<f64>, Vec<Curve>) = ch.into_iter().unzip();
    let chordal_hits = weights.iter().filter(|w| **w > 0.0).count();
    if ts.is_empty() || chordal_hits == 0 {
        return Err(SleError::EmptyEnsemble { survivors: ts.len().min(chordal_hits), total: n });
    }
    Ok(EscapeReport {
        kappa,
        exponent: -(4.0 * p.a - 1.0) / 2.0,
        twosided: escape_law(escape_stat(&ts, radii), n, n - ts.len()),
        chordal: escape_law(escape_stat_weighted(&curves, &weights, radii), n, n - curves.len()),
        square_side: SIDE,
        chordal_hits,
    })
}

fn escape_csv(reports: &[EscapeReport]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["kappa", "law", "r", "p", "lo", "hi", "n_eff"]).map_err(csv_err)?;
    for r in reports {
        for (law, rows) in [("twosided", &r.twosided.rows), ("chordal", &r.chordal.rows)] {
            for row in rows {
                w.write_record(&[
                    r.kappa.to_string(),
                    law.to_string(),
                    row.r.to_string(),
                    row.p.to_string(),
                    row.lo.to_string(),
                    row.hi.to_string(),
                    row.n_eff.to_string(),
                ])
                .map_err(csv_err)?;
            }
        }
    }
    w.into_inner().map_err(|e| SleError::Format(e.to_string()))
}

fn csv_err(e: csv::Error) -> SleError {
    SleError::Format(e.to_string())
}

const ESCAPE_GNUPLOT: &str = "set datafile separator ','
set logscale xy
set key autotitle columnhead
set xlabel 'r'
set ylabel 'P(escape)'
set terminal pngcairo size 800,600
set output 'escape.png'
plot for [law in 'twosided chordal'] 'escape.csv' using 3:(strcol(2) eq law ? $4 : 1/0):5:6 with yerrorlines title law
";

fn escape(cfg: &ExperimentConfig, seed: u64) -> Result<SuiteOutcome> {
    let radii = [2.0, 4.0, 8.0, 16.0];
    let slack = cfg.tolerances.escape_slack;
    let mut reports = Vec::new();
    let mut passed = true;
    let mut parts = Vec::new();
    for (i, &kappa) in cfg.kappas_for(Suite::Escape).iter().enumerate() {
        let r = escape_report(kappa, cfg.budgets.escape_n, cfg.h, &radii, derive_seed(seed, i as u64))?;
        let bound = r.exponent + slack;
        // a NaN slope (too few usable radii) fails the comparison
        passed &= r.twosided.slope <= bound && r.chordal.slope <= bound;
        parts.push(format!(
            "{}: slopes {:.3} / {:.3} (bound {:.3})",
            kappa_label(kappa),
            r.twosided.slope,
            r.chordal.slope,
            bound
        ));
        reports.push(r);
    }
    let artifacts = vec![
        Artifact { name: "escape.csv".into(), contents: escape_csv(&reports)? },
        Artifact { name: "escape.gp".into(), contents: ESCAPE_GNUPLOT.as_bytes().to_vec() },
    ];
    Ok(SuiteOutcome { passed, summary: parts.join("; "), metrics: json!({ "radii": radii, "reports": reports }), artifacts })
}

// ----------------------------------------------------------- content scaling

fn content_scaling(cfg: &ExperimentConfig, seed: u64) -> Result<SuiteOutcome> {
    let tol = cfg.tolerances.slope_tolerance;
    let mut reports = Vec::new();
    let mut passed = true;
    let mut parts = Vec::new();
    for (i, &kappa) in cfg.kappas_for(Suite::ContentScaling).iter().enumerate() {
        let disk = Configuration::disk(kappa, c(-1.0, 0.0), c(1.0, 0.0))?;
        let mut opts =
            ScanOptions::new(c(0.0, 0.0), vec![0.25, 0.125, 0.0625], cfg.budgets.scan_n, derive_seed(seed, i as u64));
        opts.h = cfg.h;
        let r = theta_moment_scan(&disk, &opts)?;
        passed &= (r.slope_twosided - r.d).abs() <= tol && (r.slope_chordal - r.d).abs() <= tol;
        parts.push(format!(
            "{}: slopes {:.3} / {:.3} vs d = {:.3}",
            kappa_label(kappa),
            r.slope_twosided,
            r.slope_chordal,
            r.d
        ));
        reports.push(r);
    }
    Ok(SuiteOutcome::new(passed, parts.join("; "), json!({ "reports": reports })))
}

// ---------------------------------------------------------------- lengthbias

/// Options used by the length-bias suite for `n` samples.
pub fn lengthbias_options(n: usize, h: f64, seed: u64) -> Result<VerifyOptions> {
    Ok(VerifyOptions {
        mesh_fractions: vec![0.25, 0.125, 0.0625],
        rule: SampleRule::Center,
        truncation: Truncation::new(0.5, 0.1, 0.1)?,
        aggregate: AggregateOptions {
            allocation: Allocation::Proportional(n),
            sampler: TwoSidedOptions::new(h),
            j_rule: JRule { factor: 1.0, exponent: 1.0 },
            c_kappa: 1.0,
        },
        chordal_n: n,
        curve_points: 16,
        atom_cap: 100_000,
        time_budget_secs: None,
        calibration_square: Some(Rect::square(c(0.0, 0.0), 0.5)?),
        seed,
    })
}

/// Prokhorov distance between two independent length-biased chordal
/// ensembles of `n` traces, thinned like the length-bias comparison.
pub fn lengthbias_null_distance(cfg: &Configuration, opts: &VerifyOptions) -> Result<f64> {
    let s = &opts.aggregate.sampler;
    let thin = |e: PathEnsemble| e.map_curves(|c| c.resample_uniform(opts.curve_points)).normalized();
    let a = thin(length_biased_chordal(cfg, opts.chordal_n, s.h, s.nat_eps, derive_seed(opts.seed, 0xD0))?)?;
    let b = thin(length_biased_chordal(cfg, opts.chordal_n, s.h, s.nat_eps, derive_seed(opts.seed, 0xD1))?)?;
    Ok(prokhorov(&a, &b, CurveMetricKind::Reparam))
}

fn lengthbias(cfg: &ExperimentConfig, seed: u64) -> Result<SuiteOutcome> {
    let tol = &cfg.tolerances;
    let mut reports = Vec::new();
    let mut artifacts = Vec::new();
    let mut passed = true;
    let mut parts = Vec::new();
    for (i, &kappa) in cfg.kappas_for(Suite::Lengthbias).iter().enumerate() {
        let disk = Configuration::disk(kappa, c(-1.0, 0.0), c(1.0, 0.0))?;
        let opts = lengthbias_options(cfg.budgets.lengthbias_n, cfg.h, derive_seed(seed, i as u64))?;
        let r = verify_lengthbias(&disk, &opts)?;
        let null = lengthbias_null_distance(&disk, &opts)?;
        let ok = r.complete
            && r.trend_ok
            && r.final_distance <= tol.lengthbias_distance
            && (tol.mass_ratio_lo..=tol.mass_ratio_hi).contains(&r.final_mass_ratio);
        passed &= ok;
        parts.push(format!(
            "{}: distance {:.3} (null {:.3}, threshold {}), mass ratio {:.3}, trend {}",
            kappa_label(kappa),
            r.final_distance,
            null,
            tol.lengthbias_distance,
            r.final_mass_ratio,
            if r.trend_ok { "ok" } else { "broken" }
        ));
        let csv_name = format!("lengthbias-k{i}.csv");
        let mut buf = Vec::new();
        r.write_csv(&mut buf)?;
        artifacts.push(Artifact { name: csv_name.clone(), contents: buf });
        artifacts.push(Artifact {
            name: format!("lengthbias-k{i}.gp"),
            contents: r.gnuplot_script(&csv_name, &format!("lengthbias-k{i}.png")).into_bytes(),
        });
        reports.push(json!({ "report": r, "null_distance": null }));
    }
    Ok(SuiteOutcome { passed, summary: parts.join("; "), metrics: json!({ "reports": reports }), artifacts })
}

// -------------------------------------------------------------------- metric

fn metric_props(cfg: &ExperimentConfig, seed: u64) -> Result<SuiteOutcome> {
    let rows = metric::metric_suite(cfg.budgets.metric_trials, seed, cfg.tolerances.metric_slack)?;
    let failures: usize = rows.iter().map(|r| r.failures).sum();
    let summary = format!("{} properties × {} trials, {failures} failures", rows.len(), cfg.budgets.metric_trials);
    Ok(SuiteOutcome::new(failures == 0, summary, json!({ "rows": rows })))
}

// ------------------------------------------------------------- integrability

#[derive(Clone, Debug, Serialize)]
pub struct IntegrabilityReport {
    pub kappa: f64,
    /// `κ < 8(√2 - 1)`.
    pub predicate: bool,
    pub tail_exponent: f64,
    /// Outer radii `2^k` of the dyadic shells.
    pub radii: Vec<f64>,
    /// `∫ G_{H,-1,1}` over the shell `2^{k-1} < |ζ| < 2^k`.
    pub shells: Vec<f64>,
    /// `log2` of the last shell ratio, and its asymptotic value
    /// `-(tail_exponent + 1)`.
    pub growth_log2: f64,
    pub predicted_log2: f64,
    /// Shells shrink geometrically.
    pub converges: bool,
    /// The predicate holds just below `8(√2 - 1)` and fails just above.
    pub threshold_flip: bool,
}

pub fn integrability_check(kappa: f64) -> Result<IntegrabilityReport> {
    let p = GreenParams::new(kappa)?;
    let radii: Vec<f64> = (1..=8).map(|k| 2f64.powi(k)).collect();
    let shells: Vec<f64> = radii.windows(2).map(|r| annulus_integral(&p, -1.0, 1.0, r[0], r[1], 1e-9)).collect::<Result<_>>()?;
    let n = shells.len();
    let growth_log2 = (shells[n - 1] / shells[n - 2]).log2();
    let te = tail_exponent(kappa)?;
    let threshold = 8.0 * (2f64.sqrt() - 1.0);
    Ok(IntegrabilityReport {
        kappa,
        predicate: tail_integrability(kappa)?,
        tail_exponent: te,
        radii: radii[1..].to_vec(),
        shells,
        growth_log2,
        predicted_log2: -(te + 1.0),
        converges: growth_log2 < 0.0,
        threshold_flip: tail_integrability(threshold - 1e-6)? && !tail_integrability(threshold + 1e-6)?,
    })
}

fn integrability(cfg: &ExperimentConfig) -> Result<SuiteOutcome> {
    let slack = cfg.tolerances.integrability_growth;
    let mut reports = Vec::new();
    let mut passed = true;
    let mut parts = Vec::new();
    for &kappa in &cfg.kappas_for(Suite::Integrability) {
        let r = integrability_check(kappa)?;
        passed &= r.predicate == r.converges && (r.growth_log2 - r.predicted_log2).abs() <= slack && r.threshold_flip;
        parts.push(format!(
            "{}: {} (shell growth 2^{:.3}, predicted 2^{:.3})",
            kappa_label(kappa),
            if r.converges { "convergent" } else { "divergent" },
            r.growth_log2,
            r.predicted_log2
        ));
        reports.push(r);
    }
    Ok(SuiteOutcome::new(passed, parts.join("; "), json!({ "reports": reports })))
}
