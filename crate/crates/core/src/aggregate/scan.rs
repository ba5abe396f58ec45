//! Moment scaling of natural length in small disks around an interior point.

use crate::conformal::C64;
use crate::content::{minkowski_content, Ladder, Region};
use crate::curvespace::Curve;
use crate::error::{invalid, Result, SleError};
use crate::green::{two_point_green_comparison, Configuration, GreenParams};
use crate::loewner::{sample_in_frame, Outcome, TraceSpec};
use crate::measures::Rect;
use crate::quad;
use crate::rng::derive_seed;
use crate::stats::{linear_fit, mean_stderr, ratio_mean_stderr};
use crate::twosided::{sample_twosided, TwoSidedOptions};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanOptions {
    pub zeta: (f64, f64),
    /// Diameters of the disks `U` centred at `ζ`, decreasing.
    pub diameters: Vec<f64>,
    pub n: usize,
    /// Bulk spatial step.
    pub h: f64,
    /// Content scale as a fraction of `diam(U)`.
    pub eps_fraction: f64,
    pub seed: u64,
}

impl ScanOptions {
    pub fn new(zeta: C64, diameters: Vec<f64>, n: usize, seed: u64) -> Self {
        ScanOptions { zeta: (zeta.re, zeta.im), diameters, n, h: 0.05, eps_fraction: 0.125, seed }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanRow {
    pub diameter: f64,
    pub eps: f64,
    /// `Ê[Θ(U)]` under two-sided radial SLE through `ζ`.
    pub twosided: f64,
    pub twosided_stderr: f64,
    /// `Ê[Θ(U)]` under chordal SLE weighted by `Θ(S)`.
    pub chordal: f64,
    pub chordal_stderr: f64,
    /// `∫_U` of the two-point comparison function, up to a constant.
    pub quadrature: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanReport {
    pub kappa: f64,
    pub d: f64,
    pub rows: Vec<ScanRow>,
    pub slope_twosided: f64,
    pub slope_twosided_stderr: f64,
    pub slope_chordal: f64,
    pub slope_chordal_stderr: f64,
    pub slope_quadrature: f64,
    /// Side of the weighting square `S`, inscribed in the smallest disk.
    pub square_side: f64,
    /// Chordal traces with `Θ(S) > 0`.
    pub chordal_hits: usize,
    pub twosided_failures: usize,
    pub chordal_failures: usize,
    pub n: usize,
}

fn theta(curve: &Curve, region: &Region, eps: f64, p: &GreenParams) -> Result<f64> {
    Ok(minkowski_content(curve, region, p, &Ladder::Explicit(vec![eps]))?.value)
}

/// Standard error of an OLS slope when `y_i = log m_i` has standard error
/// `rel_i` (relative error of `m_i`), treating the points as independent.
fn slope_stderr(x: &[f64], rel: &[f64]) -> f64 {
    let mx = x.iter().sum::<f64>() / x.len() as f64;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    x.iter().zip(rel).map(|(v, r)| ((v - mx) / sxx * r).powi(2)).sum::<f64>().sqrt()
}

/// `∫_{B(ζ, diam/2)}` of the two-point comparison function of `ζ` and `ω`,
/// evaluated in the sampling half-plane. Proportional to `E[Θ(U)]` under
/// two-sided radial SLE up to bounded factors.
pub fn comparison_integral(cfg: &Configuration, zeta: C64, diam: f64, p: &GreenParams) -> Result<f64> {
    let frame = cfg.frame().ok_or_else(|| invalid("the comparison needs a configuration with an explicit frame"))?;
    let zh = frame.from_domain(zeta);
    Ok(quad::integrate_disk(|w| two_point_green_comparison(zh, frame.from_domain(w), p).unwrap_or(0.0), zeta, diam / 2.0, 1e-8))
}

/// Check `dist(U, ∂D) ≥ 3 diam(U)` for every disk of the ladder.
fn check_ladder(cfg: &Configuration, zeta: C64, diameters: &[f64]) -> Result<()> {
    if diameters.len() < 2 || diameters.windows(2).any(|w| !(w[1] < w[0])) || !(diameters[diameters.len() - 1] > 0.0) {
        return Err(invalid("need at least two positive decreasing diameters"));
    }
    let dist = cfg.boundary_distance(zeta)?;
    if dist - diameters[0] / 2.0 < 3.0 * diameters[0] {
        return Err(SleError::Precondition(format!(
            "disk of diameter {} around {zeta} is closer than three diameters to the boundary",
            diameters[0]
        )));
    }
    Ok(())
}

/// Per-diameter estimates of `E[Θ(U)]` for disks `U` centred at `ζ`, under
/// two-sided radial SLE through `ζ` and under chordal SLE weighted by
/// `Θ(S)`, with log-log slopes against `diam(U)`.
pub fn theta_moment_scan(cfg: &Configuration, opts: &ScanOptions) -> Result<ScanReport> {
    let zeta = C64::new(opts.zeta.0, opts.zeta.1);
    check_ladder(cfg, zeta, &opts.diameters)?;
    if opts.n < 2 || !(opts.eps_fraction > 0.0 && opts.eps_fraction <= 0.5) {
        return Err(invalid("need n >= 2 and an eps fraction in (0, 1/2]"));
    }
    let frame = cfg.frame().ok_or_else(|| invalid("the scan needs a configuration with an explicit frame"))?;
    let p = GreenParams::new(cfg.kappa)?;
    let dmin = *opts.diameters.last().unwrap();
    let fine = 0.5 * opts.eps_fraction * dmin;
    let disks: Vec<(Region, f64)> =
        opts.diameters.iter().map(|&d| Ok((Region::disk(zeta, d / 2.0)?, opts.eps_fraction * d))).collect::<Result<_>>()?;
    let side = dmin / std::f64::consts::SQRT_2;
    let square = Region::Rect(Rect::new(zeta.re - side / 2.0, zeta.im - side / 2.0, zeta.re + side / 2.0, zeta.im + side / 2.0)?);
    let eps_square = opts.eps_fraction * side * std::f64::consts::SQRT_2;
    // steps at distance ρ from ζ are ρ/8, enough for ε = diam/8 inside U
    let near = 0.125;

    let mut two = TwoSidedOptions::new(opts.h);
    two.natural = false;
    two.near_factor = near;
    two.h_target = Some(fine);
    let stop = fine;
    let ts_seed = derive_seed(opts.seed, 1);
    let ts: Vec<Option<Vec<f64>>> = (0..opts.n as u64)
        .into_par_iter()
        .map(|k| match sample_twosided(cfg, zeta, stop, &two, ts_seed, k) {
            Ok(s) => disks.iter().map(|(r, e)| theta(&s.curve, r, *e, &p)).collect::<Result<Vec<_>>>().map(Some),
            Err(e) => {
                log::warn!("two-sided sample {k}: {e}");
                Ok(None)
            }
        })
        .collect::<Result<_>>()?;

    let spec = TraceSpec::new(cfg.kappa, frame, opts.h)?.with_focus(zeta, 0.0, fine.min(opts.h), near);
    let ch_seed = derive_seed(opts.seed, 2);
    let ch: Vec<Option<(f64, Vec<f64>)>> = (0..opts.n as u64)
        .into_par_iter()
        .map(|k| {
            let (curve, _, outcome) = sample_in_frame(&spec, ch_seed, k)?;
            if outcome == Outcome::StepLimit {
                log::warn!("chordal sample {k} hit the step limit");
                return Ok(None);
            }
            let ts = theta(&curve, &square, eps_square, &p)?;
            if ts == 0.0 {
                return Ok(Some((0.0, vec![0.0; disks.len()])));
            }
            let tu = disks.iter().map(|(r, e)| theta(&curve, r, *e, &p)).collect::<Result<Vec<_>>>()?;
            Ok(Some((ts, tu)))
        })
        .collect::<Result<_>>()?;

    let ts_ok: Vec<&Vec<f64>> = ts.iter().flatten().collect();
    let ch_ok: Vec<&(f64, Vec<f64>)> = ch.iter().flatten().collect();
    if ts_ok.len() < 2 || ch_ok.iter().filter(|(w, _)| *w > 0.0).count() < 2 {
        return Err(SleError::EmptyEnsemble { survivors: ts_ok.len().min(ch_ok.len()), total: opts.n });
    }
    let weights: Vec<f64> = ch_ok.iter().map(|(w, _)| *w).collect();
    let mut rows = Vec::new();
    for (j, (&diam, (_, eps))) in opts.diameters.iter().zip(&disks).enumerate() {
        let (m, se) = mean_stderr(&ts_ok.iter().map(|v| v[j]).collect::<Vec<_>>());
        let (cm, cse) = ratio_mean_stderr(&weights, &ch_ok.iter().map(|(_, v)| v[j]).collect::<Vec<_>>());
        let quadrature = comparison_integral(cfg, zeta, diam, &p)?;
        rows.push(ScanRow { diameter: diam, eps: *eps, twosided: m, twosided_stderr: se, chordal: cm, chordal_stderr: cse, quadrature });
    }
    let x: Vec<f64> = rows.iter().map(|r| r.diameter.ln()).collect();
    let fit = |f: &dyn Fn(&ScanRow) -> f64| linear_fit(&x, &rows.iter().map(|r| f(r).ln()).collect::<Vec<_>>()).slope;
    let a = (fit(&|r| r.twosided), slope_stderr(&x, &rows.iter().map(|r| r.twosided_stderr / r.twosided).collect::<Vec<_>>()));
    let b = (fit(&|r| r.chordal), slope_stderr(&x, &rows.iter().map(|r| r.chordal_stderr / r.chordal).collect::<Vec<_>>()));
    Ok(ScanReport {
        kappa: cfg.kappa,
        d: p.d,
        slope_twosided: a.0,
        slope_twosided_stderr: a.1,
        slope_chordal: b.0,
        slope_chordal_stderr: b.1,
        slope_quadrature: fit(&|r| r.quadrature),
        square_side: side,
        chordal_hits: weights.iter().filter(|w| **w > 0.0).count(),
        twosided_failures: opts.n - ts_ok.len(),
        chordal_failures: opts.n - ch_ok.len(),
        n: opts.n,
        rows,
    })
}
