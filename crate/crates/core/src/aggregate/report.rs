//! Mesh-ladder comparison of the Riemann aggregate with length-biased
//! chordal SLE, with JSON, CSV and gnuplot output.

use super::{calibrate_c_kappa, excised_mass, riemann_aggregate, sample_chordal_natural, theta_in_rects, AggregateOptions};
use crate::curvespace::{Curve, CurveMetricKind};
use crate::error::{invalid, Result};
use crate::green::{green_integral_unit_disk, Configuration, Domain, GreenParams};
use crate::measures::{prokhorov, PartitionSpec, PathEnsemble, Rect, SampleRule, Truncation};
use crate::rng::derive_seed;
use crate::stats::mean_stderr;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::time::Instant;

pub const AGG_SCHEMA: &str = "agg-v1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    /// Cell diagonals as fractions of the domain diameter, coarse to fine.
    pub mesh_fractions: Vec<f64>,
    pub rule: SampleRule,
    pub truncation: Truncation,
    pub aggregate: AggregateOptions,
    pub chordal_n: usize,
    /// Points per curve (uniform in time) in the Prokhorov comparisons.
    pub curve_points: usize,
    /// Atom cap for the Prokhorov comparisons.
    pub atom_cap: usize,
    /// Stop before starting a mesh once this many seconds have passed.
    pub time_budget_secs: Option<f64>,
    /// Calibrate `c_κ` as `Ê[Θ(S)] / ∫_S G` on this square from the chordal
    /// traces, overriding `aggregate.c_kappa`.
    pub calibration_square: Option<Rect>,
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct MeshRow {
    pub mesh_fraction: f64,
    /// Realized cell diagonal.
    pub mesh: f64,
    pub cells_kept: usize,
    pub cells_interior: usize,
    pub cells_boundary: usize,
    pub atoms: usize,
    pub failures: usize,
    /// `|ν_P|`.
    pub nu_mass: f64,
    /// Mass of boundary-adjacent cells.
    pub discarded_mass: f64,
    pub deficit_mass: f64,
    /// `Ê[Θ(γ ∩ ∪I)]` over the chordal traces.
    pub chordal_mass: f64,
    pub chordal_mass_stderr: f64,
    /// `|ν_P| / Ê[Θ(γ ∩ ∪I)]`.
    pub mass_ratio_cells: f64,
    /// `|ν_P| / Ê[t_γ]`.
    pub mass_ratio: f64,
    /// Prokhorov distance (`d_D`) between the normalized aggregate and the
    /// normalized chordal ensemble weighted by `Θ(γ ∩ ∪I)`.
    pub distance: f64,
    /// Split-half estimate of the standard deviation of `distance`.
    pub distance_sigma: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct AggregateReport {
    pub schema: String,
    pub kappa: f64,
    pub convention: String,
    pub config: VerifyOptions,
    pub c_kappa: f64,
    /// Zero when `c_κ` was given rather than calibrated.
    pub c_kappa_stderr: f64,
    pub rows: Vec<MeshRow>,
    /// Every consecutive pair satisfies `d_{k+1} ≤ d_k + 2σ`.
    pub trend_ok: bool,
    pub final_distance: f64,
    /// `|ν_P| / Ê[t_γ]` at the finest mesh.
    pub final_mass_ratio: f64,
    /// `Ê[t_γ]` and its standard error.
    pub length_mean: f64,
    pub length_stderr: f64,
    /// `∫_D G` with the calibrated constant.
    pub green_mass: f64,
    /// `∫_{D ∖ D_{r,s,t}} G`.
    pub excised_mass: f64,
    pub complete: bool,
}

fn thin(e: &PathEnsemble, points: usize, cap: usize, seed: u64) -> Result<PathEnsemble> {
    e.resample(cap, seed)?.map_curves(|c| c.resample_uniform(points)).normalized()
}

/// Split `e` into its even and odd atoms.
fn halves(e: &PathEnsemble) -> Result<(PathEnsemble, PathEnsemble)> {
    let mut a = PathEnsemble::empty();
    let mut b = PathEnsemble::empty();
    for (k, (w, c)) in e.iter().enumerate() {
        if k % 2 == 0 { a.push(w, c.clone())? } else { b.push(w, c.clone())? }
    }
    Ok((a, b))
}

/// Prokhorov distance and a split-half spread estimate.
fn compare(a: &PathEnsemble, b: &PathEnsemble) -> Result<(f64, f64)> {
    let d = prokhorov(a, b, CurveMetricKind::Reparam);
    let (a0, a1) = halves(a)?;
    let (b0, b1) = halves(b)?;
    let d0 = prokhorov(&a0.normalized()?, &b0.normalized()?, CurveMetricKind::Reparam);
    let d1 = prokhorov(&a1.normalized()?, &b1.normalized()?, CurveMetricKind::Reparam);
    // each half carries twice the variance of the full comparison
    Ok((d, (d0 - d1).abs() / 2.0))
}

/// Compare the Riemann aggregate at each mesh with chordal SLE weighted by
/// the natural time it spends in the sampled cells.
pub fn verify_lengthbias(cfg: &Configuration, opts: &VerifyOptions) -> Result<AggregateReport> {
    if !matches!(cfg.domain, Domain::UnitDisk) {
        return Err(invalid("verify_lengthbias runs on the unit disk"));
    }
    if opts.mesh_fractions.is_empty() || opts.mesh_fractions.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(invalid("mesh ladder must be nonempty and decreasing"));
    }
    if opts.chordal_n < 2 || opts.curve_points < 2 {
        return Err(invalid("need at least two chordal traces and two points per curve"));
    }
    let start = Instant::now();
    let sampler = &opts.aggregate.sampler;
    let chordal_seed = derive_seed(opts.seed, 0xC0);
    let chordal: Vec<Curve> = (0..opts.chordal_n as u64)
        .into_par_iter()
        .map(|k| sample_chordal_natural(cfg, sampler.h, sampler.nat_eps, chordal_seed, k))
        .collect::<Result<_>>()?;
    let lengths: Vec<f64> = chordal.iter().map(Curve::duration).collect();
    let (length_mean, length_stderr) = mean_stderr(&lengths);
    let mut agg_opts = opts.aggregate.clone();
    let mut c_kappa_stderr = 0.0;
    if let Some(sq) = opts.calibration_square {
        let (c, se) = calibrate_c_kappa(cfg, &chordal, &sq, 1e-8)?;
        log::info!("calibrated c_kappa = {c:.4} ± {se:.4}");
        agg_opts.c_kappa = c;
        c_kappa_stderr = se;
    }
    let p = GreenParams::new(cfg.kappa)?.with_constant(agg_opts.c_kappa)?;
    let diam = 2.0;
    let square = Rect::new(-1.0, -1.0, 1.0, 1.0)?;
    let mut rows = Vec::new();
    let mut complete = true;
    for (k, &frac) in opts.mesh_fractions.iter().enumerate() {
        if opts.time_budget_secs.is_some_and(|b| start.elapsed().as_secs_f64() > b) {
            complete = false;
            break;
        }
        let t0 = Instant::now();
        let part = PartitionSpec::new(square, frac * diam, opts.rule, opts.truncation)?;
        let agg = riemann_aggregate(cfg, &part, &agg_opts, derive_seed(opts.seed, k as u64 + 1))?;
        let rects = agg.interior_rects(&part);
        let theta: Vec<f64> = chordal.par_iter().map(|c| theta_in_rects(c, &rects)).collect();
        let (chordal_mass, chordal_mass_stderr) = mean_stderr(&theta);
        let weighted = PathEnsemble::new(
            chordal.iter().zip(&theta).filter(|(_, &t)| t > 0.0).map(|(c, &t)| (t, c.clone())).collect(),
        )?;
        let a = thin(&agg.ensemble, opts.curve_points, opts.atom_cap, derive_seed(opts.seed, 0xA0 + k as u64))?;
        let b = thin(&weighted, opts.curve_points, opts.atom_cap, derive_seed(opts.seed, 0xB0 + k as u64))?;
        let (distance, distance_sigma) = compare(&a, &b)?;
        let row = MeshRow {
            mesh_fraction: frac,
            mesh: agg.mesh,
            cells_kept: agg.cells.len(),
            cells_interior: agg.cells.iter().filter(|c| !c.boundary).count(),
            cells_boundary: agg.cells.iter().filter(|c| c.boundary).count(),
            atoms: agg.ensemble.len(),
            failures: agg.cells.iter().map(|c| c.failures).sum(),
            nu_mass: agg.interior_mass,
            discarded_mass: agg.discarded_mass,
            deficit_mass: agg.deficit_mass,
            chordal_mass,
            chordal_mass_stderr,
            mass_ratio_cells: agg.interior_mass / chordal_mass,
            mass_ratio: agg.interior_mass / length_mean,
            distance,
            distance_sigma,
        };
        log::info!(
            "mesh {frac}: distance {distance:.4} ± {distance_sigma:.4}, mass ratio {:.3} ({:.1}s)",
            row.mass_ratio,
            t0.elapsed().as_secs_f64()
        );
        rows.push(row);
    }
    let trend_ok = rows.windows(2).all(|w| {
        let ci = 2.0 * (w[0].distance_sigma.powi(2) + w[1].distance_sigma.powi(2)).sqrt();
        w[1].distance <= w[0].distance + ci
    });
    complete &= rows.len() == opts.mesh_fractions.len();
    let last = rows.last();
    Ok(AggregateReport {
        schema: AGG_SCHEMA.into(),
        kappa: cfg.kappa,
        convention: crate::loewner::CONVENTION.into(),
        config: opts.clone(),
        c_kappa: agg_opts.c_kappa,
        c_kappa_stderr,
        trend_ok,
        final_distance: last.map_or(f64::NAN, |r| r.distance),
        final_mass_ratio: last.map_or(f64::NAN, |r| r.mass_ratio),
        rows,
        length_mean,
        length_stderr,
        green_mass: green_integral_unit_disk(cfg, &p, 1e-8)?,
        excised_mass: excised_mass(cfg, &opts.truncation, &p, 1e-8)?,
        complete,
    })
}

impl AggregateReport {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for r in &self.rows {
            w.serialize(r).map_err(|e| crate::error::SleError::Format(e.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    /// Gnuplot script plotting distance against mesh from `csv_name`.
    pub fn gnuplot_script(&self, csv_name: &str, png_name: &str) -> String {
        format!(
            "set datafile separator ','\n\
             set terminal pngcairo size 800,600\n\
             set output '{png_name}'\n\
             set logscale x\n\
             set xlabel 'mesh (fraction of diameter)'\n\
             set ylabel 'Prokhorov distance'\n\
             set key top left\n\
             plot '{csv_name}' using 1:15:(2*$16) skip 1 with yerrorlines title 'aggregate vs length-biased chordal'\n"
        )
    }
}
