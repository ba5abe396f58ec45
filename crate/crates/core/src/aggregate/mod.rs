//! The aggregate `ν = ∫ μ_ζ dA(ζ)` of two-sided radial measures as a
//! Riemann sum over a truncated grid, and its comparison with chordal SLE
//! weighted by natural length.

mod report;
mod scan;

pub use report::{verify_lengthbias, AggregateReport, MeshRow, VerifyOptions, AGG_SCHEMA};
pub use scan::{comparison_integral, theta_moment_scan, ScanOptions, ScanReport, ScanRow};

use crate::conformal::C64;
use crate::content::{natural_reparam, Ladder};
use crate::curvespace::Curve;
use crate::error::{invalid, Result, SleError};
use crate::green::{green_config, Configuration, Domain, GreenParams};
use crate::loewner::{sample_in_frame, Outcome, TraceSpec};
use crate::measures::{PartitionSpec, PathEnsemble, Rect, Truncation};
use crate::quad;
use crate::rng::derive_seed;
use crate::twosided::{sample_twosided, TwoSidedOptions};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Chordal trace in the configuration, parametrized by single-scale natural
/// time at `nat_eps`.
pub fn sample_chordal_natural(cfg: &Configuration, h: f64, nat_eps: f64, seed: u64, path: u64) -> Result<Curve> {
    let frame = cfg.frame().ok_or_else(|| invalid("chordal sampling needs a configuration with an explicit frame"))?;
    let spec = TraceSpec::new(cfg.kappa, frame, h)?;
    let (curve, _, outcome) = sample_in_frame(&spec, seed, path)?;
    if outcome == Outcome::StepLimit {
        return Err(SleError::ResourceLimit { message: "chordal trace hit the step limit".into(), suggested_floor: h });
    }
    let p = GreenParams::new(cfg.kappa)?;
    natural_reparam(&curve, &p, &Ladder::Explicit(vec![nat_eps]))
}

/// `n` naturally parametrized chordal traces, each weighted by its natural
/// length `t_γ`.
pub fn length_biased_chordal(cfg: &Configuration, n: usize, h: f64, nat_eps: f64, seed: u64) -> Result<PathEnsemble> {
    if n == 0 {
        return Err(invalid("need at least one trace"));
    }
    let curves: Vec<Curve> =
        (0..n as u64).into_par_iter().map(|k| sample_chordal_natural(cfg, h, nat_eps, seed, k)).collect::<Result<_>>()?;
    PathEnsemble::new(curves.into_iter().map(|c| (c.duration(), c)).collect())
}

/// Which cells count as boundary-adjacent (`J`): those whose tag lies within
/// `factor · mesh^exponent` of the boundary.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JRule {
    pub factor: f64,
    pub exponent: f64,
}

impl Default for JRule {
    fn default() -> Self {
        JRule { factor: 1.0, exponent: 0.5 }
    }
}

impl JRule {
    pub fn threshold(&self, mesh: f64) -> f64 {
        self.factor * mesh.powf(self.exponent)
    }
}

/// How samples are spread over the interior cells.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Allocation {
    /// The same number of two-sided samples in every cell.
    PerCell(usize),
    /// A total budget split in proportion to the cell masses (at least one
    /// sample per cell), so atoms carry nearly equal weights.
    Proportional(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateOptions {
    pub allocation: Allocation,
    pub sampler: TwoSidedOptions,
    pub j_rule: JRule,
    /// Green's function normalization `c_κ`.
    pub c_kappa: f64,
}

/// Per-cell bookkeeping.
#[derive(Clone, Debug, Serialize)]
pub struct CellRecord {
    pub index: usize,
    pub tag: (f64, f64),
    pub area: f64,
    /// `A(Q) G(ζ_Q)`.
    pub mass: f64,
    pub boundary: bool,
    pub samples: usize,
    pub failures: usize,
}

#[derive(Clone, Debug)]
pub struct Aggregate {
    /// `Σ_{Q ∈ I} A(Q) G(ζ_Q) μ_{ζ_Q}^#`.
    pub ensemble: PathEnsemble,
    pub cells: Vec<CellRecord>,
    /// Mass carried by the samples, `|ν_P|`.
    pub interior_mass: f64,
    /// Mass of the boundary-adjacent cells `J`, kept as bookkeeping only.
    pub discarded_mass: f64,
    /// Share of the interior mass lost to sampler failures.
    pub deficit_mass: f64,
    pub mesh: f64,
}

impl Aggregate {
    /// Rectangles of the interior cells that carry samples.
    pub fn interior_rects(&self, part: &PartitionSpec) -> Vec<Rect> {
        let all = part.cells();
        self.cells.iter().filter(|c| !c.boundary && c.samples > c.failures).map(|c| all[c.index].rect).collect()
    }
}

fn split_budget(masses: &[f64], total: usize) -> Vec<usize> {
    let sum: f64 = masses.iter().sum();
    let mut n: Vec<usize> = masses.iter().map(|m| ((m / sum) * total as f64).round().max(1.0) as usize).collect();
    if n.is_empty() {
        return n;
    }
    // fix rounding drift on the heaviest cell
    let have: usize = n.iter().sum();
    let k = (0..masses.len()).max_by(|&i, &j| masses[i].total_cmp(&masses[j])).unwrap();
    if have > total {
        n[k] = n[k].saturating_sub(have - total).max(1);
    } else {
        n[k] += total - have;
    }
    n
}

/// Riemann-sum aggregate over the cells of `part` whose tags lie in the
/// truncated domain. Boundary-adjacent cells contribute mass bookkeeping
/// only. Each of the `n` samples in a cell carries `A(Q) G(ζ_Q) / n`;
/// failed samples are logged and their share is recorded as deficit.
pub fn riemann_aggregate(cfg: &Configuration, part: &PartitionSpec, opts: &AggregateOptions, seed: u64) -> Result<Aggregate> {
    let w = cfg.w.ok_or_else(|| invalid("the aggregate needs a finite target point"))?;
    let p = GreenParams::new(cfg.kappa)?.with_constant(opts.c_kappa)?;
    let dist = cfg.boundary_distance_fn();
    let kept = part.kept_cells(|q| cfg.contains(q), cfg.z, w);
    if kept.is_empty() {
        return Err(invalid("no cell tag lies in the truncated domain"));
    }
    let mesh = part.actual_mesh();
    let j = opts.j_rule.threshold(mesh);
    let mut cells: Vec<CellRecord> = kept
        .iter()
        .map(|q| {
            let mass = q.rect.area() * green_config(cfg, q.tag, &p)?;
            Ok(CellRecord {
                index: q.index,
                tag: (q.tag.re, q.tag.im),
                area: q.rect.area(),
                mass,
                boundary: dist(q.tag) < j,
                samples: 0,
                failures: 0,
            })
        })
        .collect::<Result<_>>()?;
    let interior: Vec<usize> = (0..cells.len()).filter(|&k| !cells[k].boundary).collect();
    let budget = match opts.allocation {
        Allocation::PerCell(n) => vec![n; interior.len()],
        Allocation::Proportional(total) => split_budget(&interior.iter().map(|&k| cells[k].mass).collect::<Vec<_>>(), total),
    };
    let stops: Vec<f64> = interior.iter().map(|&k| dist(C64::new(cells[k].tag.0, cells[k].tag.1)) / 64.0).collect();
    let per_cell: Vec<(Vec<Curve>, usize)> = interior
        .par_iter()
        .zip(budget.par_iter().zip(stops.par_iter()))
        .map(|(&k, (&n, &stop))| {
            let c = &cells[k];
            let zeta = C64::new(c.tag.0, c.tag.1);
            let cell_seed = derive_seed(seed, c.index as u64);
            let mut curves = Vec::with_capacity(n);
            let mut failures = 0;
            for path in 0..n as u64 {
                match sample_twosided(cfg, zeta, stop, &opts.sampler, cell_seed, path) {
                    Ok(s) => curves.push(s.curve),
                    Err(e) => {
                        log::warn!("cell {} sample {path}: {e}", c.index);
                        failures += 1;
                    }
                }
            }
            (curves, failures)
        })
        .collect();
    let mut ensemble = PathEnsemble::empty();
    let mut interior_mass = 0.0;
    let mut deficit_mass = 0.0;
    for ((&k, &n), (curves, failures)) in interior.iter().zip(&budget).zip(per_cell) {
        let c = &mut cells[k];
        c.samples = n;
        c.failures = failures;
        let share = c.mass / n as f64;
        deficit_mass += share * failures as f64;
        if curves.is_empty() {
            continue;
        }
        interior_mass += share * curves.len() as f64;
        ensemble.extend(&PathEnsemble::uniform(curves, share * (n - failures) as f64)?);
    }
    let discarded_mass = cells.iter().filter(|c| c.boundary).map(|c| c.mass).sum();
    Ok(Aggregate { ensemble, cells, interior_mass, discarded_mass, deficit_mass, mesh })
}

/// `Θ(γ ∩ ∪ rects)` for a naturally parametrized curve and disjoint
/// rectangles.
pub fn theta_in_rects(nat: &Curve, rects: &[Rect]) -> f64 {
    let (t, p) = (nat.times(), nat.points());
    let mut total = 0.0;
    for k in 1..p.len() {
        let (a, b) = (p[k - 1], p[k]);
        let dt = t[k] - t[k - 1];
        if dt == 0.0 {
            continue;
        }
        let (x0, x1) = (a.re.min(b.re), a.re.max(b.re));
        let (y0, y1) = (a.im.min(b.im), a.im.max(b.im));
        for r in rects {
            if r.x1 < x0 || r.x0 > x1 || r.y1 < y0 || r.y0 > y1 {
                continue;
            }
            if let Some((s0, s1)) = crate::content::Region::Rect(*r).clip(a, b) {
                total += (s1 - s0) * dt;
            }
        }
    }
    total
}

/// Content-consistent `c_κ = Ê[Θ(γ ∩ S)] / ∫_S G` (with `c_κ = 1` in the
/// integral) from naturally parametrized traces, with its standard error.
pub fn calibrate_c_kappa(cfg: &Configuration, traces: &[Curve], square: &Rect, tol: f64) -> Result<(f64, f64)> {
    if traces.len() < 2 {
        return Err(invalid("calibration needs at least two traces"));
    }
    let p = GreenParams::new(cfg.kappa)?;
    let integral = crate::green::green_integral_rect(cfg, square, &p, tol);
    if !(integral > 0.0) {
        return Err(invalid("the calibration square carries no Green's function mass"));
    }
    let theta: Vec<f64> = traces.par_iter().map(|c| theta_in_rects(c, std::slice::from_ref(square))).collect();
    let (m, se) = crate::stats::mean_stderr(&theta);
    Ok((m / integral, se / integral))
}

/// `∫_{D ∖ D_{r,s,t}} G dA` for the unit disk: the parts of the disk within
/// `s` of `z` and within `t` of `w` (the outer truncation is inactive for a
/// bounded domain). The two excised pieces must be disjoint.
pub fn excised_mass(cfg: &Configuration, trunc: &Truncation, p: &GreenParams, tol: f64) -> Result<f64> {
    if !matches!(cfg.domain, Domain::UnitDisk) {
        return Err(invalid("excised mass is implemented for the unit disk"));
    }
    let w = cfg.w.ok_or_else(|| invalid("missing target point"))?;
    if (cfg.z - w).norm() <= trunc.s + trunc.t {
        return Err(invalid("excised neighbourhoods overlap"));
    }
    if trunc.r > 1.0 {
        return Err(invalid("outer truncation cuts into the disk"));
    }
    let piece = |centre: C64, radius: f64| {
        let phi = centre.arg();
        quad::integrate(
            |rho| {
                let half = (0.5 * rho).min(1.0).acos();
                let mid = phi + std::f64::consts::PI;
                rho * quad::integrate(
                    |th| green_config(cfg, centre + C64::from_polar(rho, th), p).unwrap_or(0.0),
                    mid - half,
                    mid + half,
                    tol,
                )
            },
            0.0,
            radius,
            tol,
        )
    };
    Ok(piece(cfg.z, trunc.s) + piece(w, trunc.t))
}
