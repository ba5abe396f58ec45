//! Randomized checks of the curve-space and measure-space inequalities.

use crate::conformal::{c, C64};
use crate::curvespace::{concat, dist_dc, dist_dd_upper, oscillation, Curve, CurveMetricKind};
use crate::error::Result;
use crate::measures::{dist_ds, prokhorov, PartitionSpec, PathEnsemble, Rect, SampleRule, Truncation};
use crate::rng::{derive_seed, PathRng};
use serde::Serialize;

/// Failures and worst margin (bound minus value, negative on failure) of
/// one property over its trials.
#[derive(Clone, Debug, Serialize)]
pub struct PropertyRow {
    pub name: String,
    pub trials: usize,
    pub failures: usize,
    pub worst_margin: f64,
}

/// Random polyline with `2..=max_n` vertices, positive duration and a
/// random-walk trace starting at `start`.
pub fn random_curve(rng: &mut PathRng, max_n: usize, start: C64) -> Curve {
    let n = 2 + (rng.uniform() * (max_n - 1) as f64) as usize;
    let mut t = 0.0;
    let mut p = start;
    let mut times = Vec::with_capacity(n);
    let mut points = Vec::with_capacity(n);
    for k in 0..n {
        if k > 0 {
            t += 0.05 + rng.uniform();
            p += c(rng.normal(), rng.normal()) * 0.5;
        }
        times.push(t);
        points.push(p);
    }
    Curve::new(times, points).expect("valid by construction")
}

fn random_ensemble(rng: &mut PathRng, max_atoms: usize) -> PathEnsemble {
    let k = 1 + (rng.uniform() * max_atoms as f64) as usize;
    let atoms = (0..k).map(|_| (0.1 + rng.uniform(), random_curve(rng, 5, c(0.0, 0.0)))).collect();
    PathEnsemble::new(atoms).expect("positive weights")
}

/// Small random perturbation of every atom: weights scaled by `e^{±s}`,
/// points moved by up to `s`.
fn perturb(rng: &mut PathRng, e: &PathEnsemble, s: f64) -> PathEnsemble {
    let atoms = e
        .iter()
        .map(|(w, cv)| {
            let jitter: Vec<C64> = cv.points().iter().map(|p| p + c(rng.uniform() - 0.5, rng.uniform() - 0.5) * s).collect();
            (w * (s * (2.0 * rng.uniform() - 1.0)).exp(), Curve::new(cv.times().to_vec(), jitter).unwrap())
        })
        .collect();
    PathEnsemble::new(atoms).unwrap()
}

/// `c` sampled at the normalized times `us` (sorted, in `[0, 1]`).
fn refine(cv: &Curve, us: &[f64]) -> Curve {
    let t = cv.duration();
    Curve::new(us.iter().map(|u| u * t).collect(), us.iter().map(|u| cv.eval(u * t)).collect()).unwrap()
}

fn common_grid(a: &Curve, b: &Curve) -> Vec<f64> {
    let mut us: Vec<f64> = a
        .times()
        .iter()
        .map(|t| t / a.duration())
        .chain(b.times().iter().map(|t| t / b.duration()))
        .collect();
    us.sort_by(f64::total_cmp);
    us.dedup();
    us
}

struct Tally {
    row: PropertyRow,
}

impl Tally {
    fn new(name: &str) -> Self {
        Tally { row: PropertyRow { name: name.into(), trials: 0, failures: 0, worst_margin: f64::INFINITY } }
    }

    /// Record `value ≤ bound + slack`.
    fn check(&mut self, value: f64, bound: f64, slack: f64) {
        let margin = bound - value;
        self.row.trials += 1;
        self.row.worst_margin = self.row.worst_margin.min(margin);
        if !(margin >= -slack) {
            self.row.failures += 1;
        }
    }
}

/// `d_D ≤ d_C ≤ d_D + osc_b(2 d_D)`, with both curves refined to a common
/// normalized grid so the vertex alignment includes the linear one.
pub fn check_sandwich(trials: usize, seed: u64, slack: f64) -> Result<PropertyRow> {
    let mut t = Tally::new("sandwich");
    for k in 0..trials as u64 {
        let mut rng = PathRng::new(seed, k);
        let a = random_curve(&mut rng, 7, c(0.0, 0.0));
        let start = c(0.3 * rng.normal(), 0.3 * rng.normal());
        let b = random_curve(&mut rng, 7, start);
        let us = common_grid(&a, &b);
        let (a, b) = (refine(&a, &us), refine(&b, &us));
        let dd = dist_dd_upper(&a, &b);
        let dc = dist_dc(&a, &b);
        let osc = if dd > 0.0 { oscillation(&b, 2.0 * dd)? } else { 0.0 };
        // both sides at once: the smaller of the two margins is recorded
        t.check(0.0, (dc - dd).min(dd + osc - dc), slack);
    }
    Ok(t.row)
}

/// `d_D(a₁ ⊕ b₁, a₀ ⊕ b₀) ≤ d_D(a₁, a₀) + d_D(b₁, b₀)`.
pub fn check_concat_subadditivity(trials: usize, seed: u64, slack: f64) -> Result<PropertyRow> {
    let mut t = Tally::new("concat-subadditivity");
    for k in 0..trials as u64 {
        let mut rng = PathRng::new(seed, k);
        let a1 = random_curve(&mut rng, 6, c(0.0, 0.0));
        let a0 = random_curve(&mut rng, 6, c(0.2, 0.0));
        let b1 = random_curve(&mut rng, 6, a1.end());
        let b0 = random_curve(&mut rng, 6, a0.end());
        let lhs = dist_dd_upper(&concat(&a1, &b1)?, &concat(&a0, &b0)?);
        t.check(lhs, dist_dd_upper(&a1, &a0) + dist_dd_upper(&b1, &b0), slack);
    }
    Ok(t.row)
}

/// `d(μ + μ', ν + ν') ≤ d(μ, ν) + d(μ', ν')`.
pub fn check_prokhorov_additivity(trials: usize, seed: u64, slack: f64) -> Result<PropertyRow> {
    let mut t = Tally::new("prokhorov-additivity");
    for k in 0..trials as u64 {
        let mut rng = PathRng::new(seed, k);
        let kind = if k % 2 == 0 { CurveMetricKind::LinearReparam } else { CurveMetricKind::Reparam };
        let (m0, n0, m1, n1) =
            (random_ensemble(&mut rng, 3), random_ensemble(&mut rng, 3), random_ensemble(&mut rng, 3), random_ensemble(&mut rng, 3));
        let lhs = prokhorov(&m0.sum(&m1), &n0.sum(&n1), kind);
        t.check(lhs, prokhorov(&m0, &n0, kind) + prokhorov(&m1, &n1, kind), slack);
    }
    Ok(t.row)
}

/// `d(μ, aμ) = (a - 1)|μ|` for `a > 1`, checked as two inequalities.
pub fn check_scaling_identity(trials: usize, seed: u64, slack: f64) -> Result<PropertyRow> {
    let mut t = Tally::new("scaling-identity");
    for k in 0..trials as u64 {
        let mut rng = PathRng::new(seed, k);
        let mu = random_ensemble(&mut rng, 4);
        let a = 1.0 + 3.0 * rng.uniform();
        let d = prokhorov(&mu, &mu.scale(a)?, CurveMetricKind::LinearReparam);
        let want = (a - 1.0) * mu.total_mass();
        t.check((d - want).abs(), 0.0, slack * want.max(1.0));
    }
    Ok(t.row)
}

/// `d_S(μ_i, ν_i) ≤ ε ≤ 1` for all `i` implies `d_S(Σμ_i, Σν_i) ≤ 18ε`.
pub fn check_ds_family(trials: usize, seed: u64, slack: f64) -> Result<PropertyRow> {
    let mut t = Tally::new("ds-18-epsilon");
    for k in 0..trials as u64 {
        let mut rng = PathRng::new(seed, k);
        let n = 1 + (rng.uniform() * 4.0) as usize;
        let s = 0.3 * rng.uniform();
        let mus: Vec<PathEnsemble> = (0..n).map(|_| random_ensemble(&mut rng, 3)).collect();
        let nus: Vec<PathEnsemble> = mus.iter().map(|m| perturb(&mut rng, m, s)).collect();
        let mut eps: f64 = 0.0;
        for (m, v) in mus.iter().zip(&nus) {
            eps = eps.max(dist_ds(m, v)?);
        }
        if eps > 1.0 {
            // outside the hypothesis; counts as a vacuous trial
            t.check(0.0, 0.0, slack);
            continue;
        }
        let sum = |es: &[PathEnsemble]| es.iter().fold(PathEnsemble::empty(), |acc, e| acc.sum(e));
        t.check(dist_ds(&sum(&mus), &sum(&nus))?, 18.0 * eps, slack);
    }
    Ok(t.row)
}

/// Refining a tagged partition of the unit square moves the Riemann sum of
/// `f` by at most the largest `d_C`-Prokhorov distance between `f` at a fine
/// tag and at the coarse tag of its parent cell (itself at most
/// `osc_f(‖P‖)`). Here `f(x)` is a point mass of weight `1 + x_2` at a
/// segment from `x` whose direction and duration vary with `x`.
pub fn check_riemann_refinement(trials: usize, seed: u64, slack: f64) -> Result<PropertyRow> {
    let mut t = Tally::new("riemann-refinement");
    let unit = Rect::new(0.0, 0.0, 1.0, 1.0)?;
    let trunc = Truncation::new(1e-3, 1e-9, 1e-9)?;
    for k in 0..trials as u64 {
        let mut rng = PathRng::new(seed, k);
        let (th0, th1, len, dur) = (rng.uniform() * 6.0, rng.uniform() * 4.0, 0.2 + rng.uniform(), rng.uniform());
        let f = |x: C64| {
            let dir = C64::from_polar(len, th0 + th1 * x.re);
            let curve = Curve::uniform(vec![x, x + dir], 1.0 + dur * x.im).unwrap();
            PathEnsemble::new(vec![(1.0 + x.im, curve)]).unwrap()
        };
        let coarse_n = 1 + (rng.uniform() * 4.0) as usize;
        let factor = 2 + (rng.uniform() * 2.0) as usize;
        let rule = |tag: u64| if rng_flag(seed, k, tag) { SampleRule::Random(derive_seed(seed, k * 7 + tag)) } else { SampleRule::Center };
        let side = 1.0 / coarse_n as f64;
        let p = PartitionSpec::new(unit, side * std::f64::consts::SQRT_2 * (1.0 + 1e-9), rule(1), trunc)?;
        let q = PartitionSpec::new(unit, side / factor as f64 * std::f64::consts::SQRT_2 * (1.0 + 1e-9), rule(2), trunc)?;
        let (pc, qc) = (p.cells(), q.cells());
        let sum = |cells: &[crate::measures::Cell]| {
            PathEnsemble::mixture(cells.iter().map(|q| (q.rect.area(), f(q.tag))).collect::<Vec<_>>().iter().map(|(a, e)| (*a, e)))
        };
        let (sp, sq) = (sum(&pc)?, sum(&qc)?);
        let mut bound: f64 = 0.0;
        for fine in &qc {
            let centre = fine.rect.centre();
            let parent = pc.iter().find(|c| c.rect.contains(centre)).expect("nested grids");
            bound = bound.max(prokhorov(&f(fine.tag), &f(parent.tag), CurveMetricKind::LinearReparam));
        }
        t.check(prokhorov(&sq, &sp, CurveMetricKind::LinearReparam), bound, slack);
    }
    Ok(t.row)
}

fn rng_flag(seed: u64, k: u64, tag: u64) -> bool {
    derive_seed(seed ^ 0x5eed, k * 31 + tag) & 1 == 1
}

/// All six properties with `trials` trials each.
pub fn metric_suite(trials: usize, seed: u64, slack: f64) -> Result<Vec<PropertyRow>> {
    Ok(vec![
        check_sandwich(trials, derive_seed(seed, 1), slack)?,
        check_concat_subadditivity(trials, derive_seed(seed, 2), slack)?,
        check_prokhorov_additivity(trials, derive_seed(seed, 3), slack)?,
        check_scaling_identity(trials, derive_seed(seed, 4), slack)?,
        check_ds_family(trials, derive_seed(seed, 5), slack)?,
        check_riemann_refinement(trials, derive_seed(seed, 6), slack)?,
    ])
}
