//! Finite measures on curve space represented by weighted samples, the
//! Prokhorov and `d_S` metrics between them, and measure-valued Riemann sums.

mod flow;
pub mod io;
mod prokhorov;
mod riemann;

pub use prokhorov::{
    dist_ds, prokhorov, prokhorov_by, prokhorov_matrix, total_mass_bounds_check,
    weighted_average_identity_check,
};
pub use riemann::{riemann_sum, Cell, PartitionSpec, Rect, SampleRule, Truncation};

use crate::curvespace::Curve;
use crate::error::{invalid, Result};
use crate::rng::PathRng;
use std::collections::BTreeMap;

/// Default atom budget above which mixtures are resampled.
pub const RESAMPLE_CAP: usize = 100_000;

/// Atomic finite measure `Σ w_i δ_{γ_i}` with positive weights.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PathEnsemble {
    weights: Vec<f64>,
    curves: Vec<Curve>,
    total_mass: f64,
}

impl PathEnsemble {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn new(atoms: Vec<(f64, Curve)>) -> Result<Self> {
        let mut e = Self::empty();
        for (w, c) in atoms {
            e.push(w, c)?;
        }
        Ok(e)
    }

    /// Equal weights summing to `mass`.
    pub fn uniform(curves: Vec<Curve>, mass: f64) -> Result<Self> {
        if curves.is_empty() {
            return Ok(Self::empty());
        }
        let w = mass / curves.len() as f64;
        Self::new(curves.into_iter().map(|c| (w, c)).collect())
    }

    pub fn push(&mut self, weight: f64, curve: Curve) -> Result<()> {
        if !(weight > 0.0 && weight.is_finite()) {
            return Err(invalid(format!("atom weight must be positive and finite, got {weight}")));
        }
        self.weights.push(weight);
        self.curves.push(curve);
        self.total_mass += weight;
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `|μ|`.
    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn curves(&self) -> &[Curve] {
        &self.curves
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &Curve)> {
        self.weights.iter().copied().zip(self.curves.iter())
    }

    /// `μ^# = μ / |μ|`.
    pub fn normalized(&self) -> Result<Self> {
        if self.is_empty() {
            return Err(invalid("cannot normalize a zero measure"));
        }
        self.scale(1.0 / self.total_mass)
    }

    /// `factor · μ`; a zero factor gives the empty measure.
    pub fn scale(&self, factor: f64) -> Result<Self> {
        if factor == 0.0 {
            return Ok(Self::empty());
        }
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(invalid(format!("scale factor must be nonnegative and finite, got {factor}")));
        }
        Ok(PathEnsemble {
            weights: self.weights.iter().map(|w| w * factor).collect(),
            curves: self.curves.clone(),
            total_mass: self.total_mass * factor,
        })
    }

    /// `μ + ν` (atoms concatenated, not merged).
    pub fn sum(&self, other: &Self) -> Self {
        let mut e = self.clone();
        e.extend(other);
        e
    }

    pub fn extend(&mut self, other: &Self) {
        self.weights.extend_from_slice(&other.weights);
        self.curves.extend_from_slice(&other.curves);
        self.total_mass += other.total_mass;
    }

    /// `Σ c_k μ_k` for nonnegative coefficients.
    pub fn mixture<'a>(parts: impl IntoIterator<Item = (f64, &'a PathEnsemble)>) -> Result<Self> {
        let mut e = Self::empty();
        for (coef, part) in parts {
            e.extend(&part.scale(coef)?);
        }
        Ok(e)
    }

    /// Apply `f` to every curve, keeping weights.
    pub fn map_curves(&self, f: impl Fn(&Curve) -> Curve) -> Self {
        PathEnsemble {
            weights: self.weights.clone(),
            curves: self.curves.iter().map(f).collect(),
            total_mass: self.total_mass,
        }
    }

    /// Mass-preserving systematic resampling down to at most `cap` atoms.
    /// Atoms drawn more than once are merged. Ensembles already within the
    /// budget are returned unchanged.
    pub fn resample(&self, cap: usize, seed: u64) -> Result<Self> {
        if cap == 0 {
            return Err(invalid("resampling cap must be positive"));
        }
        if self.len() <= cap {
            return Ok(self.clone());
        }
        let step = self.total_mass / cap as f64;
        let mut pos = PathRng::new(seed, 0).uniform() * step;
        let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
        let mut acc = 0.0;
        let mut i = 0;
        for _ in 0..cap {
            while i + 1 < self.len() && acc + self.weights[i] <= pos {
                acc += self.weights[i];
                i += 1;
            }
            *counts.entry(i).or_default() += 1;
            pos += step;
        }
        let mut e = Self::empty();
        for (i, k) in counts {
            e.push(step * k as f64, self.curves[i].clone())?;
        }
        Ok(e)
    }

    /// Durations `t_γ` of all atoms.
    pub fn durations(&self) -> Vec<f64> {
        self.curves.iter().map(Curve::duration).collect()
    }

    /// `∫ F dμ`.
    pub fn integrate(&self, f: impl Fn(&Curve) -> f64) -> f64 {
        self.iter().map(|(w, c)| w * f(c)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal::c;

    fn seg(x: f64) -> Curve {
        Curve::uniform(vec![c(0.0, 0.0), c(x, 1.0)], 1.0).unwrap()
    }

    #[test]
    fn weights_must_be_positive() {
        assert!(PathEnsemble::new(vec![(0.0, seg(0.0))]).is_err());
        assert!(PathEnsemble::new(vec![(-1.0, seg(0.0))]).is_err());
        assert!(PathEnsemble::new(vec![(f64::NAN, seg(0.0))]).is_err());
    }

    #[test]
    fn mass_bookkeeping() {
        let e = PathEnsemble::new(vec![(1.0, seg(0.0)), (3.0, seg(1.0))]).unwrap();
        assert_eq!(e.total_mass(), 4.0);
        let n = e.normalized().unwrap();
        assert!((n.total_mass() - 1.0).abs() < 1e-15);
        assert_eq!(n.weights(), &[0.25, 0.75]);
        assert_eq!(e.scale(0.5).unwrap().total_mass(), 2.0);
        assert!(e.scale(0.0).unwrap().is_empty());
        assert_eq!(e.sum(&e).total_mass(), 8.0);
        let m = PathEnsemble::mixture([(0.5, &e), (2.0, &e)]).unwrap();
        assert_eq!(m.len(), 4);
        assert!((m.total_mass() - 10.0).abs() < 1e-12);
        assert!(PathEnsemble::empty().normalized().is_err());
    }

    #[test]
    fn systematic_resampling_preserves_mass_and_proportions() {
        // heavy atoms (label 1) carry 3/4 of the mass
        let mut rng = PathRng::new(1, 0);
        let mut labels: Vec<bool> = (0..2000).map(|k| k % 2 == 1).collect();
        for k in (1..labels.len()).rev() {
            labels.swap(k, (rng.uniform() * (k + 1) as f64) as usize);
        }
        let atoms = labels.iter().map(|&h| (if h { 3.0 } else { 1.0 }, seg(f64::from(u8::from(h))))).collect();
        let e = PathEnsemble::new(atoms).unwrap();
        let r = e.resample(400, 7).unwrap();
        assert!(r.len() <= 400);
        assert!((r.total_mass() - e.total_mass()).abs() < 1e-9);
        let heavy: f64 = r.iter().filter(|(_, c)| c.end().re == 1.0).map(|(w, _)| w).sum();
        assert!((heavy / r.total_mass() - 0.75).abs() < 0.05);
        assert_eq!(r, e.resample(400, 7).unwrap());
        assert_eq!(e.resample(5000, 1).unwrap(), e);
    }
}
