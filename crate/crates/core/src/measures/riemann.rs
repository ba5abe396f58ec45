//! Tagged rectangular partitions and measure-valued Riemann sums.

use super::PathEnsemble;
use crate::conformal::{c, C64};
use crate::error::{invalid, Result};
use crate::rng::PathRng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self> {
        if !(x1 > x0 && y1 > y0) || ![x0, y0, x1, y1].iter().all(|v| v.is_finite()) {
            return Err(invalid(format!("degenerate rectangle [{x0}, {x1}] x [{y0}, {y1}]")));
        }
        Ok(Rect { x0, y0, x1, y1 })
    }

    /// Axis-parallel square with the given centre and side.
    pub fn square(centre: C64, side: f64) -> Result<Self> {
        let h = 0.5 * side;
        Rect::new(centre.re - h, centre.im - h, centre.re + h, centre.im + h)
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn diagonal(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn centre(&self) -> C64 {
        c(0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))
    }

    /// Half-open membership `[x0, x1) × [y0, y1)`.
    pub fn contains(&self, p: C64) -> bool {
        p.re >= self.x0 && p.re < self.x1 && p.im >= self.y0 && p.im < self.y1
    }

    /// Split into `k × k` congruent subrectangles, row by row.
    pub fn subdivide(&self, k: usize) -> Vec<Rect> {
        let (w, h) = (self.width() / k as f64, self.height() / k as f64);
        let mut out = Vec::with_capacity(k * k);
        for iy in 0..k {
            for ix in 0..k {
                let x0 = self.x0 + w * ix as f64;
                let y0 = self.y0 + h * iy as f64;
                out.push(Rect { x0, y0, x1: x0 + w, y1: y0 + h });
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SampleRule {
    Center,
    /// Lower-left corner.
    Corner,
    /// Uniform point in each cell, seeded.
    Random(u64),
}

/// Excision radii: keep `B(0, 1/r) ∖ B̄(z, s) ∖ B̄(w, t)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Truncation {
    pub r: f64,
    pub s: f64,
    pub t: f64,
}

impl Truncation {
    pub fn new(r: f64, s: f64, t: f64) -> Result<Self> {
        if !(r > 0.0 && s > 0.0 && t > 0.0) {
            return Err(invalid("truncation radii must be positive"));
        }
        Ok(Truncation { r, s, t })
    }

    pub fn keeps(&self, p: C64, z: C64, w: C64) -> bool {
        p.norm() < 1.0 / self.r && (p - z).norm() > self.s && (p - w).norm() > self.t
    }
}

/// One cell of a tagged partition.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cell {
    pub index: usize,
    pub rect: Rect,
    pub tag: C64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionSpec {
    pub rect: Rect,
    /// Upper bound on every cell diagonal.
    pub mesh: f64,
    pub rule: SampleRule,
    pub truncation: Truncation,
}

impl PartitionSpec {
    pub fn new(rect: Rect, mesh: f64, rule: SampleRule, truncation: Truncation) -> Result<Self> {
        if !(mesh > 0.0 && mesh.is_finite()) {
            return Err(invalid(format!("mesh must be positive, got {mesh}")));
        }
        Ok(PartitionSpec { rect, mesh, rule, truncation })
    }

    /// Grid dimensions: the coarsest uniform grid whose cells have
    /// diagonal at most `mesh`.
    pub fn dims(&self) -> (usize, usize) {
        let side = self.mesh / std::f64::consts::SQRT_2;
        let nx = (self.rect.width() / side * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        let ny = (self.rect.height() / side * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        (nx, ny)
    }

    /// Realized mesh `‖P‖`.
    pub fn actual_mesh(&self) -> f64 {
        let (nx, ny) = self.dims();
        (self.rect.width() / nx as f64).hypot(self.rect.height() / ny as f64)
    }

    pub fn cells(&self) -> Vec<Cell> {
        let (nx, ny) = self.dims();
        let (w, h) = (self.rect.width() / nx as f64, self.rect.height() / ny as f64);
        let mut out = Vec::with_capacity(nx * ny);
        for iy in 0..ny {
            for ix in 0..nx {
                let index = iy * nx + ix;
                let x0 = self.rect.x0 + w * ix as f64;
                let y0 = self.rect.y0 + h * iy as f64;
                let rect = Rect { x0, y0, x1: x0 + w, y1: y0 + h };
                let tag = match self.rule {
                    SampleRule::Center => rect.centre(),
                    SampleRule::Corner => c(x0, y0),
                    SampleRule::Random(seed) => {
                        let mut rng = PathRng::new(seed, index as u64);
                        c(x0 + w * rng.uniform(), y0 + h * rng.uniform())
                    }
                };
                out.push(Cell { index, rect, tag });
            }
        }
        out
    }

    /// Cells whose tag lies in the truncated domain.
    pub fn kept_cells(&self, inside: impl Fn(C64) -> bool, z: C64, w: C64) -> Vec<Cell> {
        self.cells().into_iter().filter(|q| inside(q.tag) && self.truncation.keeps(q.tag, z, w)).collect()
    }
}

/// `S_f(P) = Σ_I vol(I) f(x_I)`, with `None` marking tags outside the
/// truncated domain (where `f` is extended by 0).
pub fn riemann_sum(f: &[Option<PathEnsemble>], p: &PartitionSpec) -> Result<PathEnsemble> {
    if !(p.mesh > 0.0) {
        return Err(invalid("mesh must be positive"));
    }
    let cells = p.cells();
    if f.len() != cells.len() {
        return Err(invalid(format!("{} values for {} cells", f.len(), cells.len())));
    }
    PathEnsemble::mixture(cells.iter().zip(f).filter_map(|(q, v)| v.as_ref().map(|e| (q.rect.area(), e))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvespace::Curve;

    fn unit() -> PartitionSpec {
        PartitionSpec::new(
            Rect::new(0.0, 0.0, 1.0, 1.0).unwrap(),
            0.25,
            SampleRule::Center,
            Truncation::new(0.1, 0.01, 0.01).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn grid_respects_mesh() {
        let p = unit();
        assert!(p.actual_mesh() <= p.mesh + 1e-15);
        let cells = p.cells();
        let (nx, ny) = p.dims();
        assert_eq!(cells.len(), nx * ny);
        let area: f64 = cells.iter().map(|q| q.rect.area()).sum();
        assert!((area - 1.0).abs() < 1e-12);
        for q in &cells {
            assert!(q.rect.contains(q.tag));
        }
        let r = PartitionSpec { rule: SampleRule::Random(3), ..unit() };
        for q in r.cells() {
            assert!(q.rect.contains(q.tag));
        }
        assert!(PartitionSpec::new(p.rect, 0.0, SampleRule::Center, p.truncation).is_err());
    }

    #[test]
    fn constant_integrand_preserves_mass() {
        let p = unit();
        let mu = PathEnsemble::new(vec![(0.7, Curve::point(c(0.0, 0.0)))]).unwrap();
        let f: Vec<Option<PathEnsemble>> = p.cells().iter().map(|_| Some(mu.clone())).collect();
        let s = riemann_sum(&f, &p).unwrap();
        assert!((s.total_mass() - 0.7).abs() < 1e-12);
        assert!(riemann_sum(&f[1..], &p).is_err());
    }

    #[test]
    fn truncation_excises_disks() {
        let t = Truncation::new(1.0, 0.1, 0.2).unwrap();
        let (z, w) = (c(-1.0, 0.0), c(1.0, 0.0));
        assert!(t.keeps(c(0.0, 0.0), z, w));
        assert!(!t.keeps(c(-0.95, 0.0), z, w));
        assert!(!t.keeps(c(0.85, 0.0), z, w));
        assert!(Truncation::new(0.0, 0.1, 0.1).is_err());
    }
}
