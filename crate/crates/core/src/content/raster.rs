//! Bitset pixel grid that accumulates unions of capsules (ε-neighbourhoods
//! of segments) and counts covered pixel centres.

use crate::conformal::C64;

pub(crate) struct Raster {
    x0: f64,
    y0: f64,
    pitch: f64,
    nx: usize,
    ny: usize,
    words: usize,
    bits: Vec<u64>,
    count: u64,
}

impl Raster {
    pub fn pixel_count(lo: C64, hi: C64, pitch: f64) -> f64 {
        ((hi.re - lo.re) / pitch).ceil().max(1.0) * ((hi.im - lo.im) / pitch).ceil().max(1.0)
    }

    pub fn new(lo: C64, hi: C64, pitch: f64) -> Self {
        let nx = ((hi.re - lo.re) / pitch).ceil().max(1.0) as usize;
        let ny = ((hi.im - lo.im) / pitch).ceil().max(1.0) as usize;
        let words = nx.div_ceil(64);
        Raster { x0: lo.re, y0: lo.im, pitch, nx, ny, words, bits: vec![0; words * ny], count: 0 }
    }

    /// Covered pixels so far.
    #[cfg(test)]
    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn area(&self) -> f64 {
        self.count as f64 * self.pitch * self.pitch
    }

    /// Mark every pixel whose centre lies within `r` of the segment `[a, b]`.
    pub fn fill_capsule(&mut self, a: C64, b: C64, r: f64) {
        let p = self.pitch;
        let ylo = a.im.min(b.im) - r;
        let yhi = a.im.max(b.im) + r;
        let j0 = ((ylo - self.y0) / p - 0.5).ceil().max(0.0) as usize;
        let j1 = ((yhi - self.y0) / p - 0.5).floor();
        if j1 < 0.0 {
            return;
        }
        let j1 = (j1 as usize).min(self.ny - 1);
        let d = b - a;
        let len = d.norm();
        let u = if len > 0.0 { d / len } else { C64::new(0.0, 0.0) };
        for j in j0..=j1 {
            let y = self.y0 + (j as f64 + 0.5) * p;
            let Some((xl, xr)) = capsule_row(a, b, u, len, r, y) else { continue };
            let i0 = ((xl - self.x0) / p - 0.5).ceil().max(0.0);
            let i1 = ((xr - self.x0) / p - 0.5).floor();
            if i1 < i0 || i1 < 0.0 {
                continue;
            }
            let i0 = i0 as usize;
            let i1 = (i1 as usize).min(self.nx - 1);
            if i0 > i1 {
                continue;
            }
            self.fill_row(j, i0, i1);
        }
    }

    fn fill_row(&mut self, j: usize, i0: usize, i1: usize) {
        let row = &mut self.bits[j * self.words..(j + 1) * self.words];
        let (w0, w1) = (i0 / 64, i1 / 64);
        for (w, word) in row.iter_mut().enumerate().take(w1 + 1).skip(w0) {
            let lo = if w == w0 { i0 % 64 } else { 0 };
            let hi = if w == w1 { i1 % 64 } else { 63 };
            let mask = if hi - lo == 63 { u64::MAX } else { ((1u64 << (hi - lo + 1)) - 1) << lo };
            self.count += (mask & !*word).count_ones() as u64;
            *word |= mask;
        }
    }
}

/// `x`-interval of the horizontal line at height `y` inside the capsule of
/// radius `r` around `[a, b]` (`u` the unit direction, `len` the length).
fn capsule_row(a: C64, b: C64, u: C64, len: f64, r: f64, y: f64) -> Option<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for q in [a, b] {
        let dy = y - q.im;
        if dy.abs() <= r {
            let h = (r * r - dy * dy).sqrt();
            lo = lo.min(q.re - h);
            hi = hi.max(q.re + h);
        }
    }
    if len > 0.0 {
        // 0 ≤ (p - a)·u ≤ len and |(p - a) × u| ≤ r, both linear in x
        let dy = y - a.im;
        let mut l = f64::NEG_INFINITY;
        let mut h = f64::INFINITY;
        let mut ok = true;
        for (coef, off, min, max) in [(u.re, dy * u.im, 0.0, len), (-u.im, dy * u.re, -r, r)] {
            if coef.abs() < 1e-300 {
                if off < min || off > max {
                    ok = false;
                }
            } else {
                let (s0, s1) = ((min - off) / coef, (max - off) / coef);
                l = l.max(a.re + s0.min(s1));
                h = h.min(a.re + s0.max(s1));
            }
        }
        if ok && l <= h {
            lo = lo.min(l);
            hi = hi.max(h);
        }
    }
    (lo <= hi).then_some((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal::c;
    use crate::curvespace::segment_distance;
    use crate::rng::PathRng;

    #[test]
    fn matches_brute_force_membership() {
        let mut rng = PathRng::new(5, 0);
        for _ in 0..40 {
            let lo = c(-1.0, -1.0);
            let hi = c(1.0, 1.0);
            let pitch = 0.0371;
            let mut ras = Raster::new(lo, hi, pitch);
            let segs: Vec<(C64, C64)> = (0..3)
                .map(|_| {
                    let a = c(rng.uniform() - 0.5, rng.uniform() - 0.5);
                    let b = if rng.uniform() < 0.2 { a } else { c(rng.uniform() - 0.5, rng.uniform() - 0.5) };
                    (a, b)
                })
                .collect();
            let r = 0.05 + 0.3 * rng.uniform();
            for &(a, b) in &segs {
                ras.fill_capsule(a, b, r);
            }
            let mut brute = 0u64;
            for j in 0..ras.ny {
                for i in 0..ras.nx {
                    let q = c(lo.re + (i as f64 + 0.5) * pitch, lo.im + (j as f64 + 0.5) * pitch);
                    if segs.iter().any(|&(a, b)| segment_distance(q, a, b) <= r * (1.0 + 1e-12)) {
                        brute += 1;
                    }
                }
            }
            // pixels within rounding distance of the capsule boundary may differ
            let diff = ras.count().abs_diff(brute);
            assert!(diff <= 2, "{} vs {brute}", ras.count());
        }
    }

    #[test]
    fn disk_area_converges() {
        let r = 0.3;
        let mut ras = Raster::new(c(-0.5, -0.5), c(0.5, 0.5), r / 64.0);
        ras.fill_capsule(c(0.0, 0.0), c(0.0, 0.0), r);
        let exact = std::f64::consts::PI * r * r;
        assert!((ras.area() - exact).abs() < 2e-3 * exact);
        // filling again adds nothing
        let before = ras.count();
        ras.fill_capsule(c(0.01, 0.0), c(0.0, 0.01), 0.1);
        assert_eq!(ras.count(), before);
    }
}
