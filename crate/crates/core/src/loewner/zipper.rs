//! Hierarchical evaluation of long compositions of vertical-slit maps.
//!
//! Step `k` contributes the inverse slit map
//! `f_k(w) = u_k + sqrt((w - u_k)^2 - c_k)` (branch in the closed upper
//! half-plane). Steps are grouped into an implicit `BRANCH`-ary tree. Once a
//! node is complete, the composition `F = f_lo ∘ … ∘ f_hi` of its steps is
//! summarized by a truncated Laurent series about the centre of the real
//! interval `J` onto which `F^{-1}` sends the node's hull. By Schwarz
//! reflection `F` is analytic off `J`, so the series is used whenever the
//! argument is at least `FAR_RATIO` radii from the centre; otherwise the
//! node's children are applied one by one.

use crate::conformal::{c, csqrt_upper, C64};
use std::f64::consts::PI;

const BRANCH: usize = 4;
const TERMS: usize = 16;
const SAMPLES: usize = 32;
const FAR_RATIO: f64 = 3.0;
const SAMPLE_RATIO: f64 = 2.0;

#[derive(Clone, Copy, Debug)]
pub struct SlitStep {
    /// Driver value during the step.
    pub u: f64,
    /// Capacity increment times two: `2 a Δt`.
    pub c: f64,
}

impl SlitStep {
    /// Inverse map `f_k`.
    #[inline]
    pub fn inverse(&self, w: C64) -> C64 {
        let d = w - self.u;
        c(self.u, 0.0) + csqrt_upper(d * d - self.c, d.re)
    }

    /// Forward map `h_k(z) = u + sqrt((z - u)^2 + c)` and its derivative.
    #[inline]
    pub fn forward(&self, z: C64, fraction: f64) -> (C64, C64) {
        let d = z - self.u;
        let s = csqrt_upper(d * d + self.c * fraction, d.re);
        (c(self.u, 0.0) + s, d / s)
    }

    /// Forward image of a real point (monotone on each side of `u`).
    #[inline]
    fn forward_real(&self, x: f64, right: bool) -> f64 {
        let r = ((x - self.u).powi(2) + self.c).sqrt();
        if right {
            self.u + r
        } else {
            self.u - r
        }
    }
}

#[derive(Clone, Debug)]
struct Node {
    centre: f64,
    radius: f64,
    sample_radius: f64,
    /// Coefficients of `(ρ / (w - x))^m`, `m = 1..=TERMS`.
    coeffs: [C64; TERMS],
}

impl Node {
    /// Series value; `ratio2 = |w - x|^2 / radius^2`. Terms beyond the point
    /// where `radius (radius / |w - x|)^m` falls below roundoff are dropped.
    #[inline]
    fn eval(&self, w: C64, ratio2: f64) -> C64 {
        let s = self.sample_radius / (w - self.centre);
        let terms = if ratio2 >= 1e6 {
            4
        } else if ratio2 >= 1e4 {
            6
        } else if ratio2 >= 400.0 {
            9
        } else if ratio2 >= 100.0 {
            12
        } else {
            TERMS
        };
        let mut acc = C64::new(0.0, 0.0);
        for b in self.coeffs[..terms].iter().rev() {
            acc = (acc + b) * s;
        }
        w + acc
    }
}

/// The composed inverse map of a growing sequence of slit steps.
#[derive(Clone, Debug, Default)]
pub struct Zipper {
    steps: Vec<SlitStep>,
    /// `levels[l - 1][j]` covers steps `[j B^l, (j + 1) B^l)`.
    levels: Vec<Vec<Node>>,
    /// Hull interval of all steps so far, in the current image plane.
    interval: Option<(f64, f64)>,
}

impl Zipper {
    pub fn new() -> Self {
        Zipper::default()
    }

    pub fn steps(&self) -> &[SlitStep] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Real interval `[α, β]` that the current forward map sends the hull to.
    pub fn interval(&self) -> Option<(f64, f64)> {
        self.interval
    }

    pub fn push(&mut self, step: SlitStep) {
        self.interval = Some(extend_interval(self.interval, &step));
        self.steps.push(step);
        let mut n = self.steps.len();
        let mut level = 1;
        while n.is_multiple_of(BRANCH) {
            n /= BRANCH;
            let j = n - 1;
            let span = BRANCH.pow(level as u32);
            let node = self.build_node(level, j, span);
            if self.levels.len() < level {
                self.levels.push(Vec::new());
            }
            debug_assert_eq!(self.levels[level - 1].len(), j);
            self.levels[level - 1].push(node);
            level += 1;
        }
    }

    fn build_node(&self, level: usize, j: usize, span: usize) -> Node {
        let mut iv = None;
        for s in &self.steps[j * span..(j + 1) * span] {
            iv = Some(extend_interval(iv, s));
        }
        let (lo, hi) = iv.unwrap();
        let centre = 0.5 * (lo + hi);
        let radius = 0.5 * (hi - lo);
        let rho = SAMPLE_RATIO * radius;
        let mut coeffs = [C64::new(0.0, 0.0); TERMS];
        for p in 0..SAMPLES / 2 {
            let theta = 2.0 * PI * (p as f64 + 0.5) / SAMPLES as f64;
            let e = C64::from_polar(1.0, theta);
            let w = centre + e * rho;
            let mut f = w;
            for child in (j * BRANCH..(j + 1) * BRANCH).rev() {
                f = self.eval_node(level - 1, child, f);
            }
            let g = f - w;
            // the conjugate sample at angle -θ contributes conj(g) e^{-imθ}
            let mut em = e;
            for b in coeffs.iter_mut() {
                let t = g * em;
                *b += c(2.0 * t.re, 0.0);
                em *= e;
            }
        }
        for b in coeffs.iter_mut() {
            *b /= SAMPLES as f64;
        }
        Node { centre, radius, sample_radius: rho, coeffs }
    }

    fn eval_node(&self, level: usize, j: usize, w: C64) -> C64 {
        if level == 0 {
            return self.steps[j].inverse(w);
        }
        let node = &self.levels[level - 1][j];
        let ratio2 = (w - node.centre).norm_sqr() / (node.radius * node.radius);
        if ratio2 >= FAR_RATIO * FAR_RATIO {
            return node.eval(w, ratio2);
        }
        let mut f = w;
        for child in (j * BRANCH..(j + 1) * BRANCH).rev() {
            f = self.eval_node(level - 1, child, f);
        }
        f
    }

    /// Apply `f_0 ∘ f_1 ∘ … ∘ f_{n-1}` to `w`.
    pub fn eval_prefix(&self, n: usize, w: C64) -> C64 {
        debug_assert!(n <= self.steps.len());
        let mut f = w;
        let mut level = 0;
        let mut span = 1usize;
        while span <= n {
            let end = n / span;
            let count = end % BRANCH;
            for j in (end - count..end).rev() {
                f = self.eval_node(level, j, f);
            }
            level += 1;
            span *= BRANCH;
        }
        f
    }

    /// Same composition evaluated map by map (reference implementation).
    pub fn eval_prefix_direct(&self, n: usize, w: C64) -> C64 {
        self.steps[..n].iter().rev().fold(w, |f, s| s.inverse(f))
    }

    /// Trace point produced by step `k`: the image of the tip of its slit.
    pub fn tip(&self, k: usize) -> C64 {
        let s = &self.steps[k];
        self.eval_prefix(k, c(s.u, s.c.sqrt()))
    }

    /// Forward map over steps `from..to` plus `fraction` of step `to`,
    /// returning `(g(z), |g'(z)|, first step at which z was swallowed)`.
    pub fn forward_range(&self, from: usize, to: usize, fraction: f64, z: C64) -> (C64, f64, Option<usize>) {
        let mut g = z;
        let mut deriv = 1.0;
        let end = if fraction > 0.0 { to + 1 } else { to };
        for k in from..end {
            let frac = if k == to { fraction } else { 1.0 };
            let (next, d) = self.steps[k].forward(g, frac);
            g = next;
            deriv *= d.norm();
            if g.im < super::SWALLOW_THRESHOLD {
                return (g, deriv, Some(k));
            }
        }
        (g, deriv, None)
    }
}

fn extend_interval(iv: Option<(f64, f64)>, s: &SlitStep) -> (f64, f64) {
    match iv {
        None => (s.u - s.c.sqrt(), s.u + s.c.sqrt()),
        Some((lo, hi)) => (s.forward_real(lo.min(s.u), false), s.forward_real(hi.max(s.u), true)),
    }
}
