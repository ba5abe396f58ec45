//! Double-exponential (tanh-sinh) quadrature, robust to integrable endpoint
//! singularities, plus the planar integrals built on it.

use crate::conformal::{c, C64};
use std::f64::consts::{FRAC_PI_2, PI};

const MAX_LEVEL: usize = 10;
const T_MAX: f64 = 3.5;

/// `∫_a^b f` to relative tolerance `tol` (best effort).
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    if b < a {
        return -integrate(f, b, a, tol);
    }
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    // node at t: offsets from the two ends, u = 1 - tanh(π/2 sinh t)
    let eval = |t: f64| -> f64 {
        let s = FRAC_PI_2 * t.sinh();
        let ch = s.cosh();
        let u = 1.0 / (s.exp() * ch);
        let w = FRAC_PI_2 * t.cosh() / (ch * ch);
        if u <= 0.0 || !w.is_finite() {
            return 0.0;
        }
        let d = half * u;
        let (xl, xr) = (a + d, b - d);
        let mut v = 0.0;
        if xr > mid && xr < b {
            v += f(xr);
        }
        if xl < mid && xl > a {
            v += f(xl);
        }
        w * v
    };
    let mut h = 1.0;
    let mut sum = FRAC_PI_2 * f(mid);
    let mut k = 1;
    while k as f64 * h <= T_MAX {
        sum += eval(k as f64 * h);
        k += 1;
    }
    let mut estimate = sum * h * half;
    for _ in 1..MAX_LEVEL {
        h *= 0.5;
        let mut k = 1;
        while k as f64 * h <= T_MAX {
            sum += eval(k as f64 * h);
            k += 2;
        }
        let next = sum * h * half;
        let done = (next - estimate).abs() <= tol * next.abs();
        estimate = next;
        if done {
            break;
        }
    }
    estimate
}

/// `∫∫_R f dA` over `[x0, x1] × [y0, y1]`.
pub fn integrate_rect(f: impl Fn(C64) -> f64, x0: f64, y0: f64, x1: f64, y1: f64, tol: f64) -> f64 {
    integrate(|y| integrate(|x| f(c(x, y)), x0, x1, tol), y0, y1, tol)
}

/// `∫∫ f dA` over `{centre + ρ e^{iθ} : r0 < ρ < r1, θ0 < θ < θ1}`.
pub fn integrate_polar(
    f: impl Fn(C64) -> f64,
    centre: C64,
    (r0, r1): (f64, f64),
    (th0, th1): (f64, f64),
    tol: f64,
) -> f64 {
    integrate(|r| r * integrate(|th| f(centre + C64::from_polar(r, th)), th0, th1, tol), r0, r1, tol)
}

/// `∫∫ f dA` over the disk `B(centre, radius)`.
pub fn integrate_disk(f: impl Fn(C64) -> f64, centre: C64, radius: f64, tol: f64) -> f64 {
    integrate_polar(f, centre, (0.0, radius), (0.0, 2.0 * PI), tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smooth_and_singular_integrands() {
        assert!((integrate(|x| x.exp(), 0.0, 1.0, 1e-12) - (1f64.exp() - 1.0)).abs() < 1e-12);
        // endpoint singularities
        assert!((integrate(|x| 1.0 / x.sqrt(), 0.0, 1.0, 1e-12) - 2.0).abs() < 1e-10);
        let v = integrate(|x| (x * (1.0 - x)).powf(-0.5), 0.0, 1.0, 1e-12);
        // nodes within one ulp of the right end round onto it, which costs
        // about sqrt(eps) for an inverse square root singularity there
        assert!((v - PI).abs() < 1e-7, "{v}");
        assert!((integrate(|x| (1.0 - x).ln(), 0.0, 1.0, 1e-12) + 1.0).abs() < 1e-10);
        assert_eq!(integrate(|x| x, 2.0, 2.0, 1e-12), 0.0);
        assert!((integrate(|x| x, 1.0, 0.0, 1e-12) + 0.5).abs() < 1e-14);
    }

    #[test]
    fn planar_integrals() {
        let area = integrate_disk(|_| 1.0, c(0.3, 0.1), 2.0, 1e-12);
        assert!((area - 4.0 * PI).abs() < 1e-10);
        let m = integrate_rect(|z| z.re * z.im, 0.0, 0.0, 1.0, 2.0, 1e-12);
        assert!((m - 1.0).abs() < 1e-12);
        // ∫ |z|^{-1} over the unit disk = 2π
        let s = integrate_disk(|z| 1.0 / z.norm(), c(0.0, 0.0), 1.0, 1e-12);
        assert!((s - 2.0 * PI).abs() < 1e-9);
    }
}
