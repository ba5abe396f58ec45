//! Small complex-analysis helpers shared by the Loewner solver and the
//! Green's function code: branch-controlled square roots and Möbius maps.

use num_complex::Complex64;

pub type C64 = Complex64;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Principal square root without the polar round trip.
#[inline]
pub fn csqrt(z: C64) -> C64 {
    let (x, y) = (z.re, z.im);
    if x == 0.0 && y == 0.0 {
        return C64::new(0.0, 0.0);
    }
    let r = x.hypot(y);
    if x >= 0.0 {
        let t = (0.5 * (r + x)).sqrt();
        C64::new(t, y / (2.0 * t))
    } else {
        let t = (0.5 * (r - x)).sqrt();
        C64::new(y.abs() / (2.0 * t), t.copysign(y))
    }
}

/// Square root of `z` on the branch that keeps the closed upper half-plane.
///
/// `side` breaks the tie when the root is real: the returned real root has
/// the sign of `side`.
#[inline]
pub fn csqrt_upper(z: C64, side: f64) -> C64 {
    let s = csqrt(z);
    if s.im > 0.0 {
        s
    } else if s.im < 0.0 {
        -s
    } else if (s.re >= 0.0) == (side >= 0.0) {
        s
    } else {
        -s
    }
}

/// A Möbius transformation `(a z + b) / (c z + d)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mobius {
    pub a: C64,
    pub b: C64,
    pub c: C64,
    pub d: C64,
}

impl Mobius {
    pub fn new(a: C64, b: C64, c: C64, d: C64) -> Self {
        Mobius { a, b, c, d }
    }

    pub fn identity() -> Self {
        Mobius::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0))
    }

    #[inline]
    pub fn apply(&self, z: C64) -> C64 {
        (self.a * z + self.b) / (self.c * z + self.d)
    }

    /// Derivative `(ad - bc) / (cz + d)^2`.
    #[inline]
    pub fn deriv(&self, z: C64) -> C64 {
        let den = self.c * z + self.d;
        (self.a * self.d - self.b * self.c) / (den * den)
    }

    /// Image of infinity (`None` when it is infinity).
    pub fn at_infinity(&self) -> Option<C64> {
        if self.c.norm() == 0.0 {
            None
        } else {
            Some(self.a / self.c)
        }
    }

    pub fn inverse(&self) -> Mobius {
        Mobius::new(self.d, -self.b, -self.c, self.a)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Mobius) -> Mobius {
        Mobius::new(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )
    }

    /// Map from the unit disk onto the upper half-plane sending `z` to 0 and
    /// `w` to infinity (and the origin to `i` when `w = -z`).
    pub fn disk_to_halfplane(z: C64, w: C64) -> Mobius {
        // λ² = w/z makes the circle real; the sign puts f(0) = λ z/w in H
        let mu = (w / z).sqrt();
        let lambda = if mu.im < 0.0 { mu } else { -mu };
        Mobius::new(lambda, -lambda * z, c(1.0, 0.0), -w)
    }

    /// Self-map of the upper half-plane sending `x` to 0 and `y` to infinity.
    pub fn halfplane_to_standard(x: f64, y: f64) -> Mobius {
        if y > x {
            Mobius::new(c(1.0, 0.0), c(-x, 0.0), c(-1.0, 0.0), c(y, 0.0))
        } else {
            Mobius::new(c(1.0, 0.0), c(-x, 0.0), c(1.0, 0.0), c(-y, 0.0))
        }
    }

    /// True when the real coefficients describe a self-map of the upper
    /// half-plane (determinant positive).
    pub fn is_halfplane_automorphism(&self) -> bool {
        let real = [self.a, self.b, self.c, self.d]
            .iter()
            .all(|v| v.im.abs() <= 1e-14 * (1.0 + v.re.abs()));
        real && (self.a * self.d - self.b * self.c).re > 0.0
    }
}
