//! Gaussian integers `Z[i]`.

use core::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GInt {
    pub re: i64,
    pub im: i64,
}

impl GInt {
    pub const ZERO: GInt = GInt { re: 0, im: 0 };
    pub const ONE: GInt = GInt { re: 1, im: 0 };
    pub const I: GInt = GInt { re: 0, im: 1 };

    pub const fn new(re: i64, im: i64) -> Self {
        GInt { re, im }
    }

    pub fn norm(self) -> i64 {
        self.re * self.re + self.im * self.im
    }

    pub fn conj(self) -> Self {
        GInt::new(self.re, -self.im)
    }

    pub fn is_zero(self) -> bool {
        self.re == 0 && self.im == 0
    }

    pub fn is_unit(self) -> bool {
        self.norm() == 1
    }

    pub fn to_c64(self) -> Complex64 {
        Complex64::new(self.re as f64, self.im as f64)
    }

    /// Nearest Gaussian integer to a complex number.
    pub fn round(z: Complex64) -> Self {
        GInt::new(z.re.round() as i64, z.im.round() as i64)
    }

    /// Euclidean division with remainder of norm at most `norm(b)/2`.
    pub fn div_rem(self, b: GInt) -> (GInt, GInt) {
        let n = b.norm();
        let p = self * b.conj();
        let q = GInt::new(div_round(p.re, n), div_round(p.im, n));
        (q, self - q * b)
    }

    /// A greatest common divisor (defined up to a unit).
    pub fn gcd(mut a: GInt, mut b: GInt) -> GInt {
        while !b.is_zero() {
            let (_, r) = a.div_rem(b);
            a = b;
            b = r;
        }
        a
    }

    /// `(g, x, y)` with `x a + y b = g`.
    pub fn ext_gcd(a: GInt, b: GInt) -> (GInt, GInt, GInt) {
        let (mut r0, mut r1) = (a, b);
        let (mut x0, mut x1) = (GInt::ONE, GInt::ZERO);
        let (mut y0, mut y1) = (GInt::ZERO, GInt::ONE);
        while !r1.is_zero() {
            let (q, r) = r0.div_rem(r1);
            (r0, r1) = (r1, r);
            (x0, x1) = (x1, x0 - q * x1);
            (y0, y1) = (y1, y0 - q * y1);
        }
        (r0, x0, y0)
    }

    /// Inverse of a unit.
    pub fn unit_inv(self) -> GInt {
        self.conj()
    }

    /// Multiply by the unit putting a nonzero value in the sector
    /// `Re > 0, Im ≥ 0`; returns `(canonical, unit)`.
    pub fn canonical_associate(self) -> (GInt, GInt) {
        let mut u = GInt::ONE;
        let mut z = self;
        for _ in 0..4 {
            if z.re > 0 && z.im >= 0 {
                return (z, u);
            }
            z = z * GInt::I;
            u = u * GInt::I;
        }
        (z, u)
    }
}

fn div_round(p: i64, n: i64) -> i64 {
    // round(p / n) for n > 0
    let q = p.div_euclid(n);
    let r = p.rem_euclid(n);
    if 2 * r >= n {
        q + 1
    } else {
        q
    }
}

impl Add for GInt {
    type Output = GInt;
    fn add(self, o: GInt) -> GInt {
        GInt::new(self.re + o.re, self.im + o.im)
    }
}

impl Sub for GInt {
    type Output = GInt;
    fn sub(self, o: GInt) -> GInt {
        GInt::new(self.re - o.re, self.im - o.im)
    }
}

impl Mul for GInt {
    type Output = GInt;
    fn mul(self, o: GInt) -> GInt {
        GInt::new(
            self.re * o.re - self.im * o.im,
            self.re * o.im + self.im * o.re,
        )
    }
}

impl Neg for GInt {
    type Output = GInt;
    fn neg(self) -> GInt {
        GInt::new(-self.re, -self.im)
    }
}

/// Integer gcd (nonnegative).
pub fn gcd_i64(mut a: i64, mut b: i64) -> i64 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `(g, x, y)` with `x a + y b = g`, `g ≥ 0`.
pub fn ext_gcd_i64(a: i64, b: i64) -> (i64, i64, i64) {
    let (mut r0, mut r1) = (a, b);
    let (mut x0, mut x1) = (1i64, 0i64);
    let (mut y0, mut y1) = (0i64, 1i64);
    while r1 != 0 {
        let q = r0.div_euclid(r1);
        (r0, r1) = (r1, r0 - q * r1);
        (x0, x1) = (x1, x0 - q * x1);
        (y0, y1) = (y1, y0 - q * y1);
    }
    if r0 < 0 {
        (-r0, -x0, -y0)
    } else {
        (r0, x0, y0)
    }
}

/// Euler's totient on `Z[i]`: `|(Z[i]/c)^×|`, by factoring `N(c)`.
pub fn gaussian_totient(c: GInt) -> u64 {
    let n = c.norm();
    debug_assert!(n > 0);
    let mut phi = n as f64;
    let mut m = n;
    let mut p = 2i64;
    while p * p <= m {
        if m % p == 0 {
            while m % p == 0 {
                m /= p;
            }
            phi = apply_prime(phi, c, p);
        }
        p += 1;
    }
    if m > 1 {
        phi = apply_prime(phi, c, m);
    }
    phi.round() as u64
}

fn apply_prime(phi: f64, c: GInt, p: i64) -> f64 {
    let pf = p as f64;
    if p == 2 {
        phi * 0.5
    } else if p % 4 == 3 {
        phi * (1.0 - 1.0 / (pf * pf))
    } else {
        let pi = split_prime(p);
        let mut out = phi;
        for q in [pi, pi.conj()] {
            let (_, r) = c.div_rem(q);
            if r.is_zero() {
                out *= 1.0 - 1.0 / pf;
            }
        }
        out
    }
}

/// A Gaussian prime above `p ≡ 1 (mod 4)`.
fn split_prime(p: i64) -> GInt {
    let mut a = 1i64;
    while a * a < p {
        let b2 = p - a * a;
        let b = (b2 as f64).sqrt().round() as i64;
        if b * b == b2 {
            return GInt::new(a, b);
        }
        a += 1;
    }
    unreachable!("p is not a sum of two squares")
}
