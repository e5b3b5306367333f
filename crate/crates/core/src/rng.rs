//! Uniform variates drawn from a caller-owned [`RngCore`].

use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;
use rand_core::RngCore;

/// Uniform on `[0, 1)` with 53 random bits.
#[inline]
pub fn uniform<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform on `(0, 1]`, safe to pass to `ln` or negative powers.
#[inline]
pub fn uniform_open0<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    1.0 - uniform(rng)
}

#[inline]
pub fn uniform_range<R: RngCore + ?Sized>(rng: &mut R, a: f64, b: f64) -> f64 {
    a + (b - a) * uniform(rng)
}

/// Standard normal via Box–Muller (one of the pair is discarded).
pub fn normal<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    let u = uniform_open0(rng);
    let v = uniform(rng);
    (-2.0 * u.ln()).sqrt() * (2.0 * PI * v).cos()
}

/// Draw from the density `∝ e^{-t}` on `[lo, hi]`.
pub fn truncated_exp<R: RngCore + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    let u = uniform(rng);
    // t = lo - ln(1 - u (1 - e^{-(hi-lo)}))
    let span = -(-(hi - lo)).exp_m1();
    let t = lo - (-u * span).ln_1p();
    t.clamp(lo, hi)
}
