//! Smooth cut-offs `v_λ` supported on `[-(1+ε) log λ, 0]` (real factor) or
//! `[-(3+ε) log λ, 0]` (complex factor), and their shifted Fourier transform
//! `v̂(r - iσ) = (2π)^{-1/2} ∫ v(t) e^{-σt} e^{-irt} dt`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::group::FactorKind;
use crate::quad::Rule;
use crate::{Error, Result};

/// `h(x) = exp(-1/x)` for `x > 0`, else 0.
#[inline]
fn h(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-1.0 / x).exp()
    }
}

/// Smooth step: 0 for `x ≤ 0`, 1 for `x ≥ 1`.
#[inline]
pub fn smooth_step(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        let a = h(x);
        a / (a + h(1.0 - x))
    }
}

/// The standard bump `exp(1 - 1/(1 - x²))` on `(-1, 1)`, with peak 1.
#[inline]
pub fn std_bump(x: f64) -> f64 {
    let y = 1.0 - x * x;
    if y <= 0.0 {
        0.0
    } else {
        (1.0 - 1.0 / y).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BumpV {
    pub lambda: f64,
    pub eps: f64,
    pub case: FactorKind,
    /// Left end of the support.
    pub a: f64,
    /// Right end of the support.
    pub b: f64,
    /// Ramp width: 1, or half the support when it is shorter than 2.
    pub ramp: f64,
    /// Set when the support is too short for two unit ramps and a single
    /// centred bump is used instead.
    pub degenerate: bool,
}

impl BumpV {
    /// Build `v_λ`; short supports fall back to a single centred bump.
    pub fn new(lambda: f64, eps: f64, case: FactorKind) -> Result<Self> {
        if !(lambda >= 1.0) || !lambda.is_finite() {
            return Err(Error::InvalidInput("lambda must be at least 1"));
        }
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::InvalidInput("eps must lie in (0, 1)"));
        }
        let width = match case {
            FactorKind::Real => (1.0 + eps) * lambda.ln(),
            FactorKind::Complex => (3.0 + eps) * lambda.ln(),
        };
        if width <= 0.0 {
            return Err(Error::DegenerateSupport);
        }
        Ok(BumpV::on_interval(-width, 0.0, lambda, eps, case))
    }

    /// As [`BumpV::new`], but rejects supports shorter than 2.
    pub fn new_strict(lambda: f64, eps: f64, case: FactorKind) -> Result<Self> {
        let v = BumpV::new(lambda, eps, case)?;
        if v.degenerate {
            return Err(Error::DegenerateSupport);
        }
        Ok(v)
    }

    /// A bump of the same profile on an arbitrary interval `[a, b]`.
    pub fn on_interval(a: f64, b: f64, lambda: f64, eps: f64, case: FactorKind) -> Self {
        let len = b - a;
        let degenerate = len < 2.0;
        BumpV {
            lambda,
            eps,
            case,
            a,
            b,
            ramp: if degenerate { 0.5 * len } else { 1.0 },
            degenerate,
        }
    }

    pub fn support(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        if t <= self.a || t >= self.b {
            return 0.0;
        }
        smooth_step((t - self.a) / self.ramp) * smooth_step((self.b - t) / self.ramp)
    }

    /// Number of Gauss–Legendre panels that resolve the profile and an
    /// oscillation of frequency `r`.
    fn panels(&self, r: f64) -> usize {
        let len = self.b - self.a;
        let base = (8.0 * len / self.ramp).ceil() as usize;
        let osc = (len * r.abs() / 4.0).ceil() as usize;
        (base + osc).max(8)
    }

    /// `∫ v(t) e^{-st} dt` for complex `s`.
    pub fn laplace(&self, s: Complex64) -> Complex64 {
        let rule = Rule::new(20);
        let grid = rule.grid(self.a, self.b, self.panels(s.im));
        grid.iter()
            .map(|&(t, w)| (-s * t).exp() * (w * self.eval(t)))
            .sum()
    }

    /// `∫ v(t)^2 e^{-t} dt`.
    pub fn l2_weighted(&self) -> f64 {
        let rule = Rule::new(20);
        rule.integrate(self.a, self.b, self.panels(0.0), |t| {
            let v = self.eval(t);
            v * v * (-t).exp()
        })
    }

    /// `∫ v(t) e^{-t} dt`.
    pub fn l1_weighted(&self) -> f64 {
        self.laplace(Complex64::new(1.0, 0.0)).re
    }

    /// Table for fast evaluation of `v̂(r - iσ)` at many `r`.
    pub fn vhat_table(&self, sigma: f64, r_max: f64) -> VhatTable {
        let rule = Rule::new(20);
        let grid = rule.grid(self.a, self.b, self.panels(r_max));
        let norm = 1.0 / (2.0 * PI).sqrt();
        let (t, w): (Vec<f64>, Vec<f64>) = grid
            .iter()
            .filter_map(|&(t, w)| {
                let v = self.eval(t);
                (v != 0.0).then(|| (t, norm * w * v * (-sigma * t).exp()))
            })
            .unzip();
        VhatTable { t, w }
    }
}

/// Precomputed nodes for `v̂(r - iσ)`.
#[derive(Debug, Clone)]
pub struct VhatTable {
    t: Vec<f64>,
    w: Vec<f64>,
}

impl VhatTable {
    pub fn eval(&self, r: f64) -> Complex64 {
        let mut re = 0.0;
        let mut im = 0.0;
        for (&t, &w) in self.t.iter().zip(&self.w) {
            let (s, c) = (r * t).sin_cos();
            re += w * c;
            im -= w * s;
        }
        Complex64::new(re, im)
    }
}

/// `v̂(r - iσ)`, refining the panel count until two passes agree to 1e-10
/// relative.
pub fn vhat(v: &BumpV, r: f64, sigma: f64) -> Complex64 {
    let mut prev = v.vhat_table(sigma, r).eval(r);
    let mut rm = r.abs().max(1.0);
    for _ in 0..6 {
        rm *= 2.0;
        let cur = v.vhat_table(sigma, rm).eval(r);
        let scale = cur.norm().max(1e-300);
        if (cur - prev).norm() <= 1e-10 * scale + 1e-300 {
            return cur;
        }
        prev = cur;
    }
    prev
}

/// Truncation radius for `∫ |v̂(r - i/2)|² dr`: the smallest doubling `R`
/// for which `|v̂|²` over `[R/2, R]` stays below `tol · ∫ v² e^{-t}`
/// per unit length.
pub fn truncation_radius(v: &BumpV, tol: f64) -> f64 {
    let a = v.l2_weighted();
    let mut r = 8.0 / v.ramp;
    loop {
        let tab = v.vhat_table(0.5, 2.0 * r);
        let peak = (0..=32)
            .map(|i| {
                let x = r + r * i as f64 / 32.0;
                tab.eval(x).norm_sqr().max(tab.eval(-x).norm_sqr())
            })
            .fold(0.0, f64::max);
        if peak * r <= tol * a || r > 4096.0 {
            return 2.0 * r;
        }
        r *= 2.0;
    }
}
