//! Factored test functions `f(a_{ηt} k) = v(t) ψ(k)` on `Q\G`, with `t` the
//! cusp height coordinate `t_n`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::bump::{std_bump, BumpV};
use crate::group::{wrap_angle, Compact, FactorKind};
use crate::lattice::Cone;
use crate::quad::Rule;
use crate::{Error, Result};

/// Compact-part factor `ψ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Psi {
    /// `ψ ≡ 1`.
    Constant,
    /// `ψ(k_θ) = b(λ θ)`, `θ` taken mod `π` in `(-π/2, π/2]`, `b` the
    /// standard bump on `[-1, 1]`.
    RealBump { lambda: f64 },
    /// `ψ(k_θ) = a0 + a1 cos 2θ`: weights 0 and ±1 only.
    RealTrig { a0: f64, a1: f64 },
    /// `ψ(k_{θ,α,β}) = b(4 λ sin θ - 3) · b(λ (α - β))`, supported on
    /// `½ ≤ λ sin θ ≤ 1`, `|α - β| ≤ 1/λ`.
    ComplexBump { lambda: f64 },
    /// `ψ = a0 + a1 cos 2θ`: weights 0 and 1 of `SU(2)`.
    ComplexZonal { a0: f64, a1: f64 },
}

/// Fold `θ` into `(-π/2, π/2]`.
#[inline]
pub fn fold_half_pi(theta: f64) -> f64 {
    let mut x = theta % PI;
    if x > 0.5 * PI {
        x -= PI;
    } else if x <= -0.5 * PI {
        x += PI;
    }
    x
}

/// Fold an angle into `(-π, π]`.
#[inline]
pub fn fold_pi(x: f64) -> f64 {
    let y = wrap_angle(x);
    if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}

impl Psi {
    pub fn kind(&self) -> Option<FactorKind> {
        match self {
            Psi::Constant => None,
            Psi::RealBump { .. } | Psi::RealTrig { .. } => Some(FactorKind::Real),
            Psi::ComplexBump { .. } | Psi::ComplexZonal { .. } => Some(FactorKind::Complex),
        }
    }

    pub fn eval(&self, k: &Compact) -> f64 {
        match (self, *k) {
            (Psi::Constant, _) => 1.0,
            (Psi::RealBump { lambda }, Compact::Real { theta }) => std_bump(lambda * fold_half_pi(theta)),
            (Psi::RealTrig { a0, a1 }, Compact::Real { theta }) => a0 + a1 * (2.0 * theta).cos(),
            (Psi::ComplexBump { lambda }, Compact::Complex { theta, alpha, beta }) => {
                let r = std_bump(4.0 * lambda * theta.sin() - 3.0);
                if r == 0.0 {
                    return 0.0;
                }
                r * std_bump(lambda * fold_pi(alpha - beta))
            }
            (Psi::ComplexZonal { a0, a1 }, Compact::Complex { theta, .. }) => a0 + a1 * (2.0 * theta).cos(),
            _ => 0.0,
        }
    }

    /// Region of `w = -c'/d'` (bottom row `(c', d')`) outside which `ψ`
    /// vanishes, padded by a relative margin.
    pub fn cone(&self) -> Option<Cone> {
        match *self {
            Psi::RealBump { lambda } if lambda > 2.0 / PI => {
                let w = (1.0 / lambda).tan() * (1.0 + 1e-9) + 1e-12;
                Some(Cone::Interval { lo: -w, hi: w })
            }
            Psi::ComplexBump { lambda } if lambda >= 1.0 => {
                let r1 = (0.5 / lambda).asin().tan();
                let r2 = (1.0 / lambda).asin().min(0.5 * PI - 1e-9).tan();
                let phi = 1.0 / lambda;
                let w0 = 0.5 * (r1 + r2);
                let mut rho: f64 = 0.0;
                for r in [r1, r2] {
                    let z = Complex64::from_polar(r, phi);
                    rho = rho.max((z - w0).norm());
                }
                Some(Cone::Disk {
                    center: Complex64::new(w0, 0.0),
                    radius: rho * (1.0 + 1e-9) + 1e-12,
                })
            }
            _ => None,
        }
    }

    pub fn is_positive(&self) -> bool {
        match *self {
            Psi::RealTrig { a0, a1 } | Psi::ComplexZonal { a0, a1 } => a0 >= a1.abs(),
            _ => true,
        }
    }
}

/// Fourier data of a real `ψ` on `M\K = [-π/2, π/2)` with `dθ/π`:
/// `ψ = Σ_m c_m e^{2imθ}`.
#[derive(Debug, Clone)]
pub struct RealModes {
    /// `c_0, c_1, …`; `ψ` is even so `c_{-m} = c_m`.
    pub c: Vec<f64>,
    /// `‖ψ‖² = Σ |c_m|²` computed directly.
    pub norm_sq: f64,
}

impl RealModes {
    /// Parseval tail `‖ψ‖² - Σ_{|m| ≤ M} |c_m|²`.
    pub fn tail(&self, m_max: usize) -> f64 {
        let head: f64 = self.c[0] * self.c[0]
            + 2.0 * self.c[1..=m_max.min(self.c.len() - 1)].iter().map(|x| x * x).sum::<f64>();
        (self.norm_sq - head).max(0.0)
    }

    /// `‖φ_m‖²` for `m ≥ 0`, folding `±m` together.
    pub fn weight_norms(&self) -> Vec<f64> {
        self.c
            .iter()
            .enumerate()
            .map(|(m, x)| if m == 0 { x * x } else { 2.0 * x * x })
            .collect()
    }
}

/// `f(a_{ηt} k) = scale · v(t) · ψ(k)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub v: BumpV,
    pub psi: Psi,
    pub scale: f64,
}

impl TestFunction {
    /// The real family `v_λ(t) ψ(λθ)`.
    pub fn real_family(lambda: f64, eps: f64) -> Result<Self> {
        Ok(TestFunction {
            v: BumpV::new(lambda, eps, FactorKind::Real)?,
            psi: Psi::RealBump { lambda },
            scale: 1.0,
        })
    }

    /// The complex family `v_λ(t) ψ(λ sin θ, λ(α - β))`.
    pub fn complex_family(lambda: f64, eps: f64) -> Result<Self> {
        Ok(TestFunction {
            v: BumpV::new(lambda, eps, FactorKind::Complex)?,
            psi: Psi::ComplexBump { lambda },
            scale: 1.0,
        })
    }

    /// A spherical function `v(t)` on an explicit interval.
    pub fn spherical(a: f64, b: f64, case: FactorKind) -> Result<Self> {
        if !(b > a) {
            return Err(Error::InsufficientSupport);
        }
        Ok(TestFunction {
            v: BumpV::on_interval(a, b, 1.0, 0.5, case),
            psi: Psi::Constant,
            scale: 1.0,
        })
    }

    pub fn with_psi(mut self, psi: Psi) -> Self {
        self.psi = psi;
        self
    }

    pub fn scaled(mut self, c: f64) -> Self {
        self.scale *= c;
        self
    }

    pub fn case(&self) -> FactorKind {
        self.v.case
    }

    /// Support `[T₋, T₊]` in `t_n`.
    pub fn support_t(&self) -> (f64, f64) {
        self.v.support()
    }

    #[inline]
    pub fn eval(&self, tn: f64, k: &Compact) -> f64 {
        let v = self.v.eval(tn);
        if v == 0.0 {
            return 0.0;
        }
        self.scale * v * self.psi.eval(k)
    }

    pub fn is_positive(&self) -> bool {
        self.scale >= 0.0 && self.psi.is_positive()
    }

    /// `∫ψ dk` and `∫ψ² dk` under the probability Haar measure.
    pub fn psi_moments(&self) -> (f64, f64) {
        match self.psi {
            Psi::Constant => (1.0, 1.0),
            Psi::RealTrig { a0, a1 } => (a0, a0 * a0 + 0.5 * a1 * a1),
            Psi::ComplexZonal { a0, a1 } => (a0, a0 * a0 + a1 * a1 / 3.0),
            Psi::RealBump { lambda } => {
                let rule = Rule::new(40);
                let w = (1.0 / lambda).min(0.5 * PI);
                let m1 = rule.integrate(-w, w, 4, |th| std_bump(lambda * th)) / PI;
                let m2 = rule.integrate(-w, w, 4, |th| std_bump(lambda * th).powi(2)) / PI;
                (m1, m2)
            }
            Psi::ComplexBump { lambda } => {
                // dk = sin 2θ dθ dα dβ / (4π²); ψ depends on α - β only.
                let rule = Rule::new(40);
                let th_lo = (0.5 / lambda).asin();
                let th_hi = (1.0 / lambda).min(1.0).asin();
                let (r1, r2) = (
                    rule.integrate(th_lo, th_hi, 4, |th| std_bump(4.0 * lambda * th.sin() - 3.0) * (2.0 * th).sin()),
                    rule.integrate(th_lo, th_hi, 4, |th| {
                        std_bump(4.0 * lambda * th.sin() - 3.0).powi(2) * (2.0 * th).sin()
                    }),
                );
                let wa = (1.0 / lambda).min(PI);
                let (a1, a2) = (
                    rule.integrate(-wa, wa, 4, |x| std_bump(lambda * x)),
                    rule.integrate(-wa, wa, 4, |x| std_bump(lambda * x).powi(2)),
                );
                // ∫∫ dα dβ g(α - β) = 2π ∫ g(u) du
                let norm = 2.0 * PI / (4.0 * PI * PI);
                (norm * r1 * a1, norm * r2 * a2)
            }
        }
    }

    /// `‖f‖₁ = ∫∫ |f(a_{ηt}k)| e^{-t} dt dk`.
    pub fn l1_norm(&self) -> f64 {
        self.scale.abs() * self.v.l1_weighted() * self.psi_moments().0.abs()
    }

    /// `∫_{Q\G} f = ∫∫ f(a_{ηt}k) e^{-t} dt dk` (signed).
    pub fn integral(&self) -> f64 {
        self.scale * self.v.l1_weighted() * self.psi_moments().0
    }

    /// `‖f‖₂² = ∫∫ |f|² e^{-t} dt dk`.
    pub fn l2_norm_sq(&self) -> f64 {
        self.scale * self.scale * self.v.l2_weighted() * self.psi_moments().1
    }

    /// Fourier coefficients of a real `ψ` up to `m_max`.
    pub fn real_modes(&self, m_max: usize) -> Result<RealModes> {
        match self.psi {
            Psi::Constant => Ok(RealModes {
                c: alloc::vec![1.0],
                norm_sq: 1.0,
            }),
            Psi::RealTrig { a0, a1 } => Ok(RealModes {
                c: alloc::vec![a0, 0.5 * a1],
                norm_sq: a0 * a0 + 0.5 * a1 * a1,
            }),
            Psi::RealBump { lambda } => {
                // c_m = (1/π) ∫ b(λθ) cos(2mθ) dθ
                let w = (1.0 / lambda).min(0.5 * PI);
                let osc = 2.0 * m_max as f64 * w;
                let panels = (8.0 + osc / 2.0).ceil() as usize;
                let grid = Rule::new(20).grid(-w, w, panels);
                let vals: Vec<(f64, f64)> = grid.iter().map(|&(th, wt)| (th, wt * std_bump(lambda * th) / PI)).collect();
                let mut c = Vec::with_capacity(m_max + 1);
                for m in 0..=m_max {
                    let f = 2.0 * m as f64;
                    c.push(vals.iter().map(|&(th, w)| w * (f * th).cos()).sum());
                }
                Ok(RealModes {
                    c,
                    norm_sq: self.psi_moments().1,
                })
            }
            Psi::ComplexBump { .. } | Psi::ComplexZonal { .. } => {
                Err(Error::InvalidInput("real modes of a complex test function"))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fold_ranges() {
        assert!((fold_half_pi(PI) - 0.0).abs() < 1e-15);
        assert!((fold_half_pi(0.75 * PI) + 0.25 * PI).abs() < 1e-15);
        assert!((fold_pi(1.5 * PI) + 0.5 * PI).abs() < 1e-15);
    }

    #[test]
    fn real_modes_parseval() {
        let f = TestFunction::real_family(4.0, 0.2).unwrap();
        let modes = f.real_modes(400).unwrap();
        assert!(modes.tail(400) < 1e-10 * modes.norm_sq, "{}", modes.tail(400));
        assert!((modes.c[0] - f.psi_moments().0).abs() < 1e-14);
    }

    #[test]
    fn complex_norms_scale() {
        // ‖f‖₁ ≍ λ^ε: the ratio across λ stays bounded.
        let a = TestFunction::complex_family(4.0, 0.2).unwrap().l1_norm();
        let b = TestFunction::complex_family(16.0, 0.2).unwrap().l1_norm();
        let ratio = b / a / 4f64.powf(0.2);
        assert!(ratio > 0.5 && ratio < 2.0, "{ratio}");
    }

    #[test]
    fn cone_contains_support() {
        let psi = Psi::ComplexBump { lambda: 5.0 };
        let Some(Cone::Disk { center, radius }) = psi.cone() else {
            panic!()
        };
        for i in 0..50 {
            for j in 0..50 {
                let th = (0.5 / 5.0f64).asin() + ((1.0 / 5.0f64).asin() - (0.5 / 5.0f64).asin()) * i as f64 / 49.0;
                let d = -0.2 + 0.4 * j as f64 / 49.0;
                let w = Complex64::from_polar(th.tan(), d);
                assert!((w - center).norm() <= radius);
            }
        }
    }
}
