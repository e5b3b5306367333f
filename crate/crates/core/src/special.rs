//! Complex Gamma, Riemann ζ, `L(s, χ₋₄)` and the scattering constant `C(s)`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::gaussian::{gaussian_totient, GInt};
use crate::lattice::LatticeKind;
use crate::{Error, Result};

type C = Complex64;

const LANCZOS: [f64; 14] = [
    57.156_235_665_862_923_5,
    -59.597_960_355_475_491_2,
    14.136_097_974_741_747_1,
    -0.491_913_816_097_620_199,
    0.339_946_499_848_118_887e-4,
    0.465_236_289_270_485_756e-4,
    -0.983_744_753_048_795_646e-4,
    0.158_088_703_224_912_494e-3,
    -0.210_264_441_724_104_883e-3,
    0.217_439_618_115_212_643e-3,
    -0.164_318_106_536_763_890e-3,
    0.844_182_239_838_527_433e-4,
    -0.261_908_384_015_814_087e-4,
    0.368_991_826_595_316_234e-5,
];

/// `ln Γ(z)` on the principal-ish branch (only `exp` of it is consumed).
pub fn ln_gamma(z: C) -> C {
    if z.re < 0.5 {
        // Reflection: Γ(z) Γ(1 - z) = π / sin(πz).
        let s = (C::new(PI, 0.0) * z).sin();
        return C::new(PI.ln(), 0.0) - s.ln() - ln_gamma(C::new(1.0, 0.0) - z);
    }
    let x = z;
    let tmp = x + 5.242_187_5;
    let tmp = (x + 0.5) * tmp.ln() - tmp;
    let mut ser = C::new(0.999_999_999_999_997_092, 0.0);
    for (j, &c) in LANCZOS.iter().enumerate() {
        ser += c / (x + (j + 1) as f64);
    }
    tmp + (ser * 2.506_628_274_631_000_5 / x).ln()
}

pub fn gamma(z: C) -> C {
    ln_gamma(z).exp()
}

/// Alternating series `Σ_{k≥0} (-1)^k a_k` by the Cohen–Rodriguez Villegas–
/// Zagier acceleration with `n` terms.
pub fn alternating_sum<F: Fn(usize) -> C>(n: usize, a: F) -> C {
    let mut d = (3.0 + 8f64.sqrt()).powi(n as i32);
    d = 0.5 * (d + 1.0 / d);
    let mut b = -1.0;
    let mut c = -d;
    let mut s = C::new(0.0, 0.0);
    for k in 0..n {
        c = b - c;
        s += a(k) * c;
        let (kf, nf) = (k as f64, n as f64);
        b *= (kf + nf) * (kf - nf) / ((kf + 0.5) * (kf + 1.0));
    }
    s / d
}

fn terms_for(t: f64) -> usize {
    ((0.9 * t.abs() + 30.0).ceil() as usize).min(380)
}

/// `n^{-s}` for real positive `n`.
#[inline]
fn npow(n: f64, s: C) -> C {
    (-s * n.ln()).exp()
}

/// Dirichlet eta `η(s) = Σ (-1)^{k} (k+1)^{-s}`.
pub fn eta(s: C) -> C {
    alternating_sum(terms_for(s.im), |k| npow((k + 1) as f64, s))
}

const BERNOULLI_2K: [f64; 10] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
];

/// Euler–Maclaurin evaluation, used where `1 - 2^{1-s}` is nearly zero.
fn zeta_euler_maclaurin(s: C) -> C {
    let n = (30.0 + s.im.abs()).ceil() as usize;
    let nf = n as f64;
    let mut sum = C::new(0.0, 0.0);
    for k in 1..n {
        sum += npow(k as f64, s);
    }
    let one = C::new(1.0, 0.0);
    sum += npow(nf, s - one) / (s - one) + npow(nf, s) * 0.5;
    // Σ B_{2k}/(2k)! · s(s+1)…(s+2k-2) · N^{-s-2k+1}
    let mut rising = s;
    let mut fact = 2.0;
    let mut npw = npow(nf, s + one);
    for (k, &b) in BERNOULLI_2K.iter().enumerate() {
        let term = rising * npw * (b / fact);
        sum += term;
        let j = 2.0 * k as f64;
        rising = rising * (s + j + 1.0) * (s + j + 2.0);
        fact *= (j + 3.0) * (j + 4.0);
        npw /= nf * nf;
    }
    sum
}

/// Riemann zeta. Uses the functional equation for `Re s < 1/2`.
pub fn zeta(s: C) -> Result<C> {
    let one = C::new(1.0, 0.0);
    if (s - one).norm() < 1e-12 {
        return Err(Error::PoleAtOne);
    }
    if s.norm() < 1e-9 {
        // ζ(0) = -1/2, ζ'(0) = -ln(2π)/2
        return Ok(C::new(-0.5, 0.0) - s * (0.5 * (2.0 * PI).ln()));
    }
    if s.re < 0.5 {
        // ζ(s) = 2^s π^{s-1} sin(πs/2) Γ(1-s) ζ(1-s)
        let w = one - s;
        let pre = (s * 2f64.ln() + (s - one) * PI.ln() + ln_gamma(w)).exp()
            * (s * (PI / 2.0)).sin();
        return Ok(pre * zeta(w)?);
    }
    let den = one - npow(2.0, s - one);
    if den.norm() < 0.2 {
        return Ok(zeta_euler_maclaurin(s));
    }
    Ok(eta(s) / den)
}

/// `L(s, χ₋₄) = Σ (-1)^k (2k+1)^{-s}`, entire; functional equation for
/// `Re s < 1/2`.
pub fn l_chi4(s: C) -> C {
    let one = C::new(1.0, 0.0);
    if s.re < 0.5 {
        // Λ(s) = (π/4)^{-(s+1)/2} Γ((s+1)/2) L(s) satisfies Λ(s) = Λ(1-s).
        let w = one - s;
        let lq = |z: C| -(z + one) * 0.5 * (PI / 4.0).ln() + ln_gamma((z + one) * 0.5);
        return (lq(w) - lq(s)).exp() * l_chi4(w);
    }
    alternating_sum(terms_for(s.im), |k| npow((2 * k + 1) as f64, s))
}

/// `ζ_{Q(i)}(s) = ζ(s) L(s, χ₋₄)`.
pub fn zeta_gaussian(s: C) -> Result<C> {
    Ok(zeta(s)? * l_chi4(s))
}

/// `ln(π^{-s/2} Γ(s/2))`, the archimedean factor of the completed zeta.
fn ln_gamma_q(s: C) -> C {
    -s * 0.5 * PI.ln() + ln_gamma(s * 0.5)
}

/// `ln(π^{-s} Γ(s))`, the archimedean factor for `Q(i)`.
fn ln_gamma_k(s: C) -> C {
    -s * PI.ln() + ln_gamma(s)
}

/// Closed form of `C(s)` for `SL2(Z)`:
/// `√π Γ(s-½) ζ(2s-1) / (Γ(s) ζ(2s)) = ξ(2-2s)/ξ(2s)`.
pub fn scattering_modular(s: C) -> Result<C> {
    let one = C::new(1.0, 0.0);
    if (s - one).norm() < 1e-10 {
        return Err(Error::PoleHit);
    }
    if s.re >= 0.75 {
        let g = (0.5 * PI.ln() + ln_gamma(s - 0.5) - ln_gamma(s)).exp();
        Ok(g * zeta(s * 2.0 - one)? / zeta(s * 2.0)?)
    } else {
        let (w, w1) = (s * 2.0, one * 2.0 - s * 2.0);
        Ok((ln_gamma_q(w1) - ln_gamma_q(w)).exp() * (zeta(w1)? / zeta(w)?))
    }
}

/// Closed form of `C(s)` for `SL2(Z[i])`:
/// `π ζ_K(2s-1) / ((2s-1) ζ_K(2s)) = Λ_K(2-2s)/Λ_K(2s)`.
pub fn scattering_gaussian(s: C) -> Result<C> {
    let one = C::new(1.0, 0.0);
    if (s - one).norm() < 1e-10 {
        return Err(Error::PoleHit);
    }
    if s.re >= 0.75 {
        let w = s * 2.0 - one;
        Ok(zeta_gaussian(w)? * PI / (w * zeta_gaussian(s * 2.0)?))
    } else {
        let (w, w1) = (s * 2.0, one * 2.0 - s * 2.0);
        Ok((ln_gamma_k(w1) - ln_gamma_k(w)).exp() * (zeta_gaussian(w1)? / zeta_gaussian(w)?))
    }
}

/// A pole `s_j ∈ (½, 1]` of `C(s)` with residue `c_j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pole {
    pub s: f64,
    pub residue: f64,
}

/// Evaluator of `C(s)` together with its pole list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatteringEvaluator {
    pub lattice: LatticeKind,
    /// Poles in `(½, 1]`; `s = 1` comes first.
    pub poles: Vec<Pole>,
    /// Residue at `s = 1`.
    pub c0: f64,
    /// Maximal relative residual of the coset-sum validation, when one was run.
    pub validation_residual: Option<f64>,
}

/// Residual below which the `SL2(Z[i])` closed form is trusted.
pub const GAUSSIAN_VALIDATION_TOL: f64 = 1e-6;

impl ScatteringEvaluator {
    /// `SL2(Z)`: the closed form needs no validation.
    pub fn modular() -> Self {
        ScatteringEvaluator {
            lattice: LatticeKind::ModularZ,
            poles: alloc::vec![Pole {
                s: 1.0,
                residue: 3.0 / PI
            }],
            c0: 3.0 / PI,
            validation_residual: None,
        }
    }

    /// `SL2(Z[i])`: enabled only with a coset-sum fit residual below
    /// [`GAUSSIAN_VALIDATION_TOL`].
    pub fn gaussian(validation_residual: f64, c0: f64) -> Result<Self> {
        if !(validation_residual < GAUSSIAN_VALIDATION_TOL) {
            return Err(Error::UnsupportedLattice);
        }
        Ok(ScatteringEvaluator {
            lattice: LatticeKind::BianchiZi,
            poles: alloc::vec![Pole { s: 1.0, residue: c0 }],
            c0,
            validation_residual: Some(validation_residual),
        })
    }

    /// Add a user-supplied exceptional pole.
    pub fn with_pole(mut self, pole: Pole) -> Result<Self> {
        if !(pole.s > 0.5 && pole.s < 1.0) {
            return Err(Error::InvalidInput("extra poles must lie in (1/2, 1)"));
        }
        self.poles.push(pole);
        Ok(self)
    }

    pub fn eval(&self, s: C) -> Result<C> {
        match self.lattice {
            LatticeKind::ModularZ => scattering_modular(s),
            LatticeKind::BianchiZi => scattering_gaussian(s),
            LatticeKind::Gamma0 { .. } => Err(Error::UnsupportedLattice),
        }
    }
}

/// `C(s)` for a lattice kind. `SL2(Z[i])` is gated and reports
/// `UnsupportedLattice`; build a validated [`ScatteringEvaluator`] instead.
pub fn scattering_c(s: C, kind: &LatticeKind) -> Result<C> {
    match kind {
        LatticeKind::ModularZ => scattering_modular(s),
        _ => Err(Error::UnsupportedLattice),
    }
}

/// Richardson-extrapolated `lim_{h→0} h·C(1+h)`.
pub fn numeric_residue<F: Fn(C) -> Result<C>>(c: F) -> Result<f64> {
    let one = C::new(1.0, 0.0);
    let sym = |h: f64| -> Result<f64> {
        // Symmetric difference cancels the even part of h·C(1+h).
        let a = c(one + h)? * h;
        let b = c(one - h)? * (-h);
        Ok(0.5 * (a.re + b.re))
    };
    let (h1, h2) = (1e-2, 5e-3);
    let (r1, r2) = (sym(h1)?, sym(h2)?);
    Ok((4.0 * r2 - r1) / 3.0)
}

/// Coset-sum fit of the `SL2(Z[i])` scattering constant against
/// `π ζ_K(2s-1) / ((2s-1) ζ_K(2s))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianFit {
    pub s: Vec<f64>,
    /// `C(s)` from the truncated coset sum plus its tail estimate.
    pub coset_sum: Vec<f64>,
    pub closed_form: Vec<f64>,
    /// Least-squares constant in `coset_sum ≈ constant · closed_form`.
    pub constant: f64,
    /// `max |coset_sum / (constant · closed_form) - 1|`.
    pub residual: f64,
    pub norm_bound: i64,
}

/// Averaging `E(s, n_x a_t)` over `x` leaves
/// `C(s) = π/(2s-1) · Σ_c φ(c) N(c)^{-2s}`, the sum over `c ≠ 0` modulo
/// units. The sum is cut at `N(c) ≤ X` and the tail taken from the
/// summatory function `Φ(N) ≈ A N²/2`, with `A` fitted on `[X/2, X]`.
pub fn fit_gaussian_scattering(norm_bound: i64, s_grid: &[f64]) -> Result<GaussianFit> {
    if norm_bound < 1000 || s_grid.is_empty() || s_grid.iter().any(|&s| !(s > 1.0)) {
        return Err(Error::InvalidInput("need norm_bound >= 1000 and every s > 1"));
    }
    let x = norm_bound;
    // phi_by_norm[n] = Σ_{N(c) = n} φ(c)
    let mut phi_by_norm = alloc::vec![0u64; x as usize + 1];
    let pmax = (x as f64).sqrt() as i64 + 1;
    for p in 1..=pmax {
        for q in 0..=pmax {
            let c = GInt::new(p, q);
            let n = c.norm();
            if n > x {
                break;
            }
            phi_by_norm[n as usize] += gaussian_totient(c);
        }
    }
    let mut partial = alloc::vec![0.0; s_grid.len()];
    let mut big_phi = 0.0f64;
    let mut a_acc = 0.0;
    let mut a_cnt = 0.0;
    for n in 1..=x {
        let v = phi_by_norm[n as usize];
        if v != 0 {
            let nf = n as f64;
            big_phi += v as f64;
            for (acc, &s) in partial.iter_mut().zip(s_grid) {
                *acc += v as f64 * nf.powf(-2.0 * s);
            }
        }
        if 2 * n >= x {
            a_acc += 2.0 * big_phi / (n as f64 * n as f64);
            a_cnt += 1.0;
        }
    }
    let a = a_acc / a_cnt;
    let xf = x as f64;
    let mut coset_sum = Vec::with_capacity(s_grid.len());
    let mut closed_form = Vec::with_capacity(s_grid.len());
    for (&s, &head) in s_grid.iter().zip(&partial) {
        let tail = -big_phi * xf.powf(-2.0 * s) + s * a * xf.powf(2.0 - 2.0 * s) / (2.0 * s - 2.0);
        coset_sum.push(PI / (2.0 * s - 1.0) * (head + tail));
        closed_form.push(scattering_gaussian(C::new(s, 0.0))?.re);
    }
    let num: f64 = coset_sum.iter().zip(&closed_form).map(|(a, b)| a * b).sum();
    let den: f64 = closed_form.iter().map(|b| b * b).sum();
    let constant = num / den;
    let residual = coset_sum
        .iter()
        .zip(&closed_form)
        .map(|(a, b)| (a / (constant * b) - 1.0).abs())
        .fold(0.0, f64::max);
    Ok(GaussianFit {
        s: s_grid.to_vec(),
        coset_sum,
        closed_form,
        constant,
        residual,
        norm_bound,
    })
}

impl GaussianFit {
    /// A validated evaluator, or `UnsupportedLattice` when the fit is too
    /// poor or the constant is not 1.
    pub fn evaluator(&self, c0: f64) -> Result<ScatteringEvaluator> {
        let r = self.residual.max((self.constant - 1.0).abs());
        ScatteringEvaluator::gaussian(r, c0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    #[test]
    fn gamma_known_values() {
        assert!((gamma(c(5.0, 0.0)) - c(24.0, 0.0)).norm() < 1e-11);
        assert!((gamma(c(0.5, 0.0)).re - PI.sqrt()).abs() < 1e-13);
        // Γ(-0.5) = -2√π via reflection
        assert!((gamma(c(-0.5, 0.0)).re + 2.0 * PI.sqrt()).abs() < 1e-12);
        // |Γ(½ + i t)|² = π / cosh(π t)
        let t: f64 = 3.0;
        let g = gamma(c(0.5, t)).norm_sqr();
        assert!((g / (PI / (PI * t).cosh()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zeta_known_values() {
        assert!((zeta(c(2.0, 0.0)).unwrap().re - PI * PI / 6.0).abs() < 1e-13);
        assert!((zeta(c(0.5, 0.0)).unwrap().re + 1.460_354_508_809_586_8).abs() < 1e-12);
        assert!((zeta(c(0.0, 0.0)).unwrap().re + 0.5).abs() < 1e-12);
        assert_eq!(zeta(c(1.0, 0.0)), Err(Error::PoleAtOne));
    }

    #[test]
    fn zeta_paths_agree_on_line_one() {
        // Both algorithms in a region where each is well conditioned.
        for t in [1.0, 3.0, 7.0, 15.0] {
            let s = c(1.0, t);
            let e = eta(s) / (c(1.0, 0.0) - npow(2.0, s - c(1.0, 0.0)));
            let m = zeta_euler_maclaurin(s);
            if (c(1.0, 0.0) - npow(2.0, s - c(1.0, 0.0))).norm() > 0.2 {
                assert!((e - m).norm() < 1e-11, "t={t}");
            }
        }
    }

    #[test]
    fn l_chi4_catalan() {
        assert!((l_chi4(c(2.0, 0.0)).re - 0.915_965_594_177_219).abs() < 1e-13);
        assert!((l_chi4(c(1.0, 0.0)).re - PI / 4.0).abs() < 1e-13);
        // Functional-equation path against the series at s = 0.3.
        let direct = alternating_sum(60, |k| npow((2 * k + 1) as f64, c(0.3, 0.0)));
        assert!((l_chi4(c(0.3, 0.0)) - direct).norm() < 1e-10);
    }

    #[test]
    fn modular_residue() {
        let r = numeric_residue(scattering_modular).unwrap();
        assert!((r - 3.0 / PI).abs() < 1e-6, "{r}");
    }

    #[test]
    fn gaussian_residue() {
        let r = numeric_residue(scattering_gaussian).unwrap();
        let cat = 0.915_965_594_177_219;
        assert!((r - 3.0 / (4.0 * cat)).abs() < 1e-6, "{r}");
    }

    #[test]
    fn forms_agree_across_switch() {
        for &(re, im) in &[(0.75, 0.0), (0.75, 4.0), (0.8, 2.5)] {
            let s = c(re, im);
            let one = c(1.0, 0.0);
            let (w, w1) = (s * 2.0, one * 2.0 - s * 2.0);
            let q = (ln_gamma_q(w1) - ln_gamma_q(w)).exp() * zeta(w1).unwrap() / zeta(w).unwrap();
            assert!((scattering_modular(s).unwrap() - q).norm() < 1e-11);
            let k = (ln_gamma_k(w1) - ln_gamma_k(w)).exp() * zeta_gaussian(w1).unwrap() / zeta_gaussian(w).unwrap();
            assert!((scattering_gaussian(s).unwrap() - k).norm() < 1e-11);
        }
    }

    #[test]
    fn gated_gaussian() {
        assert_eq!(
            scattering_c(c(1.5, 0.0), &LatticeKind::BianchiZi),
            Err(Error::UnsupportedLattice)
        );
        assert!(ScatteringEvaluator::gaussian(1e-3, 0.8).is_err());
        assert!(ScatteringEvaluator::gaussian(1e-8, 0.8).is_ok());
    }

    #[test]
    fn gaussian_fit_validates_closed_form() {
        let fit = fit_gaussian_scattering(200_000, &[1.25, 1.5, 2.0]).unwrap();
        std::println!("{fit:?}");
        assert!(fit.residual < GAUSSIAN_VALIDATION_TOL, "{}", fit.residual);
        assert!((fit.constant - 1.0).abs() < 1e-6);
    }
}
