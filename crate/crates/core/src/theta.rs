//! The geometric side: `Θ_f(g) = Σ_{γ ∈ Γ∞\Γ} f(γg)` by coset summation, and
//! Monte Carlo estimates of `‖Θ_f‖²` and `∫ Θ_f dσ`.
//!
//! `‖Θ_f‖²` is estimated through the unfolding identity
//! `‖Θ_f‖² = ∫_{Γ∞\G} f̄ Θ_f dσ`: points of `Γ∞\G` are drawn with `t_n`
//! from the density `∝ e^{-t_n}` on `supp v`, `x` uniform on the unit box
//! and `k` from Haar measure restricted to a box containing `supp ψ`, so that
//! `‖Θ_f‖² = c0 · Z · |box| · E[f̄ Θ_f]` with `Z = e^{-T₋} - e^{-T₊}`.
//! For `SL2(Z[i])` the full box counts every point twice (the rotation
//! `diag(i, -i)` lies in `Γ∞`), which `c0 = |ω|/v` already accounts for.

use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use rand_core::RngCore;
use serde::{Deserialize, Serialize};

use crate::group::{compose_factor, wrap_angle, Compact, FactorCoords, FactorKind, GroupPoint};
use crate::lattice::{check_kind, for_each_coset, for_each_coset_cone, haar_sample, sample_su2, LatticeKind, LatticeSpec};
use crate::rng::{truncated_exp, uniform, uniform_range};
use crate::stats::{Accumulator, McEstimate};
use crate::test_function::{Psi, TestFunction};
use crate::{Error, Result};

/// Relative slack on the enumeration window.
pub const WINDOW_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaValue {
    pub value: f64,
    /// Cosets whose row norm fell in the support window.
    pub terms_used: u64,
    /// Upper end of the row-norm window.
    pub norm_bound_used: f64,
}

fn level(l: &LatticeSpec) -> u32 {
    match l.kind {
        LatticeKind::Gamma0 { level } => level,
        _ => 1,
    }
}

fn check_case(f: &TestFunction, l: &LatticeSpec) -> Result<()> {
    if f.case() != l.mu {
        return Err(Error::InvalidInput("test function case differs from the lattice"));
    }
    let (a, b) = f.support_t();
    if !(b > a) {
        return Err(Error::InsufficientSupport);
    }
    Ok(())
}

/// Row-norm window `[e^{-T₊/μ}, e^{-T₋/μ}]` for `supp v = [T₋, T₊]`.
pub fn norm_window(f: &TestFunction, l: &LatticeSpec) -> (f64, f64) {
    let (a, b) = f.support_t();
    let mu = l.mu_f64();
    ((-b / mu).exp() * (1.0 - WINDOW_SLACK), (-a / mu).exp() * (1.0 + WINDOW_SLACK))
}

/// `Θ_f(g)`, restricting the enumeration to the support cone of `ψ` when
/// one is available.
pub fn theta_eval(f: &TestFunction, g: &GroupPoint, l: &LatticeSpec) -> Result<ThetaValue> {
    theta_eval_with(f, g, l, true)
}

/// As [`theta_eval`]; `use_cone = false` enumerates the full window.
pub fn theta_eval_with(f: &TestFunction, g: &GroupPoint, l: &LatticeSpec, use_cone: bool) -> Result<ThetaValue> {
    check_kind(g, l)?;
    check_case(f, l)?;
    let (lo, hi) = norm_window(f, l);
    let mu = l.mu_f64();
    let mut value = 0.0;
    let mut terms = 0u64;
    let mut visit = |_, row: crate::lattice::BottomRow| {
        terms += 1;
        let tn = -mu * row.norm_sqr().ln();
        value += f.eval(tn, &row.compact());
    };
    match f.psi.cone().filter(|_| use_cone) {
        Some(cone) => for_each_coset_cone(g, level(l), lo, hi, &cone, &mut visit),
        None => for_each_coset(g, level(l), lo, hi, &mut visit),
    }
    Ok(ThetaValue {
        value,
        terms_used: terms,
        norm_bound_used: hi,
    })
}

/// A point of `Γ∞\G` drawn from the proposal described in the module docs,
/// with `f` evaluated there.
#[derive(Debug, Clone)]
pub struct CuspSample {
    pub g: GroupPoint,
    pub tn: f64,
    pub f_value: f64,
    /// Haar mass of the `k`-box the sample was drawn from.
    pub k_mass: f64,
}

/// Haar-distributed `k` conditioned on a box around `supp ψ`, with the
/// box's Haar mass.
pub fn sample_k_support<R: RngCore + ?Sized>(psi: &Psi, kind: FactorKind, rng: &mut R) -> (Compact, f64) {
    match (*psi, kind) {
        (Psi::RealBump { lambda }, FactorKind::Real) => {
            // ψ depends on θ mod π; two arcs of half-width w.
            let w = (1.0 / lambda).min(0.5 * PI);
            let u = uniform_range(rng, -w, w);
            let theta = wrap_angle(if uniform(rng) < 0.5 { u } else { u + PI });
            (Compact::Real { theta }, 2.0 * w / PI)
        }
        (Psi::ComplexBump { lambda }, FactorKind::Complex) => {
            // sin θ ∈ [1/(2λ), 1/λ] with density ∝ sin 2θ, |α - β| ≤ 1/λ.
            let th_lo = (0.5 / lambda).min(1.0).asin();
            let th_hi = (1.0 / lambda).min(1.0).asin();
            let (c_hi, c_lo) = ((2.0 * th_lo).cos(), (2.0 * th_hi).cos());
            let theta = 0.5 * uniform_range(rng, c_lo, c_hi).clamp(-1.0, 1.0).acos();
            let w = (1.0 / lambda).min(PI);
            let alpha = uniform_range(rng, 0.0, 2.0 * PI);
            let beta = wrap_angle(alpha - uniform_range(rng, -w, w));
            let mass = 0.5 * (c_hi - c_lo) * (w / PI);
            (Compact::Complex { theta, alpha, beta }, mass)
        }
        (_, FactorKind::Real) => (
            Compact::Real {
                theta: uniform_range(rng, 0.0, 2.0 * PI),
            },
            1.0,
        ),
        (_, FactorKind::Complex) => (sample_su2(rng), 1.0),
    }
}

/// `Z = ∫_{T₋}^{T₊} e^{-t} dt`.
pub fn support_mass(f: &TestFunction) -> f64 {
    let (a, b) = f.support_t();
    (-a).exp() - (-b).exp()
}

pub fn sample_cusp<R: RngCore + ?Sized>(f: &TestFunction, l: &LatticeSpec, rng: &mut R) -> CuspSample {
    let (a, b) = f.support_t();
    let tn = truncated_exp(rng, a, b);
    let x = match l.mu {
        FactorKind::Real => Complex64::new(uniform_range(rng, -0.5, 0.5), 0.0),
        FactorKind::Complex => Complex64::new(uniform_range(rng, -0.5, 0.5), uniform_range(rng, -0.5, 0.5)),
    };
    let (k, k_mass) = sample_k_support(&f.psi, l.mu, rng);
    let g = GroupPoint::new(alloc::vec![compose_factor(&FactorCoords {
        x,
        t: tn / l.mu_f64(),
        k,
    })])
    .expect("unit determinant");
    CuspSample {
        g,
        tn,
        f_value: f.eval(tn, &k),
        k_mass,
    }
}

/// `n` unfolded samples of `c0 Z |box| f̄ Θ_f`; the mean estimates `‖Θ_f‖²`.
pub fn direct_theta_norm_acc<R: RngCore + ?Sized>(
    f: &TestFunction,
    l: &LatticeSpec,
    n: u64,
    rng: &mut R,
) -> Result<Accumulator> {
    check_case(f, l)?;
    let pre = l.c0 * support_mass(f);
    let mut acc = Accumulator::new();
    for _ in 0..n {
        let s = sample_cusp(f, l, rng);
        if s.f_value == 0.0 {
            acc.push(0.0);
            continue;
        }
        let th = theta_eval(f, &s.g, l)?;
        acc.push(pre * s.k_mass * s.f_value * th.value);
    }
    Ok(acc)
}

/// Unfolded Monte Carlo estimate of `‖Θ_f‖²`; `seed` is recorded in the
/// result only.
pub fn direct_theta_norm<R: RngCore + ?Sized>(
    f: &TestFunction,
    l: &LatticeSpec,
    n_samples: u64,
    seed: u64,
    rng: &mut R,
) -> Result<McEstimate> {
    if n_samples < 1000 {
        return Err(Error::InvalidInput("n_samples must be at least 1000"));
    }
    Ok(direct_theta_norm_acc(f, l, n_samples, rng)?.estimate(seed))
}

/// `n` values of `Θ_f` at Haar-random points of `Γ\G`.
pub fn siegel_acc<R: RngCore + ?Sized>(f: &TestFunction, l: &LatticeSpec, n: u64, rng: &mut R) -> Result<Accumulator> {
    check_case(f, l)?;
    let mut acc = Accumulator::new();
    for _ in 0..n {
        let g = haar_sample(l, rng)?;
        acc.push(theta_eval(f, &g, l)?.value);
    }
    Ok(acc)
}

/// Monte Carlo mean of `Θ_f` over `Γ\G`; compare with [`siegel_target`].
pub fn siegel_mean<R: RngCore + ?Sized>(
    f: &TestFunction,
    l: &LatticeSpec,
    n_samples: u64,
    seed: u64,
    rng: &mut R,
) -> Result<McEstimate> {
    Ok(siegel_acc(f, l, n_samples, rng)?.estimate(seed))
}

/// `c0 ∫_{Q\G} f`.
pub fn siegel_target(f: &TestFunction, l: &LatticeSpec) -> f64 {
    l.c0 * f.integral()
}

/// `n` Haar samples of `Θ_f²`: the folded side of the unfolding identity.
pub fn folded_norm_acc<R: RngCore + ?Sized>(
    f: &TestFunction,
    l: &LatticeSpec,
    n: u64,
    rng: &mut R,
) -> Result<Accumulator> {
    check_case(f, l)?;
    let mut acc = Accumulator::new();
    for _ in 0..n {
        let g = haar_sample(l, rng)?;
        let v = theta_eval(f, &g, l)?.value;
        acc.push(v * v);
    }
    Ok(acc)
}

/// Accumulators for `‖Θ^Λ_f‖²`, `κ ‖Θ^Γ_f‖²` and their difference on the
/// same samples, with `κ = [Γ∞:Λ∞]²/[Γ:Λ]`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SubgroupAcc {
    pub lhs: Accumulator,
    pub rhs: Accumulator,
    /// `rhs - lhs` per sample.
    pub diff: Accumulator,
}

impl SubgroupAcc {
    pub fn merge(&self, o: &SubgroupAcc) -> SubgroupAcc {
        SubgroupAcc {
            lhs: self.lhs.merge(&o.lhs),
            rhs: self.rhs.merge(&o.rhs),
            diff: self.diff.merge(&o.diff),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubgroupComparison {
    pub lhs: McEstimate,
    pub rhs: McEstimate,
    /// `[Γ∞:Λ∞]² / [Γ:Λ]`.
    pub factor: f64,
    /// Standard error of `rhs - lhs` on common samples.
    pub diff_se: f64,
    /// `lhs ≤ rhs + 3 diff_se`.
    pub pass: bool,
}

impl SubgroupComparison {
    pub fn from_acc(a: &SubgroupAcc, factor: f64, seed: u64) -> Self {
        let diff_se = a.diff.std_error();
        SubgroupComparison {
            lhs: a.lhs.estimate(seed),
            rhs: a.rhs.estimate(seed),
            factor,
            diff_se,
            pass: a.lhs.mean <= a.rhs.mean + 3.0 * diff_se,
        }
    }
}

/// Parent lattice of a congruence subgroup.
pub fn parent_lattice(sub: &LatticeSpec) -> Result<LatticeSpec> {
    match sub.kind {
        LatticeKind::Gamma0 { .. } => Ok(LatticeSpec::modular()),
        _ => Err(Error::InvalidInput("subgroup comparison needs a congruence lattice")),
    }
}

/// Both unfolded norms on common random points (`Λ∞ = Γ∞` up to the
/// recorded cusp index, so one proposal serves both).
pub fn subgroup_acc<R: RngCore + ?Sized>(
    f: &TestFunction,
    sub: &LatticeSpec,
    n: u64,
    rng: &mut R,
) -> Result<SubgroupAcc> {
    let parent = parent_lattice(sub)?;
    check_case(f, sub)?;
    let factor = (sub.cusp_index as f64).powi(2) / sub.index as f64;
    let z = support_mass(f);
    let mut out = SubgroupAcc::default();
    for _ in 0..n {
        let s = sample_cusp(f, &parent, rng);
        let (l, r) = if s.f_value == 0.0 {
            (0.0, 0.0)
        } else {
            let tl = theta_eval(f, &s.g, sub)?.value;
            let tg = theta_eval(f, &s.g, &parent)?.value;
            let w = z * s.k_mass * s.f_value;
            (sub.c0 * w * tl, factor * parent.c0 * w * tg)
        };
        out.lhs.push(l);
        out.rhs.push(r);
        out.diff.push(r - l);
    }
    Ok(out)
}

pub fn subgroup_comparison<R: RngCore + ?Sized>(
    f: &TestFunction,
    sub: &LatticeSpec,
    n_samples: u64,
    seed: u64,
    rng: &mut R,
) -> Result<SubgroupComparison> {
    let acc = subgroup_acc(f, sub, n_samples, rng)?;
    let factor = (sub.cusp_index as f64).powi(2) / sub.index as f64;
    Ok(SubgroupComparison::from_acc(&acc, factor, seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bump::BumpV;
    use crate::group::Mat2;
    use crate::lattice::delta;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn flat(a: f64, b: f64, case: FactorKind) -> TestFunction {
        // v ≡ 1 on (a, b) (ramps of width ~0 are not smooth but fine for counting).
        let mut v = BumpV::on_interval(a - 1e-3, b + 1e-3, 1.0, 0.5, case);
        v.ramp = 1e-300;
        v.degenerate = false;
        TestFunction {
            v,
            psi: Psi::Constant,
            scale: 1.0,
        }
    }

    #[test]
    fn counts_cosets_at_identity() {
        let l = LatticeSpec::modular();
        let f = flat(-0.1, 0.0, FactorKind::Real);
        let g = GroupPoint::identity(&[FactorKind::Real]);
        let th = theta_eval(&f, &g, &l).unwrap();
        // (0,1) and (1,0): norm 1; (1,±1) has norm 2 > e^{0.1}.
        assert_eq!(th.value, 2.0);
    }

    #[test]
    fn deep_cusp_is_empty() {
        let l = LatticeSpec::modular();
        let f = TestFunction::real_family(4.0, 0.2).unwrap();
        let y: f64 = 1e4;
        let g = GroupPoint::real(Mat2::new(y.sqrt(), 0.0, 0.0, 1.0 / y.sqrt())).unwrap();
        let th = theta_eval(&f, &g, &l).unwrap();
        assert_eq!((th.value, th.terms_used), (0.0, 0));
        assert!(delta(&g, &l).unwrap() > 9.0);
    }

    #[test]
    fn left_translation_invariance() {
        let l = LatticeSpec::modular();
        let f = TestFunction::real_family(6.0, 0.2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let g = haar_sample(&l, &mut rng).unwrap();
            let n1 = GroupPoint::real(Mat2::new(1.0, 1.0, 0.0, 1.0)).unwrap();
            let a = theta_eval(&f, &g, &l).unwrap().value;
            let b = theta_eval(&f, &n1.mul(&g).unwrap(), &l).unwrap().value;
            assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()), "{a} {b}");
        }
    }

    #[test]
    fn cone_matches_full_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for (l, f) in [
            (LatticeSpec::modular(), TestFunction::real_family(8.0, 0.2).unwrap()),
            (LatticeSpec::bianchi(), TestFunction::complex_family(4.0, 0.2).unwrap()),
        ] {
            for _ in 0..200 {
                let s = sample_cusp(&f, &l, &mut rng);
                let a = theta_eval_with(&f, &s.g, &l, true).unwrap().value;
                let b = theta_eval_with(&f, &s.g, &l, false).unwrap().value;
                assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()), "{a} {b}");
            }
        }
    }

    #[test]
    fn theta_vanishes_outside_support() {
        // Θ_f(g) ≠ 0 forces Δ(g) inside the support window up to the
        // contribution of the identity coset.
        let l = LatticeSpec::modular();
        let f = TestFunction::spherical(2.0, 3.0, FactorKind::Real).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..2000 {
            let g = haar_sample(&l, &mut rng).unwrap();
            let d = delta(&g, &l).unwrap();
            let th = theta_eval(&f, &g, &l).unwrap().value;
            if d < 2.0 - 1e-9 || d > 3.0 + 1e-9 {
                assert_eq!(th, 0.0, "Δ = {d}");
            }
            assert!(th >= 0.0);
        }
    }

    #[test]
    fn zero_function_gives_zero() {
        let l = LatticeSpec::modular();
        let f = TestFunction::real_family(4.0, 0.2).unwrap().scaled(0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let e = direct_theta_norm(&f, &l, 1000, 6, &mut rng).unwrap();
        assert_eq!((e.mean, e.std_error), (0.0, 0.0));
        assert!(direct_theta_norm(&f, &l, 10, 6, &mut rng).is_err());
    }

    #[test]
    fn support_box_mass() {
        // E_box[ψ] · |box| = ∫ψ dk.
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for (psi, kind) in [
            (Psi::RealBump { lambda: 5.0 }, FactorKind::Real),
            (Psi::ComplexBump { lambda: 3.0 }, FactorKind::Complex),
        ] {
            let f = TestFunction::spherical(-1.0, 1.0, kind).unwrap().with_psi(psi);
            let mut acc = Accumulator::new();
            for _ in 0..50_000 {
                let (k, m) = sample_k_support(&psi, kind, &mut rng);
                acc.push(m * psi.eval(&k));
            }
            let exact = f.psi_moments().0;
            assert!((acc.mean - exact).abs() < 4.0 * acc.std_error(), "{} {exact}", acc.mean);
        }
    }

    #[test]
    fn siegel_small() {
        let l = LatticeSpec::modular();
        let f = TestFunction::real_family(4.0, 0.2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let e = siegel_mean(&f, &l, 20_000, 7, &mut rng).unwrap();
        let target = siegel_target(&f, &l);
        assert!((e.mean - target).abs() <= 4.0 * e.std_error, "{e:?} {target}");
    }

    #[test]
    fn unfolding_matches_folding() {
        let l = LatticeSpec::modular();
        let f = TestFunction::real_family(2.0, 0.2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let a = direct_theta_norm_acc(&f, &l, 20_000, &mut rng).unwrap();
        let b = folded_norm_acc(&f, &l, 20_000, &mut rng).unwrap();
        let se = (a.std_error().powi(2) + b.std_error().powi(2)).sqrt();
        assert!((a.mean - b.mean).abs() <= 4.0 * se, "{} {} {se}", a.mean, b.mean);
    }

    #[test]
    fn subgroup_trivial_indices() {
        let l = LatticeSpec::gamma0(2).unwrap();
        let f = TestFunction::real_family(4.0, 0.2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let c = subgroup_comparison(&f, &l, 5000, 9, &mut rng).unwrap();
        assert_eq!(c.factor, 1.0 / 3.0);
        assert!(c.pass, "{c:?}");
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let c2 = subgroup_comparison(&f.scaled(2.0), &l, 5000, 9, &mut rng).unwrap();
        assert!((c2.lhs.mean - 4.0 * c.lhs.mean).abs() <= 1e-9 * c2.lhs.mean);
        assert_eq!(c2.pass, c.pass);
    }
}
