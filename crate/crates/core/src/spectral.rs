//! The spectral side: `P_m(s)`, `M_f(s)`, weight projections of the compact
//! factor and the exact expression for `‖Θ_f‖²` through the constant term
//! of the Eisenstein series.
//!
//! For `f(a_{ηt} k) = v(t) ψ(k)` with weight components `ψ_m`,
//!
//! ```text
//! ‖Θ_f‖² = c0 Σ_m ( ‖ψ_m‖² ∫|v̂(r - i/2)|² dr
//!                 + ‖ψ_m‖² ∫ v̂(r - i/2)² C(½ + ir) P_m(½ + ir) dr
//!                 + Σ_j c_j P_m(s_j) ‖ψ_m‖² |∫ v(t) e^{-s_j t} dt|² ).
//! ```

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use rand_core::RngCore;
use serde::{Deserialize, Serialize};

use crate::bump::truncation_radius;
use crate::group::{Compact, FactorKind};
use crate::lattice::LatticeSpec;
use crate::quad::Rule;
use crate::rng::uniform_range;
use crate::special::ScatteringEvaluator;
use crate::test_function::{Psi, TestFunction};
use crate::{Error, Result};

type C = Complex64;

/// Relative tail tolerance for weight series.
pub const WEIGHT_TAIL_TOL: f64 = 1e-6;

/// A weight `m = (m_1, …, m_n)`; complex entries are `≥ 0`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightIndex(pub Vec<i64>);

/// `P_m(s) = Π_j Π_{k<|m_j|} (μ_j(1-s) + k)/(μ_j s + k)`.
pub fn pm_eval(m: &WeightIndex, s: C, kinds: &[FactorKind]) -> Result<C> {
    if m.0.len() != kinds.len() {
        return Err(Error::InvalidInput("weight index length differs from the number of factors"));
    }
    let total: i64 = m.0.iter().map(|x| x.abs()).sum();
    let one = C::new(1.0, 0.0);
    let mut prod = one;
    let mut log_sum = C::new(0.0, 0.0);
    for (&mj, kind) in m.0.iter().zip(kinds) {
        if *kind == FactorKind::Complex && mj < 0 {
            return Err(Error::InvalidInput("complex weights are nonnegative"));
        }
        let mu = kind.mu_f64();
        for k in 0..mj.unsigned_abs() {
            let kf = k as f64;
            let num = (one - s) * mu + kf;
            let den = s * mu + kf;
            if den.norm() == 0.0 {
                return Err(Error::PoleInDenominator);
            }
            if num.norm() == 0.0 {
                return Ok(C::new(0.0, 0.0));
            }
            if total > 50 {
                log_sum += num.ln() - den.ln();
            } else {
                prod *= num / den;
            }
        }
    }
    Ok(if total > 50 { log_sum.exp() } else { prod })
}

/// `P_0(s), …, P_{m_max}(s)` for one factor, by the recursion
/// `P_{m+1}(s) (μ s + m) = P_m(s) (μ(1-s) + m)`.
pub fn pm_series(m_max: usize, s: C, kind: FactorKind) -> Result<Vec<C>> {
    let mu = kind.mu_f64();
    let one = C::new(1.0, 0.0);
    let mut out = Vec::with_capacity(m_max + 1);
    let mut p = one;
    out.push(p);
    for k in 0..m_max {
        let kf = k as f64;
        let den = s * mu + kf;
        if den.norm() == 0.0 {
            return Err(Error::PoleInDenominator);
        }
        p *= ((one - s) * mu + kf) / den;
        out.push(p);
    }
    Ok(out)
}

/// Band `[min, max]` of `P_m(s) (m+1)^{μ(2s-1)}` over `0 ≤ m ≤ m_max`.
pub fn pm_asymptotic_check(s: f64, m_max: usize, kind: FactorKind) -> Result<(f64, f64)> {
    if m_max < 10 {
        return Err(Error::InvalidInput("m_max must be at least 10"));
    }
    if !(s >= 0.5 && s < 1.0) {
        return Err(Error::InvalidInput("s must lie in [1/2, 1)"));
    }
    let e = kind.mu_f64() * (2.0 * s - 1.0);
    let p = pm_series(m_max, C::new(s, 0.0), kind)?;
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for (m, v) in p.iter().enumerate() {
        let x = v.re * ((m + 1) as f64).powf(e);
        lo = lo.min(x);
        hi = hi.max(x);
    }
    Ok((lo, hi))
}

/// `‖ψ_m‖²` for `m = 0, …, m_max` and the full `‖ψ‖²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightNorms {
    pub kind: FactorKind,
    pub norms: Vec<f64>,
    pub total: f64,
}

impl WeightNorms {
    pub fn m_max(&self) -> usize {
        self.norms.len() - 1
    }

    /// Parseval tail `‖ψ‖² - Σ_{m ≤ m_max} ‖ψ_m‖²`, clamped at 0.
    pub fn tail(&self) -> f64 {
        (self.total - self.norms.iter().sum::<f64>()).max(0.0)
    }

    /// `Σ_m ‖ψ_m‖² P_m(s)` and a bound on the truncated remainder, valid
    /// for real `s ∈ [½, 1]` (where `0 ≤ P_m ≤ 1` is decreasing in `m`).
    pub fn weighted_sum(&self, s: C) -> Result<(C, f64)> {
        let p = pm_series(self.m_max(), s, self.kind)?;
        let head: C = self.norms.iter().zip(&p).map(|(w, p)| p * *w).sum();
        let last = p.last().map_or(1.0, |x| x.norm());
        Ok((head, self.tail() * last.min(1.0)))
    }
}

/// Weight norms of the compact factor of `f`, with `m_max` grown until the
/// Parseval tail drops below `tol · ‖ψ‖²`.
pub fn weight_norms(f: &TestFunction, tol: f64) -> Result<WeightNorms> {
    match f.psi {
        Psi::Constant => Ok(WeightNorms {
            kind: f.case(),
            norms: alloc::vec![1.0],
            total: 1.0,
        }),
        Psi::RealTrig { .. } | Psi::RealBump { .. } => {
            let lambda = match f.psi {
                Psi::RealBump { lambda } => lambda,
                _ => 1.0,
            };
            let mut m_max = (16.0 * lambda).ceil() as usize;
            loop {
                let modes = f.real_modes(m_max)?;
                let w = WeightNorms {
                    kind: FactorKind::Real,
                    norms: modes.weight_norms(),
                    total: modes.norm_sq,
                };
                if w.tail() <= tol * w.total || m_max > 1 << 16 {
                    return Ok(w);
                }
                m_max *= 2;
            }
        }
        Psi::ComplexZonal { a0, a1 } => Ok(WeightNorms {
            kind: FactorKind::Complex,
            norms: alloc::vec![a0 * a0, a1 * a1 / 3.0],
            total: a0 * a0 + a1 * a1 / 3.0,
        }),
        Psi::ComplexBump { lambda } => {
            let mut l_max = (8.0 * lambda * lambda).ceil() as usize + 16;
            loop {
                let w = su2_projection_norms(&f.psi, l_max)?;
                if w.tail() <= tol * w.total || l_max > 1 << 14 {
                    return Ok(w);
                }
                l_max *= 2;
            }
        }
    }
}

/// Parseval tolerance used by [`mf_eval`] and [`spectral_theta_norm`]; the
/// sphere quadrature bottoms out near `1e-9`.
pub fn default_weight_tol(f: &TestFunction) -> f64 {
    match f.case() {
        FactorKind::Real => 1e-9,
        FactorKind::Complex => 1e-7,
    }
}

/// Work budget (node × order × degree) for [`su2_projection_norms`].
pub const SU2_BUDGET: f64 = 4e9;

/// `‖ψ_ℓ‖²`, `ℓ ≤ l_max`, for a compact factor on `M\K ≅ S²`.
///
/// With `Θ = 2θ` and `φ = α - β`, the measure `dk` pushes forward to
/// `sin Θ dΘ dφ / 4π`; `ψ_ℓ` is the degree-`ℓ` spherical-harmonic part.
/// The `φ`-transform is done first, then a normalized associated-Legendre
/// recursion in `ℓ` runs at every `Θ` node with a per-node exponent so that
/// `sin^{m}Θ` does not underflow.
pub fn su2_projection_norms(psi: &Psi, l_max: usize) -> Result<WeightNorms> {
    let total = match psi {
        Psi::Constant => 1.0,
        Psi::ComplexBump { .. } | Psi::ComplexZonal { .. } => {
            TestFunction::spherical(-1.0, 0.0, FactorKind::Complex)?
                .with_psi(*psi)
                .psi_moments()
                .1
        }
        _ => return Err(Error::InvalidInput("projection norms need a complex compact factor")),
    };
    let (th_lo, th_hi, phi_half, mp_max) = match *psi {
        Psi::Constant => {
            let mut norms = alloc::vec![0.0; l_max + 1];
            norms[0] = 1.0;
            return Ok(WeightNorms {
                kind: FactorKind::Complex,
                norms,
                total,
            });
        }
        Psi::ComplexBump { lambda } => (
            2.0 * (0.5 / lambda).min(1.0).asin(),
            2.0 * (1.0 / lambda).min(1.0).asin(),
            (1.0 / lambda).min(PI),
            ((80.0 * lambda).ceil() as usize).min(l_max),
        ),
        _ => (0.0, PI, PI, 2usize.min(l_max)),
    };
    let rule = Rule::new(20);
    let th_panels = 4 + (l_max as f64 * (th_hi - th_lo) / (4.0 * PI)).ceil() as usize;
    let th_nodes = rule.grid(th_lo, th_hi, th_panels);
    let work = th_nodes.len() as f64 * (mp_max + 1) as f64 * l_max as f64;
    if work > SU2_BUDGET {
        return Err(Error::QuadratureBudgetExceeded);
    }
    let phi_nodes: Vec<(f64, f64)> = if phi_half >= PI {
        let n = 2 * mp_max + 8;
        (0..n)
            .map(|j| (-PI + 2.0 * PI * j as f64 / n as f64, 2.0 * PI / n as f64))
            .collect()
    } else {
        let panels = 4 + (mp_max as f64 * phi_half / (4.0 * PI)).ceil() as usize;
        rule.grid(-phi_half, phi_half, panels)
    };
    let nn = th_nodes.len();
    // g[m'][i] = (1/2π) ∫ ψ(Θ_i, φ) e^{-i m' φ} dφ
    let mut g = alloc::vec![C::new(0.0, 0.0); (mp_max + 1) * nn];
    for (i, &(big_th, _)) in th_nodes.iter().enumerate() {
        for &(phi, w) in &phi_nodes {
            let k = Compact::Complex {
                theta: 0.5 * big_th,
                alpha: phi,
                beta: 0.0,
            };
            let val = psi.eval(&k) * w / (2.0 * PI);
            if val == 0.0 {
                continue;
            }
            let step = C::from_polar(1.0, -phi);
            let mut e = C::new(val, 0.0);
            for mp in 0..=mp_max {
                g[mp * nn + i] += e;
                e *= step;
            }
        }
    }
    let xs: Vec<f64> = th_nodes.iter().map(|&(t, _)| t.cos()).collect();
    let ln_sin: Vec<f64> = th_nodes.iter().map(|&(t, _)| t.sin().ln()).collect();
    let mut norms = alloc::vec![0.0; l_max + 1];
    let mut ln_pref = 0.0; // Σ_{k ≤ m'} ½ ln((2k-1)/2k)
    let (mut prev, mut cur) = (alloc::vec![0.0; nn], alloc::vec![0.0; nn]);
    let mut scale = alloc::vec![0.0f64; nn];
    let mut ln_scale = alloc::vec![0.0f64; nn];
    let mut acc_w = alloc::vec![C::new(0.0, 0.0); nn];
    const BIG: f64 = 1e150;
    for mp in 0..=mp_max {
        if mp > 0 {
            ln_pref += 0.5 * ((2 * mp - 1) as f64 / (2 * mp) as f64).ln();
        }
        let mf = mp as f64;
        for i in 0..nn {
            // ½ · dΘ weight · sin Θ · g, the factor ½ from dΩ/4π after the φ-integral.
            acc_w[i] = g[mp * nn + i] * (0.5 * th_nodes[i].1 * (1.0 - xs[i] * xs[i]).sqrt());
            ln_scale[i] = 0.5 * (2.0 * mf + 1.0).ln() + ln_pref + mf * ln_sin[i];
            scale[i] = ln_scale[i].exp();
            prev[i] = 0.0;
            cur[i] = 1.0;
        }
        let fold = if mp == 0 { 1.0 } else { 2.0 };
        for l in mp..=l_max {
            if l > mp {
                let lf = l as f64;
                let a;
                let b;
                if l == mp + 1 {
                    a = (2.0 * mf + 3.0).sqrt();
                    b = 0.0;
                } else {
                    a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
                    b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0)).sqrt();
                }
                for i in 0..nn {
                    let next = a * (xs[i] * cur[i] - b * prev[i]);
                    prev[i] = cur[i];
                    cur[i] = next;
                    if next.abs() > BIG {
                        prev[i] /= BIG;
                        cur[i] /= BIG;
                        ln_scale[i] += BIG.ln();
                        scale[i] = ln_scale[i].exp();
                    }
                }
            }
            let mut a_lm = C::new(0.0, 0.0);
            for i in 0..nn {
                a_lm += acc_w[i] * (cur[i] * scale[i]);
            }
            norms[l] += fold * a_lm.norm_sqr();
        }
    }
    Ok(WeightNorms {
        kind: FactorKind::Complex,
        norms,
        total,
    })
}

/// `M_f(s)` with the truncation actually used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MfValue {
    pub s: f64,
    pub value: f64,
    pub m_max: usize,
    pub tail_bound: f64,
}

/// `M_f(s) = (Σ_m P_m(s) ‖ψ_m‖²) |∫ v(t) e^{-st} dt|²` for `s ∈ (½, 1]`.
pub fn mf_eval(f: &TestFunction, s: f64) -> Result<MfValue> {
    let w = weight_norms(f, default_weight_tol(f))?;
    mf_with_weights(f, &w, s)
}

/// As [`mf_eval`] with precomputed weight norms.
pub fn mf_with_weights(f: &TestFunction, w: &WeightNorms, s: f64) -> Result<MfValue> {
    if !(s > 0.5 && s <= 1.0) {
        return Err(Error::InvalidInput("M_f(s) needs s in (1/2, 1]"));
    }
    let (head, tail) = w.weighted_sum(C::new(s, 0.0))?;
    let lap = f.v.laplace(C::new(s, 0.0)).norm_sqr() * f.scale * f.scale;
    if tail > WEIGHT_TAIL_TOL * head.re.abs() {
        return Err(Error::TruncationFailure { tail, head: head.re });
    }
    Ok(MfValue {
        s,
        value: head.re * lap,
        m_max: w.m_max(),
        tail_bound: tail * lap,
    })
}

/// `M_f(s)` with `P_m(s)` replaced by its size `(m+1)^{-μ(2s-1)}`; at
/// `s = 1` this keeps the `m ≠ 0` terms that `P_m(1) = 0` kills.
pub fn mf_surrogate(f: &TestFunction, w: &WeightNorms, s: f64) -> f64 {
    let e = w.kind.mu_f64() * (2.0 * s - 1.0);
    let head: f64 = w
        .norms
        .iter()
        .enumerate()
        .map(|(m, x)| x * ((m + 1) as f64).powf(-e))
        .sum();
    head * f.v.laplace(C::new(s, 0.0)).norm_sqr() * f.scale * f.scale
}

/// `M̃(λ, s) = λ^{2s(3+ε)} Σ_m ‖ψ_m‖² (m+1)^{2-4s}` for the complex family.
pub fn mtilde(lambda: f64, eps: f64, w: &WeightNorms, s: f64) -> f64 {
    let sum: f64 = w
        .norms
        .iter()
        .enumerate()
        .map(|(m, x)| x * ((m + 1) as f64).powf(2.0 - 4.0 * s))
        .sum();
    lambda.powf(2.0 * s * (3.0 + eps)) * sum
}

/// One pole contribution `c0 · c_j · M_f(s_j)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoleTerm {
    pub s: f64,
    pub residue: f64,
    pub contribution: f64,
}

/// Itemized spectral evaluation of `‖Θ_f‖²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralNormReport {
    /// `c0 ‖ψ‖² ∫|v̂(r - i/2)|² dr`, evaluated as `c0 ‖f‖₂²`.
    pub l2_term: f64,
    /// `c0 Σ_m ‖ψ_m‖² ∫ v̂(r - i/2)² C(½+ir) P_m(½+ir) dr`.
    pub cross_term: Complex64,
    pub pole_terms: Vec<PoleTerm>,
    pub total: f64,
    /// Lower and upper bounds assembled from `‖f‖₁`, `‖f‖₂` and `M_f`.
    pub bracketing: (f64, f64),
    /// Plancherel check: `∫|v̂(r - i/2)|² dr` over the truncated line.
    pub plancherel_line: f64,
    pub line_radius: f64,
    pub line_panels: usize,
    /// Change of the cross term under the last panel doubling.
    pub line_refine_change: f64,
    pub m_max: usize,
    pub weight_tail: f64,
}

/// Largest `|r|` used on the critical line; `ζ` is evaluated up to height
/// `2 LINE_R_CAP`, and `|v̂(r - i/2)|²` is far below double precision there
/// for every cut-off in use.
pub const LINE_R_CAP: f64 = 100.0;

/// `∫_{-R}^{R} F(r) dr` on a Gauss–Legendre grid, doubling the panel count
/// until two passes agree to `tol` (absolute).
fn line_integral<F: FnMut(f64) -> C>(r_max: f64, panels0: usize, tol: f64, mut f: F) -> Result<(C, usize, f64)> {
    let rule = Rule::new(20);
    let eval = |panels: usize, f: &mut F| -> C {
        let half = rule.grid(0.0, r_max, panels);
        let mut acc = C::new(0.0, 0.0);
        for &(r, w) in &half {
            acc += (f(r) + f(-r)) * w;
        }
        acc
    };
    let mut panels = panels0.max(4);
    let mut prev = eval(panels, &mut f);
    for _ in 0..8 {
        panels *= 2;
        let cur = eval(panels, &mut f);
        let change = (cur - prev).norm();
        if change <= tol {
            return Ok((cur, panels, change));
        }
        prev = cur;
    }
    Err(Error::QuadratureBudgetExceeded)
}

/// The spectral expression for `‖Θ_f‖²` on lattice `l`.
pub fn spectral_theta_norm(f: &TestFunction, sc: &ScatteringEvaluator, l: &LatticeSpec) -> Result<SpectralNormReport> {
    if sc.lattice != l.kind {
        return Err(Error::InvalidInput("scattering evaluator built for another lattice"));
    }
    if f.case() != l.mu {
        return Err(Error::InvalidInput("test function and lattice have different factor kinds"));
    }
    let c0 = l.c0;
    let w = weight_norms(f, default_weight_tol(f))?;
    let scale2 = f.scale * f.scale;
    let a_plancherel = f.v.l2_weighted();
    let l2_term = c0 * scale2 * a_plancherel * w.total;

    let r_max = truncation_radius(&f.v, 1e-13).min(LINE_R_CAP);
    let tab = f.v.vhat_table(0.5, r_max);
    let len = f.v.b - f.v.a;
    let panels0 = (r_max * len / 4.0).ceil() as usize + 8;
    let tol = 1e-10 * a_plancherel * w.total;
    let mut err = None;
    let (cross, line_panels, change) = line_integral(r_max, panels0, tol, |r| {
        let s = C::new(0.5, r);
        let vh = tab.eval(r);
        let c = match sc.eval(s) {
            Ok(c) => c,
            Err(e) => {
                err = Some(e);
                return C::new(0.0, 0.0);
            }
        };
        let (ps, _) = w.weighted_sum(s).unwrap_or((C::new(0.0, 0.0), 0.0));
        vh * vh * c * ps
    })?;
    if let Some(e) = err {
        return Err(e);
    }
    let (plancherel_line, _, _) = line_integral(r_max, panels0, 1e-12 * a_plancherel, |r| C::new(tab.eval(r).norm_sqr(), 0.0))?;
    let cross_term = cross * (c0 * scale2);

    let mut pole_terms = Vec::with_capacity(sc.poles.len());
    let mut exceptional = 0.0;
    for p in &sc.poles {
        let s = C::new(p.s, 0.0);
        let (ps, _) = w.weighted_sum(s)?;
        let lap = f.v.laplace(s).norm_sqr();
        let contribution = c0 * p.residue * ps.re * lap * scale2;
        if p.s < 1.0 {
            exceptional += contribution;
        }
        pole_terms.push(PoleTerm {
            s: p.s,
            residue: p.residue,
            contribution,
        });
    }
    let poles: f64 = pole_terms.iter().map(|p| p.contribution).sum();
    let total = l2_term + cross_term.re + poles;

    // Bounds from independently computed norms.
    let (l1, l2sq) = if f.is_positive() {
        (f.l1_norm(), f.l2_norm_sq())
    } else {
        (f.integral().abs(), f.l2_norm_sq())
    };
    let lower = c0 * c0 * l1 * l1 + exceptional;
    let upper = 2.0 * c0 * l2sq + c0 * c0 * l1 * l1 + exceptional;
    let slack = 1e-7 * upper;
    if total < lower - slack || total > upper + slack {
        return Err(Error::BracketViolation {
            lower,
            value: total,
            upper,
        });
    }
    Ok(SpectralNormReport {
        l2_term,
        cross_term,
        pole_terms,
        total,
        bracketing: (lower, upper),
        plancherel_line: plancherel_line.re,
        line_radius: r_max,
        line_panels,
        line_refine_change: change,
        m_max: w.m_max(),
        weight_tail: w.tail(),
    })
}

/// Residuals of the raising/lowering and Casimir identities at random
/// points of `N\G ≅ R² \ 0` (real) or `C² \ 0` (complex).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub case: FactorKind,
    pub s: Complex64,
    pub m: i64,
    pub n_points: usize,
    /// Real: max relative residual of `a^± φ_{s,m} + 2(s ± m) φ_{s,m±1}`.
    pub raising_residual: f64,
    pub lowering_residual: f64,
    /// Complex: mean of `a^+ φ_{s,m} / ((2s+m) φ_{s,m+1})` and its
    /// relative spread over points.
    pub kappa: Complex64,
    pub kappa_spread: f64,
    /// Complex: mean of `Ω φ_{s,m} / φ_{s,m}` and its relative spread.
    pub casimir: Complex64,
    pub casimir_spread: f64,
}

/// `φ_{s,m}(x) = (x₁ + i x₂)^{2m} / (x₁² + x₂²)^{s+m}`.
fn phi_real(s: C, m: i64, x1: f64, x2: f64) -> C {
    let z = C::new(x1, x2);
    let r2 = x1 * x1 + x2 * x2;
    z.powi(2 * m as i32) * C::new(r2, 0.0).powc(-(s + m as f64))
}

/// `φ_{s,m}(z) = (z₁ z̄₂)^m / (|z₁|² + |z₂|²)^{2s+m}`.
fn phi_complex(s: C, m: i64, z: [C; 2]) -> C {
    let r2 = z[0].norm_sqr() + z[1].norm_sqr();
    (z[0] * z[1].conj()).powi(m as i32) * C::new(r2, 0.0).powc(-(s * 2.0 + m as f64))
}

/// Fourth-order central difference.
fn d4<F: Fn(f64) -> C>(f: F, h: f64) -> C {
    (f(-2.0 * h) - f(-h) * 8.0 + f(h) * 8.0 - f(2.0 * h)) / (12.0 * h)
}

/// Check the operator identities by finite differences with step `h`.
pub fn operator_identity_check<R: RngCore + ?Sized>(
    s: C,
    m: i64,
    case: FactorKind,
    n_points: usize,
    h: f64,
    rng: &mut R,
) -> Result<IdentityReport> {
    if !(h >= 1e-7) || h > 0.1 {
        return Err(Error::StepSizeUnderflow);
    }
    if n_points == 0 {
        return Err(Error::InvalidInput("need at least one point"));
    }
    let mut rep = IdentityReport {
        case,
        s,
        m,
        n_points,
        raising_residual: 0.0,
        lowering_residual: 0.0,
        kappa: C::new(0.0, 0.0),
        kappa_spread: 0.0,
        casimir: C::new(0.0, 0.0),
        casimir_spread: 0.0,
    };
    let i = C::new(0.0, 1.0);
    match case {
        FactorKind::Real => {
            for _ in 0..n_points {
                let r = uniform_range(rng, 0.5, 2.0);
                let th = uniform_range(rng, 0.0, 2.0 * PI);
                let (x1, x2) = (r * th.cos(), r * th.sin());
                let d1 = d4(|e| phi_real(s, m, x1 + e, x2), h);
                let d2 = d4(|e| phi_real(s, m, x1, x2 + e), h);
                let euler = d1 * x1 - d2 * x2;
                let rot = d2 * x1 + d1 * x2;
                let up = euler + i * rot;
                let down = euler - i * rot;
                let up_ref = phi_real(s, m + 1, x1, x2) * (-(s + m as f64) * 2.0);
                let down_ref = phi_real(s, m - 1, x1, x2) * (-(s - m as f64) * 2.0);
                rep.raising_residual = rep.raising_residual.max((up - up_ref).norm() / up_ref.norm().max(1e-300));
                if down_ref.norm() > 0.0 {
                    rep.lowering_residual =
                        rep.lowering_residual.max((down - down_ref).norm() / down_ref.norm());
                } else {
                    rep.lowering_residual = rep.lowering_residual.max(down.norm());
                }
            }
        }
        FactorKind::Complex => {
            if m < 0 {
                return Err(Error::InvalidInput("complex weights are nonnegative"));
            }
            let mut kappas = Vec::with_capacity(n_points);
            let mut cas = Vec::with_capacity(n_points);
            for _ in 0..n_points {
                let mut z = [C::new(0.0, 0.0); 2];
                loop {
                    for zj in z.iter_mut() {
                        *zj = C::new(uniform_range(rng, -1.5, 1.5), uniform_range(rng, -1.5, 1.5));
                    }
                    let n = z[0].norm_sqr() + z[1].norm_sqr();
                    if n > 0.25 && z[0].norm() > 0.2 && z[1].norm() > 0.2 {
                        break;
                    }
                }
                let f = |z: [C; 2]| phi_complex(s, m, z);
                // ∂/∂z₂ = ½(∂_x - i ∂_y)
                let dz2 = |g: &dyn Fn([C; 2]) -> C, z: [C; 2]| {
                    let dx = d4(|e| g([z[0], z[1] + e]), h);
                    let dy = d4(|e| g([z[0], z[1] + i * e]), h);
                    (dx - i * dy) * 0.5
                };
                let up = z[0] * dz2(&f, z);
                let ratio = up / (phi_complex(s, m + 1, z) * (s * 2.0 + m as f64));
                kappas.push(ratio);
                // E = z̄₁ ∂/∂z̄₁ + z̄₂ ∂/∂z̄₂, ∂/∂z̄ = ½(∂_x + i ∂_y)
                let euler = |g: &dyn Fn([C; 2]) -> C, z: [C; 2]| -> C {
                    let mut acc = C::new(0.0, 0.0);
                    for j in 0..2 {
                        let shift = |e: C| {
                            let mut w = z;
                            w[j] += e;
                            g(w)
                        };
                        let dx = d4(|e| shift(C::new(e, 0.0)), h);
                        let dy = d4(|e| shift(C::new(0.0, e)), h);
                        acc += z[j].conj() * (dx + i * dy) * 0.5;
                    }
                    acc
                };
                let ef = |w: [C; 2]| euler(&f, w);
                let omega = euler(&ef, z) + ef(z) * 2.0;
                cas.push(omega / f(z));
            }
            let spread = |xs: &[C]| -> (C, f64) {
                let mean = xs.iter().sum::<C>() / xs.len() as f64;
                let dev = xs.iter().map(|x| (x - mean).norm()).fold(0.0, f64::max);
                (mean, dev / mean.norm().max(1e-300))
            };
            (rep.kappa, rep.kappa_spread) = spread(&kappas);
            (rep.casimir, rep.casimir_spread) = spread(&cas);
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::ScatteringEvaluator;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(x: f64) -> C {
        C::new(x, 0.0)
    }

    #[test]
    fn pm_examples() {
        let r = [FactorKind::Real];
        assert_eq!(pm_eval(&WeightIndex(alloc::vec![0]), c(0.3), &r).unwrap(), c(1.0));
        let p = pm_eval(&WeightIndex(alloc::vec![1]), c(0.75), &r).unwrap();
        assert!((p - c(1.0 / 3.0)).norm() < 1e-15);
        for m in [1, 2, 7, 60] {
            assert_eq!(pm_eval(&WeightIndex(alloc::vec![m]), c(1.0), &r).unwrap().norm(), 0.0);
            let cm = [FactorKind::Complex];
            assert_eq!(pm_eval(&WeightIndex(alloc::vec![m]), c(1.0), &cm).unwrap().norm(), 0.0);
        }
        assert_eq!(
            pm_eval(&WeightIndex(alloc::vec![2]), c(0.0), &r),
            Err(Error::PoleInDenominator)
        );
    }

    #[test]
    fn pm_log_path_matches_recursion() {
        let s = C::new(0.7, 3.0);
        let series = pm_series(80, s, FactorKind::Complex).unwrap();
        let direct = pm_eval(&WeightIndex(alloc::vec![80]), s, &[FactorKind::Complex]).unwrap();
        assert!((series[80] - direct).norm() < 1e-12 * direct.norm());
    }

    #[test]
    fn pm_asymptotic_bands() {
        let (lo, hi) = pm_asymptotic_check(0.75, 10_000, FactorKind::Real).unwrap();
        assert!(lo > 0.1 && hi < 10.0, "{lo} {hi}");
        let (lo, hi) = pm_asymptotic_check(0.6, 1000, FactorKind::Complex).unwrap();
        assert!(lo > 0.05 && hi < 20.0, "{lo} {hi}");
        assert_eq!(pm_asymptotic_check(0.5, 50, FactorKind::Real).unwrap(), (1.0, 1.0));
    }

    #[test]
    fn su2_norms_simple_cases() {
        let w = su2_projection_norms(&Psi::Constant, 5).unwrap();
        assert_eq!(w.norms[0], 1.0);
        assert!(w.norms[1..].iter().all(|&x| x == 0.0));
        // cos Θ is the weight-0 vector of the 3-dimensional representation.
        let w = su2_projection_norms(&Psi::ComplexZonal { a0: 0.0, a1: 3f64.sqrt() }, 6).unwrap();
        assert!((w.norms[1] - 1.0).abs() < 1e-12, "{:?}", w.norms);
        assert!(w.norms[0].abs() < 1e-20 && w.norms[2..].iter().all(|&x| x < 1e-20));
    }

    #[test]
    fn su2_norms_parseval_for_bump() {
        for lambda in [2.0, 4.0] {
            let f = TestFunction::complex_family(lambda, 0.2).unwrap();
            let w = weight_norms(&f, 1e-7).unwrap();
            assert!(w.tail() <= 1e-7 * w.total, "λ={lambda}: {} of {}", w.tail(), w.total);
        }
    }

    #[test]
    fn mf_spherical_is_one_term() {
        let f = TestFunction::spherical(-3.0, 0.0, FactorKind::Real).unwrap();
        let m = mf_eval(&f, 0.8).unwrap();
        let lap = f.v.laplace(c(0.8)).re;
        assert!((m.value - lap * lap).abs() < 1e-12 * m.value);
    }

    #[test]
    fn spectral_norm_spherical_pole_term() {
        let f = TestFunction::spherical(-3.0, 0.0, FactorKind::Real).unwrap();
        let l = LatticeSpec::modular();
        let rep = spectral_theta_norm(&f, &ScatteringEvaluator::modular(), &l).unwrap();
        let l1 = f.l1_norm();
        assert!((rep.pole_terms[0].contribution - l.c0 * l.c0 * l1 * l1).abs() < 1e-10 * rep.total);
        assert!(rep.cross_term.norm() <= rep.l2_term * (1.0 + 1e-9));
        assert!(rep.cross_term.im.abs() < 1e-9 * rep.total);
        assert!((rep.plancherel_line - f.v.l2_weighted()).abs() < 1e-8 * rep.plancherel_line);
    }

    #[test]
    fn real_operator_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for m in 0..4 {
            let r = operator_identity_check(c(0.7), m, FactorKind::Real, 50, 1e-3, &mut rng).unwrap();
            assert!(r.raising_residual < 1e-6 && r.lowering_residual < 1e-6, "{r:?}");
        }
    }

    #[test]
    fn complex_operator_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = operator_identity_check(c(0.6), 1, FactorKind::Complex, 30, 1e-3, &mut rng).unwrap();
        let b = operator_identity_check(c(0.8), 1, FactorKind::Complex, 30, 1e-3, &mut rng).unwrap();
        assert!(a.kappa_spread < 1e-6 && b.kappa_spread < 1e-6);
        assert!((a.kappa - b.kappa).norm() < 1e-6);
        let s = 0.7;
        let r = operator_identity_check(c(s), 1, FactorKind::Complex, 30, 1e-3, &mut rng).unwrap();
        assert!(r.casimir_spread < 1e-6);
        // The displayed operator gives 4s(s-1).
        assert!((r.casimir - c(4.0 * s * (s - 1.0))).norm() < 1e-6, "{:?}", r.casimir);
    }

    #[test]
    fn step_guard() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(
            operator_identity_check(c(0.7), 0, FactorKind::Real, 1, 1e-12, &mut rng),
            Err(Error::StepSizeUnderflow)
        );
    }
}
