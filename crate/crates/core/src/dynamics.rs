//! Cusp excursions of the unipotent flow `u_s = n⁻_{s y}` on `Γ\G`: orbit
//! records for the logarithm law, shrinking-target hit counts, and the sets
//! `D_k ⊂ Q\G`, `Y_{D_k} ⊂ Γ\G` with Monte Carlo estimates of their measures.
//!
//! Only rank-one groups are simulated, so `y = (1)` and `t_n = μ t`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use rand_core::RngCore;
use serde::{Deserialize, Serialize};

use crate::group::{iwasawa_decompose, Compact, Factor, FactorKind, FlowDirection, GroupPoint, Mat2};
use crate::lattice::{delta_from_height, haar_sample, reduce_complex, reduce_real, LatticeKind, LatticeSpec};
use crate::rng::{truncated_exp, uniform, uniform_range};
use crate::stats::{Accumulator, McEstimate};
use crate::{Error, Result};

/// Shrinking radii `r_ℓ = (1 + sign·ε) log ℓ + shift` and the window rule
/// `p(k) = p_mult · k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetSchedule {
    pub eps: f64,
    /// `+1` (summable `e^{-r_ℓ}`) or `-1` (divergent).
    pub sign: i8,
    pub p_mult: u64,
    /// Constant added to every radius; `+∞` gives the empty target.
    #[serde(default)]
    pub shift: f64,
}

impl TargetSchedule {
    pub fn new(eps: f64, sign: i8) -> Result<Self> {
        Self::with_window(eps, sign, 2)
    }

    pub fn with_window(eps: f64, sign: i8, p_mult: u64) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::InvalidInput("TargetSchedule: eps must lie in (0, 1)"));
        }
        if sign != 1 && sign != -1 {
            return Err(Error::InvalidInput("TargetSchedule: sign must be +1 or -1"));
        }
        if p_mult < 2 {
            return Err(Error::InvalidInput("TargetSchedule: p(k) = p_mult k needs p_mult >= 2"));
        }
        Ok(TargetSchedule {
            eps,
            sign,
            p_mult,
            shift: 0.0,
        })
    }

    pub fn shifted(mut self, shift: f64) -> Self {
        self.shift = shift;
        self
    }

    #[inline]
    pub fn r(&self, l: u64) -> f64 {
        (1.0 + self.sign as f64 * self.eps) * (l as f64).ln() + self.shift
    }

    pub fn p(&self, k: u64) -> u64 {
        self.p_mult * k
    }

    /// `Σ_{ℓ=k}^{p(k)} e^{-r_ℓ}`.
    pub fn window_mass(&self, k: u64) -> f64 {
        (k..=self.p(k)).map(|l| (-self.r(l)).exp()).sum()
    }
}

/// `Δ(x0 u_s)` sampled along an orbit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcursionRecord {
    pub times: Vec<f64>,
    pub deltas: Vec<f64>,
    /// `max_{s' ≤ s, s' ≥ s_min} Δ(s') / log s'`, 0 before `s_min`.
    pub running_max_ratio: Vec<f64>,
}

impl ExcursionRecord {
    pub fn final_ratio(&self) -> f64 {
        self.running_max_ratio.last().copied().unwrap_or(0.0)
    }
}

/// Ratios `Δ / log s` are only formed from this time on.
pub const RATIO_START: f64 = 10.0;

#[inline]
fn factor_times_u(f: &Factor, s: f64) -> Factor {
    match *f {
        Factor::Real(m) => Factor::Real(Mat2::new(m.a + m.b * s, m.b, m.c + m.d * s, m.d)),
        Factor::Complex(m) => Factor::Complex(Mat2::new(m.a + m.b * s, m.b, m.c + m.d * s, m.d)),
    }
}

/// `Δ` of one factor, reducing from scratch.
pub fn factor_delta(f: &Factor, l: &LatticeSpec) -> Result<f64> {
    let height = match (l.kind, f) {
        (LatticeKind::ModularZ, Factor::Real(m)) => {
            let (r, _) = reduce_real(m)?;
            1.0 / (r.c * r.c + r.d * r.d)
        }
        (LatticeKind::BianchiZi, Factor::Complex(m)) => {
            let (r, _) = reduce_complex(m)?;
            1.0 / (r.c.norm_sqr() + r.d.norm_sqr())
        }
        _ => return Err(Error::UnsupportedLattice),
    };
    Ok(delta_from_height(height, l))
}

fn start_factor(x0: &GroupPoint, l: &LatticeSpec, flow: &FlowDirection) -> Result<(Factor, f64)> {
    if x0.len() != 1 || flow.as_slice().len() != 1 {
        return Err(Error::InvalidInput("orbits are simulated on rank-one groups"));
    }
    let f = x0.factors()[0];
    if f.kind() != l.mu {
        return Err(Error::InvalidInput("group point does not match the lattice"));
    }
    Ok((f, flow.as_slice()[0]))
}

/// Call `visit(s, Δ(x0 u_s))` for `s = stride, 2 stride, …, ≤ horizon`.
pub fn for_each_orbit_delta<F: FnMut(f64, f64)>(
    x0: &GroupPoint,
    l: &LatticeSpec,
    flow: &FlowDirection,
    horizon: f64,
    stride: f64,
    mut visit: F,
) -> Result<()> {
    let (f, y) = start_factor(x0, l, flow)?;
    if !(stride > 0.0) || !horizon.is_finite() {
        return Err(Error::InvalidInput("stride must be positive and horizon finite"));
    }
    let n = (horizon / stride).floor() as u64;
    for i in 1..=n {
        let s = i as f64 * stride;
        visit(s, factor_delta(&factor_times_u(&f, s * y), l)?);
    }
    Ok(())
}

/// Sample `Δ(x0 u_s)` at `s = stride, 2·stride, …` up to `horizon`. The
/// integer-time record (`stride ≥ 1`) is the primary mode; a fractional
/// stride gives a dense-time trace for diagnostics.
pub fn simulate_orbit(
    x0: &GroupPoint,
    l: &LatticeSpec,
    flow: &FlowDirection,
    horizon: f64,
    stride: f64,
) -> Result<ExcursionRecord> {
    if horizon < 10.0 {
        return Err(Error::InvalidInput("horizon must be at least 10"));
    }
    let mut rec = ExcursionRecord {
        times: Vec::new(),
        deltas: Vec::new(),
        running_max_ratio: Vec::new(),
    };
    let mut best: f64 = 0.0;
    for_each_orbit_delta(x0, l, flow, horizon, stride, |s, d| {
        if s >= RATIO_START {
            best = best.max(d / s.ln());
        }
        rec.times.push(s);
        rec.deltas.push(d);
        rec.running_max_ratio.push(best);
    })?;
    Ok(rec)
}

/// Default start of the ratio window for [`orbit_max_ratio`]: `√T`.
///
/// Early times carry an `O(1)/log s` bias that dominates at desk-scale
/// horizons, so the tail `[√T, T]` is used as the lim sup proxy.
pub fn default_ratio_start(horizon: f64) -> f64 {
    horizon.sqrt().max(RATIO_START)
}

/// `max_{s_min ≤ s ≤ horizon} Δ(x0 u_s)/log s` at integer times, without
/// storing the trace.
pub fn orbit_max_ratio(
    x0: &GroupPoint,
    l: &LatticeSpec,
    flow: &FlowDirection,
    horizon: f64,
    s_min: f64,
) -> Result<f64> {
    if !(s_min > 1.0 && s_min < horizon) {
        return Err(Error::InvalidInput("ratio window start must lie in (1, horizon)"));
    }
    let mut best: f64 = 0.0;
    for_each_orbit_delta(x0, l, flow, horizon, 1.0, |s, d| {
        if s >= s_min {
            best = best.max(d / s.ln());
        }
    })?;
    Ok(best)
}

/// `{ℓ ≤ L_max : Δ(x0 u_ℓ) ≥ r_ℓ}`, `ℓ ≥ 2` (`r_1 = 0` is always hit).
pub fn shrinking_target_count(
    x0: &GroupPoint,
    l: &LatticeSpec,
    flow: &FlowDirection,
    schedule: &TargetSchedule,
    l_max: u64,
) -> Result<Vec<u64>> {
    if l_max < 10 {
        return Err(Error::InvalidInput("L_max must be at least 10"));
    }
    let mut hits = Vec::new();
    for_each_orbit_delta(x0, l, flow, l_max as f64, 1.0, |s, d| {
        let ell = s as u64;
        if ell >= 2 && d >= schedule.r(ell) {
            hits.push(ell);
        }
    })?;
    Ok(hits)
}

/// `D_k = Q\ ∪_{ℓ=k}^{p(k)} Q A¹(r_ℓ) K u_{-ℓ}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DkSpec {
    pub k: u64,
    pub schedule: TargetSchedule,
    pub lattice: LatticeSpec,
    pub flow: FlowDirection,
}

impl DkSpec {
    pub fn new(k: u64, schedule: TargetSchedule, lattice: LatticeSpec) -> Result<Self> {
        if k < 1 {
            return Err(Error::InvalidInput("DkSpec: k must be at least 1"));
        }
        Ok(DkSpec {
            k,
            schedule,
            lattice,
            flow: FlowDirection::ones(1),
        })
    }

    fn ells(&self) -> core::ops::RangeInclusive<u64> {
        self.k..=self.schedule.p(self.k)
    }

    fn y(&self) -> f64 {
        self.flow.as_slice()[0]
    }
}

/// A point `Q a_{η t_n} k` of `Q\G`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QgPoint {
    pub tn: f64,
    pub k: Compact,
}

impl QgPoint {
    /// Coordinates of `Q g`.
    pub fn from_group(g: &GroupPoint) -> Self {
        let c = iwasawa_decompose(g).factors[0];
        QgPoint {
            tn: c.kind().mu_f64() * c.t,
            k: c.k,
        }
    }
}

/// `‖(0, 1) k u_s‖²`.
#[inline]
fn row_norm_after(k: &Compact, s: f64) -> f64 {
    match *k {
        Compact::Real { theta } => {
            let (sn, cs) = theta.sin_cos();
            let (c, d) = (-sn + cs * s, cs);
            c * c + d * d
        }
        Compact::Complex { theta, alpha, beta } => {
            let m = Compact::complex_matrix(theta, alpha, beta);
            let (c, d) = (m.c + m.d * s, m.d);
            c.norm_sqr() + d.norm_sqr()
        }
    }
}

/// `t_n` of `a_{η t_n} k u_ℓ`.
#[inline]
pub fn tn_after(p: &QgPoint, s: f64) -> f64 {
    p.tn - p.k.kind().mu_f64() * row_norm_after(&p.k, s).ln()
}

/// Smallest `ℓ ∈ [k, p(k)]` with `t_n(a k u_ℓ) ≥ r_ℓ`.
pub fn dk_witness(p: &QgPoint, spec: &DkSpec) -> Option<u64> {
    let y = spec.y();
    spec.ells().find(|&l| tn_after(p, l as f64 * y) >= spec.schedule.r(l))
}

pub fn dk_membership(p: &QgPoint, spec: &DkSpec) -> bool {
    dk_witness(p, spec).is_some()
}

/// `min_ℓ (r_ℓ + μ log ‖(0,1) k u_ℓ‖²)`: the threshold in `t_n` above which
/// `(t_n, k)` lies in `D_k`.
pub fn dk_threshold(k: &Compact, spec: &DkSpec) -> f64 {
    let mu = k.kind().mu_f64();
    let y = spec.y();
    spec.ells()
        .map(|l| spec.schedule.r(l) + mu * row_norm_after(k, l as f64 * y).ln())
        .fold(f64::INFINITY, f64::min)
}

/// Largest drop of `t_n` under right multiplication by `B⁻ = {n⁻_x : |x| < 1}`,
/// maximized over a grid of `k`: `t_n(a k b) ≥ t_n(a k) - c`. With it,
/// `Q A¹(τ + c) B⁻ ⊆ Q A¹(τ) K`.
pub fn affine_constant(kind: FactorKind) -> f64 {
    let mu = kind.mu_f64();
    let n = 256;
    let mut worst: f64 = 0.0;
    for i in 0..n {
        let th = PI * i as f64 / n as f64;
        for j in 0..=n {
            let x = -1.0 + 2.0 * j as f64 / n as f64;
            let (sn, cs) = th.sin_cos();
            // bottom row of k_θ n⁻_x; for SU(2) the phases only rotate x,
            // which the sweep over x ∈ [-1, 1] and θ ∈ [0, π) covers.
            let (c, d) = (-sn + cs * x, cs);
            worst = worst.max(mu * (c * c + d * d).ln());
        }
    }
    worst
}

/// A point of `D̃_k`: `t_n ≥ r_ℓ + c` and `x = -ℓ y + z`, `|z| ≤ 1`,
/// returned in `Q\G` coordinates with its `ℓ`.
pub fn sample_dk_tilde<R: RngCore + ?Sized>(spec: &DkSpec, c: f64, rng: &mut R) -> (QgPoint, u64) {
    let (lo, hi) = (spec.k, spec.schedule.p(spec.k));
    let l = lo + (uniform(rng) * (hi - lo + 1) as f64) as u64;
    let l = l.min(hi);
    let tn = spec.schedule.r(l) + c + 3.0 * uniform(rng);
    let mu = spec.lattice.mu_f64();
    let t = tn / mu;
    let (e, ei) = ((0.5 * t).exp(), (-0.5 * t).exp());
    let x0 = -(l as f64) * spec.y();
    let g = match spec.lattice.mu {
        FactorKind::Real => {
            let x = x0 + uniform_range(rng, -1.0, 1.0);
            GroupPoint::real(Mat2::new(e, 0.0, x * ei, ei))
        }
        FactorKind::Complex => {
            let (r, a) = (uniform(rng).sqrt(), uniform_range(rng, 0.0, 2.0 * PI));
            let x = Complex64::new(x0, 0.0) + Complex64::from_polar(r, a);
            let z = Complex64::new(0.0, 0.0);
            GroupPoint::complex(Mat2::new(Complex64::new(e, 0.0), z, x * ei, Complex64::new(ei, 0.0)))
        }
    }
    .expect("unit determinant");
    (QgPoint::from_group(&g), l)
}

/// Draw `k` from the mixture `(1/L) Σ_ℓ ‖(0,1) k u_ℓ‖^{-2μ} dk` (each term
/// is a probability density) and return it with the mixture density.
fn sample_k_mixture<R: RngCore + ?Sized>(spec: &DkSpec, rng: &mut R) -> (Compact, f64) {
    let (lo, hi) = (spec.k, spec.schedule.p(spec.k));
    let l = (lo + (uniform(rng) * (hi - lo + 1) as f64) as u64).min(hi);
    let s = l as f64 * spec.y();
    // If the row w is Haar-distributed, the row of w u_{-s}, normalized, has
    // density ‖· u_s‖^{-2μ}.
    let k = match spec.lattice.mu {
        FactorKind::Real => {
            let th = uniform_range(rng, 0.0, 2.0 * PI);
            let (c, d) = (-th.sin(), th.cos());
            Compact::from_bottom_row_real(c - d * s, d)
        }
        FactorKind::Complex => {
            let Compact::Complex { theta, alpha, beta } = crate::lattice::sample_su2(rng) else {
                unreachable!()
            };
            let m = Compact::complex_matrix(theta, alpha, beta);
            Compact::from_bottom_row_complex(m.c - m.d * s, m.d)
        }
    };
    let mu = spec.lattice.mu_f64();
    let y = spec.y();
    let q = spec
        .ells()
        .map(|l| row_norm_after(&k, l as f64 * y).powf(-mu))
        .sum::<f64>()
        / (hi - lo + 1) as f64;
    (k, q)
}

/// Lower end of the `t_n` proposal: no point of `D_k` lies below it.
pub fn dk_t_floor(spec: &DkSpec) -> f64 {
    let mu = spec.lattice.mu_f64();
    spec.ells()
        .map(|l| {
            let s = l as f64 * spec.y();
            // smallest eigenvalue of u_s u_s^*: ‖(0,1)k u_s‖² ≥ λ_min
            let tr = s * s + 2.0;
            let lmin = 2.0 / (tr + (tr * tr - 4.0).max(0.0).sqrt());
            spec.schedule.r(l) + mu * lmin.ln()
        })
        .fold(f64::INFINITY, f64::min)
        - 1e-9
}

/// Importance weights of a `measure_dk` run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct DkAcc {
    pub acc: Accumulator,
    pub hits: u64,
    pub sum_w: f64,
    pub sum_w2: f64,
}

impl DkAcc {
    pub fn merge(&self, o: &DkAcc) -> DkAcc {
        DkAcc {
            acc: self.acc.merge(&o.acc),
            hits: self.hits + o.hits,
            sum_w: self.sum_w + o.sum_w,
            sum_w2: self.sum_w2 + o.sum_w2,
        }
    }

    /// Kish effective sample size of the nonzero weights.
    pub fn ess(&self) -> f64 {
        if self.sum_w2 == 0.0 {
            0.0
        } else {
            self.sum_w * self.sum_w / self.sum_w2
        }
    }

    /// Fails with [`Error::ProposalMismatch`] if fewer than 1‰ of draws
    /// (or fewer than 20) carry weight.
    pub fn check(&self) -> Result<()> {
        let n = self.acc.n as f64;
        if self.ess() < (1e-3 * n).max(20.0) {
            return Err(Error::ProposalMismatch);
        }
        Ok(())
    }
}

/// `n` importance samples of `|D_k|` under `e^{-t_n} dt_n dk`: `k` from the
/// mixture of the per-`ℓ` row densities, `t_n - t_floor` exponential.
pub fn measure_dk_acc<R: RngCore + ?Sized>(spec: &DkSpec, n: u64, rng: &mut R) -> DkAcc {
    let t0 = dk_t_floor(spec);
    let z = (-t0).exp();
    let mut out = DkAcc::default();
    for _ in 0..n {
        let (k, q) = sample_k_mixture(spec, rng);
        let tn = truncated_exp(rng, t0, f64::INFINITY);
        let p = QgPoint { tn, k };
        let w = if dk_membership(&p, spec) { z / q } else { 0.0 };
        if w > 0.0 {
            out.hits += 1;
            out.sum_w += w;
            out.sum_w2 += w * w;
        }
        out.acc.push(w);
    }
    out
}

pub fn measure_dk<R: RngCore + ?Sized>(spec: &DkSpec, n_samples: u64, seed: u64, rng: &mut R) -> Result<McEstimate> {
    let a = measure_dk_acc(spec, n_samples, rng);
    a.check()?;
    Ok(a.acc.estimate(seed))
}

/// `|D_k|` with the `t_n` integral done exactly: `E_k[e^{-τ(k)}]` under the
/// same `k` proposal, `τ` from [`dk_threshold`].
pub fn measure_dk_conditional_acc<R: RngCore + ?Sized>(spec: &DkSpec, n: u64, rng: &mut R) -> Accumulator {
    let mut acc = Accumulator::new();
    for _ in 0..n {
        let (k, q) = sample_k_mixture(spec, rng);
        acc.push((-dk_threshold(&k, spec)).exp() / q);
    }
    acc
}

/// Haar samples of the indicator of `Y_{D_k}`: `Δ(x u_ℓ) ≥ r_ℓ` for some
/// `ℓ ∈ [k, p(k)]`. Each hit is re-checked at its witness.
pub fn measure_ydk_acc<R: RngCore + ?Sized>(spec: &DkSpec, n: u64, rng: &mut R) -> Result<Accumulator> {
    let l = &spec.lattice;
    let y = spec.y();
    let mut acc = Accumulator::new();
    for _ in 0..n {
        let g = haar_sample(l, rng)?;
        let f = g.factors()[0];
        let mut hit = None;
        for ell in spec.ells() {
            if factor_delta(&factor_times_u(&f, ell as f64 * y), l)? >= spec.schedule.r(ell) {
                hit = Some(ell);
                break;
            }
        }
        if let Some(ell) = hit {
            debug_assert!(factor_delta(&factor_times_u(&f, ell as f64 * y), l)? >= spec.schedule.r(ell));
        }
        acc.push(if hit.is_some() { 1.0 } else { 0.0 });
    }
    Ok(acc)
}

pub fn measure_ydk<R: RngCore + ?Sized>(spec: &DkSpec, n_samples: u64, seed: u64, rng: &mut R) -> Result<McEstimate> {
    Ok(measure_ydk_acc(spec, n_samples, rng)?.estimate(seed))
}

/// Empirical `σ{Δ > r}` at Haar-random points for each `r` in `radii`.
pub fn tail_counts<R: RngCore + ?Sized>(l: &LatticeSpec, radii: &[f64], n: u64, rng: &mut R) -> Result<Vec<u64>> {
    let mut counts = alloc::vec![0u64; radii.len()];
    for _ in 0..n {
        let g = haar_sample(l, rng)?;
        let d = factor_delta(&g.factors()[0], l)?;
        for (c, &r) in counts.iter_mut().zip(radii) {
            if d > r {
                *c += 1;
            }
        }
    }
    Ok(counts)
}
