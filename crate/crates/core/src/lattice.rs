//! Concrete lattices `SL2(Z)`, `SL2(Z[i])` and `Γ0(N) ⊂ SL2(Z)`, all taken
//! modulo `±1`.
//!
//! Volumes use the Haar normalization of [`crate::group`]: on the base space
//! this is `dx dy/y²` for `H²` and `dx dh/h³` for `H³`. The cusp constant
//! `c0 = |ω_Γ| / v_Γ` is then the coefficient in `σ{Δ > r} = c0 e^{-r}`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use rand_core::RngCore;
use serde::{Deserialize, Serialize};

use crate::gaussian::{ext_gcd_i64, gcd_i64, GInt};
use crate::group::{Compact, Factor, FactorKind, GroupPoint, Mat2};
use crate::quad::Rule;
use crate::rng::{uniform, uniform_open0, uniform_range};
use crate::{Error, Result};

/// Catalan's constant.
pub const CATALAN: f64 = 0.915_965_594_177_219_015;

/// Upper bound on reduction moves before giving up.
pub const MAX_REDUCTION_MOVES: u32 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum LatticeKind {
    ModularZ,
    BianchiZi,
    /// `Γ0(N) = {c ≡ 0 mod N}` inside `SL2(Z)`.
    Gamma0 { level: u32 },
}

/// Data of a one-cusp arithmetic lattice (or a congruence subgroup).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub kind: LatticeKind,
    pub mu: FactorKind,
    /// `R_Γ = det D`.
    pub regulator: f64,
    /// `|ω_Γ|`, the measure of the `N`-part of the cusp domain.
    pub omega_measure: f64,
    /// `v_Γ`.
    pub covolume: f64,
    /// `|ω_Γ| / v_Γ`.
    pub c0: f64,
    /// `[Γ : Λ]` relative to the parent lattice, 1 for the parents.
    pub index: u32,
    /// `[Γ_∞ : Λ_∞]`.
    pub cusp_index: u32,
}

impl LatticeSpec {
    pub fn modular() -> Self {
        let v = PI / 3.0;
        LatticeSpec {
            kind: LatticeKind::ModularZ,
            mu: FactorKind::Real,
            regulator: 1.0,
            omega_measure: 1.0,
            covolume: v,
            c0: 1.0 / v,
            index: 1,
            cusp_index: 1,
        }
    }

    /// `SL2(Z[i])`. The covolume is computed by quadrature over the
    /// standard domain.
    pub fn bianchi() -> Self {
        let v = bianchi_covolume();
        // |F_O| = 1 and R = 1/2 give 2^{n-1} R |F_O| = 1/2; the rotation
        // diag(i, -i) ∈ Γ_∞ ∩ K halves the x-domain once more.
        let omega = 0.25;
        LatticeSpec {
            kind: LatticeKind::BianchiZi,
            mu: FactorKind::Complex,
            regulator: 0.5,
            omega_measure: omega,
            covolume: v,
            c0: omega / v,
            index: 1,
            cusp_index: 1,
        }
    }

    /// `Γ0(N)` for `N ≥ 2`; `v_Λ = [Γ:Λ] v_Γ`.
    pub fn gamma0(level: u32) -> Result<Self> {
        if level < 2 {
            return Err(Error::InvalidInput("Gamma0 level must be at least 2"));
        }
        let index = gamma0_index(level);
        let parent = LatticeSpec::modular();
        let v = parent.covolume * index as f64;
        Ok(LatticeSpec {
            kind: LatticeKind::Gamma0 { level },
            mu: FactorKind::Real,
            regulator: 1.0,
            omega_measure: 1.0,
            covolume: v,
            c0: 1.0 / v,
            index,
            cusp_index: 1,
        })
    }

    pub fn from_kind(kind: LatticeKind) -> Result<Self> {
        match kind {
            LatticeKind::ModularZ => Ok(LatticeSpec::modular()),
            LatticeKind::BianchiZi => Ok(LatticeSpec::bianchi()),
            LatticeKind::Gamma0 { level } => LatticeSpec::gamma0(level),
        }
    }

    pub fn mu_f64(&self) -> f64 {
        self.mu.mu_f64()
    }

    /// Area of the `x`-domain `F_{O_Γ}` used when sampling `Γ_∞\G`.
    pub fn x_domain_area(&self) -> f64 {
        1.0
    }
}

/// `[SL2(Z) : Γ0(N)] = N ∏_{p | N} (1 + 1/p)`.
pub fn gamma0_index(n: u32) -> u32 {
    let mut m = n;
    let mut num = n as u64;
    let mut den = 1u64;
    let mut p = 2;
    while p * p <= m {
        if m % p == 0 {
            while m % p == 0 {
                m /= p;
            }
            num *= (p + 1) as u64;
            den *= p as u64;
        }
        p += 1;
    }
    if m > 1 {
        num *= (m + 1) as u64;
        den *= m as u64;
    }
    (num / den) as u32
}

/// `∫∫ dx / (2 (1 - |x|²))` over `|Re x| ≤ ½, 0 ≤ Im x ≤ ½`, i.e. the
/// hyperbolic volume of the Picard domain.
pub fn bianchi_covolume() -> f64 {
    let rule = Rule::new(24);
    rule.integrate(-0.5, 0.5, 2, |x1| {
        rule.integrate(0.0, 0.5, 2, |x2| 0.5 / (1.0 - x1 * x1 - x2 * x2))
    })
}

/// A representative in the standard fundamental domain.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedPoint {
    pub rep: GroupPoint,
    /// `e^{t}` of the representative: `y` on `H²`, `h` on `H³`.
    pub height: f64,
    pub word_length: u32,
}

pub(crate) fn check_kind(g: &GroupPoint, l: &LatticeSpec) -> Result<()> {
    if g.len() != 1 || g.factors()[0].kind() != l.mu {
        return Err(Error::InvalidInput("group point does not match the lattice"));
    }
    Ok(())
}

/// Reduce a real factor into `|Re z| ≤ ½, |z| ≥ 1`.
pub fn reduce_real(m: &Mat2<f64>) -> Result<(Mat2<f64>, u32)> {
    let mut m = *m;
    let mut moves = 0u32;
    loop {
        let n2 = m.c * m.c + m.d * m.d;
        let x = (m.a * m.c + m.b * m.d) / n2;
        let k = x.round();
        if k != 0.0 {
            m.a -= k * m.c;
            m.b -= k * m.d;
            moves += 1;
        }
        let top = m.a * m.a + m.b * m.b;
        if top < n2 * (1.0 - 1e-13) {
            m = Mat2::new(-m.c, -m.d, m.a, m.b);
            moves += 1;
        } else {
            return Ok((m, moves));
        }
        if moves > MAX_REDUCTION_MOVES {
            return Err(Error::NonTermination { moves });
        }
    }
}

/// Reduce a complex factor into the Picard domain
/// `|Re x| ≤ ½, 0 ≤ Im x ≤ ½, |x|² + h² ≥ 1`.
pub fn reduce_complex(m: &Mat2<Complex64>) -> Result<(Mat2<Complex64>, u32)> {
    let mut m = *m;
    let mut moves = 0u32;
    let i = Complex64::new(0.0, 1.0);
    loop {
        let n2 = m.c.norm_sqr() + m.d.norm_sqr();
        let x = (m.a * m.c.conj() + m.b * m.d.conj()) / n2;
        let k = GInt::round(x);
        if !k.is_zero() {
            let kc = k.to_c64();
            m.a -= kc * m.c;
            m.b -= kc * m.d;
            moves += 1;
        }
        let top = m.a.norm_sqr() + m.b.norm_sqr();
        if top < n2 * (1.0 - 1e-13) {
            m = Mat2::new(-m.c, -m.d, m.a, m.b);
            moves += 1;
        } else {
            // x ↦ -x by diag(i, -i) to land in Im x ≥ 0.
            let x = (m.a * m.c.conj() + m.b * m.d.conj()) / n2;
            if x.im < 0.0 {
                m = Mat2::new(i * m.a, i * m.b, -i * m.c, -i * m.d);
                moves += 1;
            }
            return Ok((m, moves));
        }
        if moves > MAX_REDUCTION_MOVES {
            return Err(Error::NonTermination { moves });
        }
    }
}

/// Move `g` into the standard fundamental domain of `L`.
pub fn reduce(g: &GroupPoint, l: &LatticeSpec) -> Result<ReducedPoint> {
    check_kind(g, l)?;
    match (l.kind, &g.factors()[0]) {
        (LatticeKind::ModularZ, Factor::Real(m)) => {
            let (r, moves) = reduce_real(m)?;
            let height = 1.0 / (r.c * r.c + r.d * r.d);
            Ok(ReducedPoint {
                rep: GroupPoint::real(r)?,
                height,
                word_length: moves,
            })
        }
        (LatticeKind::BianchiZi, Factor::Complex(m)) => {
            let (r, moves) = reduce_complex(m)?;
            let height = 1.0 / (r.c.norm_sqr() + r.d.norm_sqr());
            Ok(ReducedPoint {
                rep: GroupPoint::complex(r)?,
                height,
                word_length: moves,
            })
        }
        _ => Err(Error::UnsupportedLattice),
    }
}

/// `Δ = max(0, μ log height)`.
pub fn delta(g: &GroupPoint, l: &LatticeSpec) -> Result<f64> {
    let r = reduce(g, l)?;
    Ok(delta_from_height(r.height, l))
}

#[inline]
pub fn delta_from_height(height: f64, l: &LatticeSpec) -> f64 {
    (l.mu_f64() * height.ln()).max(0.0)
}

/// Bottom row `(c, d)` of a coset `Γ_∞ γ`, canonical modulo units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CosetRep {
    pub c: GInt,
    pub d: GInt,
}

impl CosetRep {
    pub fn real(c: i64, d: i64) -> Self {
        CosetRep {
            c: GInt::new(c, 0),
            d: GInt::new(d, 0),
        }
    }

    /// One `γ ∈ Γ` with this bottom row.
    pub fn completed_matrix(&self) -> Mat2<Complex64> {
        let (a, b) = if self.c.im == 0 && self.d.im == 0 {
            // a d - b c = 1 over Z
            let (g, x, y) = ext_gcd_i64(self.d.re, self.c.re);
            debug_assert_eq!(g, 1);
            (GInt::new(x, 0), GInt::new(-y, 0))
        } else {
            let (g, x, y) = GInt::ext_gcd(self.d, self.c);
            // x d + y c = g (a unit); scale by g^{-1}.
            let u = g.unit_inv();
            (x * u, -(y * u))
        };
        Mat2::new(a.to_c64(), b.to_c64(), self.c.to_c64(), self.d.to_c64())
    }

    /// Real completion, for `SL2(Z)` cosets.
    pub fn completed_real(&self) -> Mat2<f64> {
        let m = self.completed_matrix();
        Mat2::new(m.a.re, m.b.re, m.c.re, m.d.re)
    }
}

/// The bottom row of `γ g` for a coset `(c, d)`, on one factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BottomRow {
    Real(f64, f64),
    Complex(Complex64, Complex64),
}

impl BottomRow {
    pub fn norm_sqr(&self) -> f64 {
        match *self {
            BottomRow::Real(c, d) => c * c + d * d,
            BottomRow::Complex(c, d) => c.norm_sqr() + d.norm_sqr(),
        }
    }

    /// Compact part of the Iwasawa decomposition of a matrix with this
    /// bottom row.
    pub fn compact(&self) -> Compact {
        match *self {
            BottomRow::Real(c, d) => Compact::from_bottom_row_real(c, d),
            BottomRow::Complex(c, d) => Compact::from_bottom_row_complex(c, d),
        }
    }
}

/// Visit every canonical coset `(c, d)` with `lo ≤ ‖(c, d)·g‖² ≤ hi`.
/// When `level > 1` only `c ≡ 0 (mod level)` is kept.
pub fn for_each_coset<F: FnMut(CosetRep, BottomRow)>(
    g: &GroupPoint,
    level: u32,
    lo: f64,
    hi: f64,
    mut visit: F,
) {
    match &g.factors()[0] {
        Factor::Real(m) => for_each_real(m, level as i64, lo, hi, &mut visit),
        Factor::Complex(m) => for_each_complex(m, lo, hi, &mut visit),
    }
}

fn for_each_real<F: FnMut(CosetRep, BottomRow)>(m: &Mat2<f64>, level: i64, lo: f64, hi: f64, visit: &mut F) {
    let h22 = m.c * m.c + m.d * m.d;
    let h12 = m.a * m.c + m.b * m.d;
    let z = h12 / h22;
    let row = |c: i64, d: i64| {
        let (cf, df) = (c as f64, d as f64);
        BottomRow::Real(cf * m.a + df * m.c, cf * m.b + df * m.d)
    };
    if h22 <= hi && h22 >= lo {
        visit(CosetRep::real(0, 1), row(0, 1));
    }
    let cmax = (hi * h22).sqrt().floor() as i64;
    let mut c = level.max(1);
    while c <= cmax {
        let base = c as f64 * c as f64 / h22;
        let outer = (hi - base) / h22;
        if outer >= 0.0 {
            let r_out = outer.sqrt();
            let r_in2 = (lo - base) / h22;
            let center = -(c as f64) * z;
            let dlo = (center - r_out).ceil() as i64;
            let dhi = (center + r_out).floor() as i64;
            for d in dlo..=dhi {
                let off = d as f64 - center;
                if r_in2 > 0.0 && off * off < r_in2 * (1.0 - 1e-12) {
                    continue;
                }
                if gcd_i64(c, d) != 1 {
                    continue;
                }
                let br = row(c, d);
                let n = br.norm_sqr();
                if n <= hi && n >= lo {
                    visit(CosetRep::real(c, d), br);
                }
            }
        }
        c += level.max(1);
    }
}

fn for_each_complex<F: FnMut(CosetRep, BottomRow)>(m: &Mat2<Complex64>, lo: f64, hi: f64, visit: &mut F) {
    let h22 = m.c.norm_sqr() + m.d.norm_sqr();
    let h12 = m.a * m.c.conj() + m.b * m.d.conj();
    let z = h12 / h22;
    let row = |c: GInt, d: GInt| {
        let (cf, df) = (c.to_c64(), d.to_c64());
        BottomRow::Complex(cf * m.a + df * m.c, cf * m.b + df * m.d)
    };
    if h22 <= hi && h22 >= lo {
        visit(CosetRep { c: GInt::ZERO, d: GInt::ONE }, row(GInt::ZERO, GInt::ONE));
    }
    let cmax2 = hi * h22;
    let cmax = cmax2.sqrt().floor() as i64;
    for p in 1..=cmax {
        for q in 0..=cmax {
            let c = GInt::new(p, q);
            let cn = c.norm() as f64;
            if cn > cmax2 {
                break;
            }
            let base = cn / h22;
            let outer = (hi - base) / h22;
            if outer < 0.0 {
                continue;
            }
            let r_out = outer.sqrt();
            let r_in2 = (lo - base) / h22;
            let center = -(c.to_c64() * z);
            let ylo = (center.im - r_out).ceil() as i64;
            let yhi = (center.im + r_out).floor() as i64;
            for dy in ylo..=yhi {
                let oy = dy as f64 - center.im;
                let w2 = outer - oy * oy;
                if w2 < 0.0 {
                    continue;
                }
                let w = w2.sqrt();
                let xlo = (center.re - w).ceil() as i64;
                let xhi = (center.re + w).floor() as i64;
                for dx in xlo..=xhi {
                    let ox = dx as f64 - center.re;
                    if r_in2 > 0.0 && ox * ox + oy * oy < r_in2 * (1.0 - 1e-12) {
                        continue;
                    }
                    let d = GInt::new(dx, dy);
                    if !GInt::gcd(c, d).is_unit() {
                        continue;
                    }
                    let br = row(c, d);
                    let n = br.norm_sqr();
                    if n <= hi && n >= lo {
                        visit(CosetRep { c, d }, br);
                    }
                }
            }
        }
    }
}

/// Region of `w = -c'/d'`, for a bottom row `(c', d')`, that contains the
/// support of a compact factor. Real rows use an interval, complex rows a
/// disk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cone {
    Interval { lo: f64, hi: f64 },
    Disk { center: Complex64, radius: f64 },
}

impl Cone {
    fn center_radius(&self) -> (Complex64, f64) {
        match *self {
            Cone::Interval { lo, hi } => (Complex64::new(0.5 * (lo + hi), 0.0), 0.5 * (hi - lo)),
            Cone::Disk { center, radius } => (center, radius),
        }
    }
}

/// As [`for_each_coset`], restricted to cosets whose row `(c', d') = (c, d)·g`
/// has `w = -c'/d'` in `cone`; a superset is visited and callers evaluate the
/// compact factor anyway.
///
/// With `N = n⁻_{w0} · diag(ρ^{-1/2}, ρ^{1/2})` the cone condition gives
/// `‖(c', d') N‖² ≤ 2ρ ‖(c', d')‖²`, so it is enough to enumerate the ball of
/// radius² `2ρ·hi` for the lattice spanned by `g N`, after reducing that
/// basis.
pub fn for_each_coset_cone<F: FnMut(CosetRep, BottomRow)>(
    g: &GroupPoint,
    level: u32,
    lo: f64,
    hi: f64,
    cone: &Cone,
    mut visit: F,
) {
    let (w0, rho) = cone.center_radius();
    if !(rho < 0.25) {
        return for_each_coset(g, level, lo, hi, visit);
    }
    let (sr, w0) = (rho.sqrt(), w0);
    let bound = 2.0 * rho * hi * (1.0 + 1e-9);
    let lv = level.max(1) as i64;
    match &g.factors()[0] {
        Factor::Real(m) => {
            let w = w0.re;
            // columns: (c + w d)/√ρ, d √ρ
            let sheared = Mat2::new((m.a + w * m.b) / sr, m.b * sr, (m.c + w * m.d) / sr, m.d * sr);
            let Ok((r, _)) = reduce_real(&sheared) else {
                return for_each_coset(g, level, lo, hi, visit);
            };
            // r = γ · sheared, so (c̃, d̃) r = ((c̃, d̃) γ) sheared.
            let inv = Mat2::new(sheared.d, -sheared.b, -sheared.c, sheared.a);
            let gm = r * inv;
            let gam = [gm.a.round() as i64, gm.b.round() as i64, gm.c.round() as i64, gm.d.round() as i64];
            for_each_real(&r, 1, 0.0, bound, &mut |rep, _| {
                let (ct, dt) = (rep.c.re, rep.d.re);
                let (mut c, mut d) = (ct * gam[0] + dt * gam[2], ct * gam[1] + dt * gam[3]);
                if c < 0 || (c == 0 && d < 0) {
                    (c, d) = (-c, -d);
                }
                if c % lv != 0 {
                    return;
                }
                let (cf, df) = (c as f64, d as f64);
                let br = BottomRow::Real(cf * m.a + df * m.c, cf * m.b + df * m.d);
                let n = br.norm_sqr();
                if n <= hi && n >= lo {
                    visit(CosetRep::real(c, d), br);
                }
            });
        }
        Factor::Complex(m) => {
            let sheared = Mat2::new((m.a + w0 * m.b) / sr, m.b * sr, (m.c + w0 * m.d) / sr, m.d * sr);
            let Ok((r, _)) = reduce_complex(&sheared) else {
                return for_each_coset(g, level, lo, hi, visit);
            };
            let inv = Mat2::new(sheared.d, -sheared.b, -sheared.c, sheared.a);
            let gm = r * inv;
            let gam = [GInt::round(gm.a), GInt::round(gm.b), GInt::round(gm.c), GInt::round(gm.d)];
            for_each_complex(&r, 0.0, bound, &mut |rep, _| {
                let (ct, dt) = (rep.c, rep.d);
                let (c, d) = (ct * gam[0] + dt * gam[2], ct * gam[1] + dt * gam[3]);
                let (c, d) = if c.is_zero() {
                    let (_, u) = d.canonical_associate();
                    (c, d * u)
                } else {
                    let (cc, u) = c.canonical_associate();
                    (cc, d * u)
                };
                let (cf, df) = (c.to_c64(), d.to_c64());
                let br = BottomRow::Complex(cf * m.a + df * m.c, cf * m.b + df * m.d);
                let n = br.norm_sqr();
                if n <= hi && n >= lo {
                    visit(CosetRep { c, d }, br);
                }
            });
        }
    }
}

/// All canonical cosets with `‖(c, d)·g‖² ≤ norm_bound`.
pub fn enumerate_cosets(g: &GroupPoint, l: &LatticeSpec, norm_bound: f64) -> Result<Vec<CosetRep>> {
    check_kind(g, l)?;
    if norm_bound < 1.0 {
        return Err(Error::InvalidInput("norm_bound must be at least 1"));
    }
    let level = match l.kind {
        LatticeKind::Gamma0 { level } => level,
        _ => 1,
    };
    let mut out = Vec::new();
    for_each_coset(g, level, 0.0, norm_bound, |c, _| out.push(c));
    Ok(out)
}

/// Cosets of `Λ_∞\Λ` for a congruence subgroup `Λ`.
pub fn subgroup_cosets(g: &GroupPoint, l: &LatticeSpec, norm_bound: f64) -> Result<Vec<CosetRep>> {
    match l.kind {
        LatticeKind::Gamma0 { .. } => enumerate_cosets(g, l, norm_bound),
        _ => Err(Error::InvalidInput("subgroup_cosets needs a congruence lattice")),
    }
}

/// Draw a point of `Γ\G` from the normalized Haar measure.
pub fn haar_sample<R: RngCore + ?Sized>(l: &LatticeSpec, rng: &mut R) -> Result<GroupPoint> {
    match l.kind {
        LatticeKind::ModularZ => Ok(sample_modular(l, rng)),
        LatticeKind::BianchiZi => Ok(sample_bianchi(l, rng)),
        LatticeKind::Gamma0 { .. } => Err(Error::UnsupportedLattice),
    }
}

fn sample_modular<R: RngCore + ?Sized>(l: &LatticeSpec, rng: &mut R) -> GroupPoint {
    // Cusp part y ≥ 1 has mass 1 out of v = π/3.
    let p_cusp = 1.0 / l.covolume;
    let (x, y) = if uniform(rng) < p_cusp {
        (uniform_range(rng, -0.5, 0.5), 1.0 / uniform_open0(rng))
    } else {
        let ymin = 0.75f64.sqrt();
        loop {
            let x = uniform_range(rng, -0.5, 0.5);
            // density ∝ y^{-2} on [ymin, 1]: 1/y uniform on [1, 1/ymin]
            let y = 1.0 / uniform_range(rng, 1.0, 1.0 / ymin);
            if x * x + y * y >= 1.0 {
                break (x, y);
            }
        }
    };
    let theta = uniform_range(rng, 0.0, 2.0 * PI);
    let (sy, k) = (y.sqrt(), Compact::real_matrix(theta));
    let na = Mat2::new(sy, x / sy, 0.0, 1.0 / sy);
    GroupPoint::real(na * k).expect("unit determinant")
}

/// Haar measure on `SU(2)` in the `(θ, α, β)` chart.
pub fn sample_su2<R: RngCore + ?Sized>(rng: &mut R) -> Compact {
    let theta = 0.5 * (1.0 - 2.0 * uniform(rng)).clamp(-1.0, 1.0).acos();
    Compact::Complex {
        theta,
        alpha: uniform_range(rng, 0.0, 2.0 * PI),
        beta: uniform_range(rng, 0.0, 2.0 * PI),
    }
}

fn sample_bianchi<R: RngCore + ?Sized>(l: &LatticeSpec, rng: &mut R) -> GroupPoint {
    // Cusp part h ≥ 1 over the half box has mass 1/4.
    let p_cusp = 0.25 / l.covolume;
    let (x, h) = if uniform(rng) < p_cusp {
        let x = Complex64::new(uniform_range(rng, -0.5, 0.5), uniform_range(rng, 0.0, 0.5));
        (x, 1.0 / uniform_open0(rng).sqrt())
    } else {
        loop {
            let x = Complex64::new(uniform_range(rng, -0.5, 0.5), uniform_range(rng, 0.0, 0.5));
            // density ∝ h^{-3} on [√½, 1]: h^{-2} uniform on [1, 2]
            let h = 1.0 / uniform_range(rng, 1.0, 2.0).sqrt();
            if x.norm_sqr() + h * h >= 1.0 {
                break (x, h);
            }
        }
    };
    let k = match sample_su2(rng) {
        Compact::Complex { theta, alpha, beta } => Compact::complex_matrix(theta, alpha, beta),
        Compact::Real { .. } => unreachable!(),
    };
    let sh = h.sqrt();
    let na = Mat2::new(
        Complex64::new(sh, 0.0),
        x / sh,
        Complex64::new(0.0, 0.0),
        Complex64::new(1.0 / sh, 0.0),
    );
    GroupPoint::complex(na * k).expect("unit determinant")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{compose, iwasawa_decompose, FactorCoords, IwasawaCoords};
    use alloc::vec;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn real_point(x: f64, y: f64, theta: f64) -> GroupPoint {
        compose(&IwasawaCoords {
            factors: vec![FactorCoords {
                x: Complex64::new(x, 0.0),
                t: y.ln(),
                k: Compact::Real { theta },
            }],
        })
    }

    fn complex_point(x: Complex64, h: f64) -> GroupPoint {
        compose(&IwasawaCoords {
            factors: vec![FactorCoords {
                x,
                t: h.ln(),
                k: Compact::identity(FactorKind::Complex),
            }],
        })
    }

    #[test]
    fn constants() {
        let m = LatticeSpec::modular();
        assert!((m.c0 - 3.0 / PI).abs() < 1e-15);
        let b = LatticeSpec::bianchi();
        assert!((b.covolume - CATALAN / 3.0).abs() < 1e-12, "{}", b.covolume);
        assert!((b.c0 - 0.75 / CATALAN).abs() < 1e-11);
        assert_eq!(gamma0_index(2), 3);
        assert_eq!(gamma0_index(4), 6);
        assert_eq!(gamma0_index(6), 12);
    }

    #[test]
    fn reduce_modular_examples() {
        let l = LatticeSpec::modular();
        let r = reduce(&real_point(0.0, 0.5, 0.0), &l).unwrap();
        assert!((r.height - 2.0).abs() < 1e-12);
        let r = reduce(&real_point(0.0, 1.0, 0.3), &l).unwrap();
        assert!((r.height - 1.0).abs() < 1e-12);
        assert_eq!(delta(&real_point(0.2, 10.0, 1.0), &l).unwrap(), 10f64.ln());
    }

    #[test]
    fn reduce_bianchi_examples() {
        let l = LatticeSpec::bianchi();
        let r = reduce(&complex_point(Complex64::new(0.0, 0.0), 0.5), &l).unwrap();
        assert!((r.height - 2.0).abs() < 1e-12);
        let r = reduce(&complex_point(Complex64::new(0.1, 0.2), 1.0f64.exp()), &l).unwrap();
        assert!((delta_from_height(r.height, &l) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn reduced_bianchi_in_picard_domain() {
        let l = LatticeSpec::bianchi();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let x = Complex64::new(uniform_range(&mut rng, -3.0, 3.0), uniform_range(&mut rng, -3.0, 3.0));
            let h = uniform_range(&mut rng, 0.01, 2.0);
            let r = reduce(&complex_point(x, h), &l).unwrap();
            let c = &iwasawa_decompose(&r.rep).factors[0];
            assert!(c.x.re.abs() <= 0.5 + 1e-9 && c.x.im >= -1e-9 && c.x.im <= 0.5 + 1e-9);
            assert!(c.x.norm_sqr() + r.height * r.height >= 1.0 - 1e-9);
            assert!(r.height >= h * (1.0 - 1e-12));
        }
    }

    #[test]
    fn cosets_at_identity() {
        let l = LatticeSpec::modular();
        let id = GroupPoint::identity(&[FactorKind::Real]);
        let mut one = enumerate_cosets(&id, &l, 1.0).unwrap();
        one.sort_by_key(|c| (c.c.re, c.d.re));
        assert_eq!(one, vec![CosetRep::real(0, 1), CosetRep::real(1, 0)]);
        assert_eq!(enumerate_cosets(&id, &l, 5.0).unwrap().len(), 8);
        let g = LatticeSpec::gamma0(2).unwrap();
        let mut sub = subgroup_cosets(&id, &g, 5.0).unwrap();
        sub.sort_by_key(|c| (c.c.re, c.d.re));
        assert_eq!(sub, vec![CosetRep::real(0, 1), CosetRep::real(2, -1), CosetRep::real(2, 1)]);
        let b = LatticeSpec::bianchi();
        let idc = GroupPoint::identity(&[FactorKind::Complex]);
        assert_eq!(enumerate_cosets(&idc, &b, 1.0).unwrap().len(), 2);
    }

    #[test]
    fn thin_cone_with_level() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for trial in 0..30 {
            let w0 = uniform_range(&mut rng, -0.5, 0.5);
            let rho = 10f64.powf(-uniform_range(&mut rng, 1.0, 3.0));
            let cone = Cone::Interval { lo: w0 - rho, hi: w0 + rho };
            let g = real_point(uniform_range(&mut rng, -0.5, 0.5), uniform_range(&mut rng, 0.2, 3.0), uniform_range(&mut rng, 0.0, 6.0));
            let level = 1 + trial % 2;
            let in_cone = |br: &BottomRow| match *br {
                BottomRow::Real(c, d) => (-c / d - w0).abs() <= rho * (1.0 - 1e-9),
                _ => unreachable!(),
            };
            let collect = |use_cone: bool| {
                let mut out = Vec::new();
                let push = |c: CosetRep, br: BottomRow| {
                    if in_cone(&br) {
                        out.push((c.c.re, c.d.re))
                    }
                };
                if use_cone {
                    for_each_coset_cone(&g, level, 0.0, 5e4, &cone, push);
                } else {
                    for_each_coset(&g, level, 0.0, 5e4, push);
                }
                out.sort();
                out
            };
            assert_eq!(collect(false), collect(true), "trial {trial}");
        }
    }

    #[test]
    fn cone_enumeration_is_a_superset_on_the_cone() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for trial in 0..40 {
            let (g, cone) = if trial % 2 == 0 {
                let g = real_point(uniform_range(&mut rng, -0.5, 0.5), uniform_range(&mut rng, 0.2, 3.0), uniform_range(&mut rng, 0.0, 6.0));
                (g, Cone::Interval { lo: -0.2, hi: 0.25 })
            } else {
                let mut g = complex_point(
                    Complex64::new(uniform_range(&mut rng, -0.5, 0.5), uniform_range(&mut rng, 0.0, 0.5)),
                    uniform_range(&mut rng, 0.3, 2.0),
                );
                let k = Compact::complex_matrix(uniform_range(&mut rng, 0.0, 1.5), uniform_range(&mut rng, 0.0, 6.0), 1.0);
                g = g.mul(&GroupPoint::complex(k).unwrap()).unwrap();
                (g, Cone::Disk { center: Complex64::new(0.3, 0.0), radius: 0.2 })
            };
            let (w0, rho) = cone.center_radius();
            let in_cone = |br: &BottomRow| match *br {
                BottomRow::Real(c, d) => (-c / d - w0.re).abs() <= rho,
                BottomRow::Complex(c, d) => (-c / d - w0).norm() <= rho,
            };
            let mut full = Vec::new();
            for_each_coset(&g, 1, 0.0, 400.0, |c, br| {
                if in_cone(&br) {
                    full.push(c)
                }
            });
            let mut part = Vec::new();
            for_each_coset_cone(&g, 1, 0.0, 400.0, &cone, |c, br| {
                if in_cone(&br) {
                    part.push(c)
                }
            });
            assert!(!full.is_empty());
            let key = |c: &CosetRep| (c.c.re, c.c.im, c.d.re, c.d.im);
            full.sort_by_key(key);
            part.sort_by_key(key);
            assert_eq!(full, part, "trial {trial}");
        }
    }

    #[test]
    fn completion_has_unit_determinant() {
        let c = CosetRep::real(5, -3).completed_real();
        assert_eq!(c.det(), 1.0);
        let z = CosetRep {
            c: GInt::new(2, 1),
            d: GInt::new(1, 2),
        };
        let m = z.completed_matrix();
        assert!((m.det() - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn haar_sample_lands_in_domain() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for l in [LatticeSpec::modular(), LatticeSpec::bianchi()] {
            for _ in 0..1000 {
                let g = haar_sample(&l, &mut rng).unwrap();
                let r = reduce(&g, &l).unwrap();
                assert!(r.word_length <= 1, "{}", r.word_length);
            }
        }
    }
}
