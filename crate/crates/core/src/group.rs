//! Numerical model of `G = ∏ G_j` with `G_j ∈ {SL2(R), SL2(C)}`.
//!
//! Coordinates follow `g = n_x a_t k` with
//! `n_x = [[1, x], [0, 1]]`, `a_t = diag(e^{t/2}, e^{-t/2})`,
//! `k_θ = [[cos θ, sin θ], [-sin θ, cos θ]]` and
//! `k_{θ,α,β} = [[cos θ e^{iα}, sin θ e^{iβ}], [-sin θ e^{-iβ}, cos θ e^{-iα}]]`.
//! In these coordinates `dg = exp(-Σ μ_j t_j) dt dx dk`.

use alloc::vec::Vec;
use core::f64::consts::PI;
use core::ops::Mul;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use num_traits::Num;
use serde::{Deserialize, Serialize};

use crate::linalg;
use crate::{Error, Result};

const TWO_PI: f64 = 2.0 * PI;

/// Determinant drift above which [`Mat2::renormalize`] rescales.
pub const DET_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FactorKind {
    Real,
    Complex,
}

impl FactorKind {
    /// Weight `μ`: 1 for `SL2(R)`, 2 for `SL2(C)`.
    pub fn mu(self) -> u32 {
        match self {
            FactorKind::Real => 1,
            FactorKind::Complex => 2,
        }
    }

    pub fn mu_f64(self) -> f64 {
        self.mu() as f64
    }
}

/// A 2×2 matrix stored row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2<T> {
    pub a: T,
    pub b: T,
    pub c: T,
    pub d: T,
}

impl<T: Copy + Num> Mat2<T> {
    pub fn new(a: T, b: T, c: T, d: T) -> Self {
        Mat2 { a, b, c, d }
    }

    pub fn identity() -> Self {
        Mat2::new(T::one(), T::zero(), T::zero(), T::one())
    }

    pub fn det(&self) -> T {
        self.a * self.d - self.b * self.c
    }
}

impl<T: Copy + Num> Mul for Mat2<T> {
    type Output = Mat2<T>;

    fn mul(self, o: Mat2<T>) -> Mat2<T> {
        Mat2 {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }
}

impl Mat2<f64> {
    /// Rescale so that `det = 1` when the drift exceeds [`DET_TOLERANCE`].
    pub fn renormalize(&mut self) {
        let det = self.det();
        if (det - 1.0).abs() > DET_TOLERANCE && det > 0.0 {
            let s = 1.0 / det.sqrt();
            self.a *= s;
            self.b *= s;
            self.c *= s;
            self.d *= s;
        }
    }

    pub fn to_complex(&self) -> Mat2<Complex64> {
        Mat2::new(
            Complex64::new(self.a, 0.0),
            Complex64::new(self.b, 0.0),
            Complex64::new(self.c, 0.0),
            Complex64::new(self.d, 0.0),
        )
    }

    pub fn max_abs_diff(&self, o: &Mat2<f64>) -> f64 {
        (self.a - o.a)
            .abs()
            .max((self.b - o.b).abs())
            .max((self.c - o.c).abs())
            .max((self.d - o.d).abs())
    }
}

impl Mat2<Complex64> {
    pub fn renormalize(&mut self) {
        let det = self.det();
        if (det - Complex64::new(1.0, 0.0)).norm() > DET_TOLERANCE && det.norm() > 0.0 {
            let s = det.sqrt().inv();
            self.a *= s;
            self.b *= s;
            self.c *= s;
            self.d *= s;
        }
    }

    pub fn max_abs_diff(&self, o: &Mat2<Complex64>) -> f64 {
        (self.a - o.a)
            .norm()
            .max((self.b - o.b).norm())
            .max((self.c - o.c).norm())
            .max((self.d - o.d).norm())
    }
}

/// One factor of a [`GroupPoint`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Factor {
    Real(Mat2<f64>),
    Complex(Mat2<Complex64>),
}

impl Factor {
    pub fn kind(&self) -> FactorKind {
        match self {
            Factor::Real(_) => FactorKind::Real,
            Factor::Complex(_) => FactorKind::Complex,
        }
    }

    fn identity(kind: FactorKind) -> Factor {
        match kind {
            FactorKind::Real => Factor::Real(Mat2::identity()),
            FactorKind::Complex => Factor::Complex(Mat2::identity()),
        }
    }

    fn mul(&self, o: &Factor) -> Result<Factor> {
        match (self, o) {
            (Factor::Real(x), Factor::Real(y)) => Ok(Factor::Real(*x * *y)),
            (Factor::Complex(x), Factor::Complex(y)) => Ok(Factor::Complex(*x * *y)),
            _ => Err(Error::InvalidInput("factor kinds differ")),
        }
    }

    fn max_abs_diff(&self, o: &Factor) -> f64 {
        match (self, o) {
            (Factor::Real(x), Factor::Real(y)) => x.max_abs_diff(y),
            (Factor::Complex(x), Factor::Complex(y)) => x.max_abs_diff(y),
            _ => f64::INFINITY,
        }
    }
}

/// An element of `G = ∏ G_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupPoint {
    factors: Vec<Factor>,
}

impl GroupPoint {
    /// Build a point, checking `det = 1` per factor (tolerance 1e-12 after
    /// renormalization is allowed; larger drift is rejected).
    pub fn new(factors: Vec<Factor>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidInput("GroupPoint needs at least one factor"));
        }
        let mut factors = factors;
        for f in factors.iter_mut() {
            match f {
                Factor::Real(m) => {
                    if (m.det() - 1.0).abs() > 1e-6 {
                        return Err(Error::InvalidInput("GroupPoint factor determinant != 1"));
                    }
                    m.renormalize();
                }
                Factor::Complex(m) => {
                    if (m.det() - Complex64::new(1.0, 0.0)).norm() > 1e-6 {
                        return Err(Error::InvalidInput("GroupPoint factor determinant != 1"));
                    }
                    m.renormalize();
                }
            }
        }
        Ok(GroupPoint { factors })
    }

    pub fn real(m: Mat2<f64>) -> Result<Self> {
        GroupPoint::new(alloc::vec![Factor::Real(m)])
    }

    pub fn complex(m: Mat2<Complex64>) -> Result<Self> {
        GroupPoint::new(alloc::vec![Factor::Complex(m)])
    }

    pub fn identity(kinds: &[FactorKind]) -> Self {
        GroupPoint {
            factors: kinds.iter().map(|&k| Factor::identity(k)).collect(),
        }
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn kinds(&self) -> Vec<FactorKind> {
        self.factors.iter().map(Factor::kind).collect()
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn mul(&self, o: &GroupPoint) -> Result<GroupPoint> {
        if self.len() != o.len() {
            return Err(Error::InvalidInput("GroupPoint lengths differ"));
        }
        let factors = self
            .factors
            .iter()
            .zip(&o.factors)
            .map(|(x, y)| x.mul(y))
            .collect::<Result<Vec<_>>>()?;
        Ok(GroupPoint { factors })
    }

    /// Sup-norm distance between entries, factor-wise.
    pub fn max_abs_diff(&self, o: &GroupPoint) -> f64 {
        if self.len() != o.len() {
            return f64::INFINITY;
        }
        self.factors
            .iter()
            .zip(&o.factors)
            .map(|(x, y)| x.max_abs_diff(y))
            .fold(0.0, f64::max)
    }
}

/// Compact part of one factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Compact {
    /// `k_θ ∈ SO(2)`, `θ ∈ [0, 2π)`.
    Real { theta: f64 },
    /// `k_{θ,α,β} ∈ SU(2)`, `θ ∈ [0, π/2]`, `α, β ∈ [0, 2π)`.
    Complex { theta: f64, alpha: f64, beta: f64 },
}

impl Compact {
    pub fn kind(&self) -> FactorKind {
        match self {
            Compact::Real { .. } => FactorKind::Real,
            Compact::Complex { .. } => FactorKind::Complex,
        }
    }

    pub fn identity(kind: FactorKind) -> Compact {
        match kind {
            FactorKind::Real => Compact::Real { theta: 0.0 },
            FactorKind::Complex => Compact::Complex {
                theta: 0.0,
                alpha: 0.0,
                beta: 0.0,
            },
        }
    }

    pub fn real_matrix(theta: f64) -> Mat2<f64> {
        let (s, c) = theta.sin_cos();
        Mat2::new(c, s, -s, c)
    }

    pub fn complex_matrix(theta: f64, alpha: f64, beta: f64) -> Mat2<Complex64> {
        let (s, c) = theta.sin_cos();
        let ea = Complex64::from_polar(1.0, alpha);
        let eb = Complex64::from_polar(1.0, beta);
        Mat2::new(ea * c, eb * s, -eb.conj() * s, ea.conj() * c)
    }

    /// Recover the compact parameters from the bottom row of `a_t k`,
    /// i.e. `e^{-t/2} · (k_21, k_22)`.
    pub fn from_bottom_row_real(c: f64, d: f64) -> Compact {
        Compact::Real {
            theta: wrap_angle((-c).atan2(d)),
        }
    }

    /// Bottom row of `a_t k_{θ,α,β}` is `e^{-t/2}(-sin θ e^{-iβ}, cos θ e^{-iα})`.
    /// At `θ ∈ {0, π/2}` the undetermined angle is set to 0.
    pub fn from_bottom_row_complex(c: Complex64, d: Complex64) -> Compact {
        let (nc, nd) = (c.norm(), d.norm());
        let theta = nc.atan2(nd);
        let beta = if nc > 0.0 { wrap_angle(-(-c).arg()) } else { 0.0 };
        let alpha = if nd > 0.0 { wrap_angle(-d.arg()) } else { 0.0 };
        Compact::Complex { theta, alpha, beta }
    }
}

/// Map an angle into `[0, 2π)`.
pub fn wrap_angle(x: f64) -> f64 {
    let mut y = x % TWO_PI;
    if y < 0.0 {
        y += TWO_PI;
    }
    if y >= TWO_PI {
        y -= TWO_PI;
    }
    y
}

/// Iwasawa coordinates `(x, t, k)` of one factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FactorCoords {
    /// Shear; the imaginary part is zero for real factors.
    pub x: Complex64,
    pub t: f64,
    pub k: Compact,
}

impl FactorCoords {
    pub fn kind(&self) -> FactorKind {
        self.k.kind()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IwasawaCoords {
    pub factors: Vec<FactorCoords>,
}

fn decompose_real(m: &Mat2<f64>) -> FactorCoords {
    let n = m.c * m.c + m.d * m.d;
    FactorCoords {
        x: Complex64::new((m.a * m.c + m.b * m.d) / n, 0.0),
        t: -n.ln(),
        k: Compact::from_bottom_row_real(m.c, m.d),
    }
}

fn decompose_complex(m: &Mat2<Complex64>) -> FactorCoords {
    let n = m.c.norm_sqr() + m.d.norm_sqr();
    FactorCoords {
        x: (m.a * m.c.conj() + m.b * m.d.conj()) / n,
        t: -n.ln(),
        k: Compact::from_bottom_row_complex(m.c, m.d),
    }
}

/// `g = n_x a_t k` factor by factor.
pub fn iwasawa_decompose(g: &GroupPoint) -> IwasawaCoords {
    IwasawaCoords {
        factors: g
            .factors
            .iter()
            .map(|f| match f {
                Factor::Real(m) => decompose_real(m),
                Factor::Complex(m) => decompose_complex(m),
            })
            .collect(),
    }
}

/// Compose one factor `n_x a_t k`.
pub fn compose_factor(c: &FactorCoords) -> Factor {
    let (e_plus, e_minus) = ((0.5 * c.t).exp(), (-0.5 * c.t).exp());
    match c.k {
        Compact::Real { theta } => {
            let k = Compact::real_matrix(theta);
            let na = Mat2::new(e_plus, c.x.re * e_minus, 0.0, e_minus);
            Factor::Real(na * k)
        }
        Compact::Complex { theta, alpha, beta } => {
            let k = Compact::complex_matrix(theta, alpha, beta);
            let zero = Complex64::new(0.0, 0.0);
            let na = Mat2::new(
                Complex64::new(e_plus, 0.0),
                c.x * e_minus,
                zero,
                Complex64::new(e_minus, 0.0),
            );
            Factor::Complex(na * k)
        }
    }
}

pub fn compose(c: &IwasawaCoords) -> GroupPoint {
    GroupPoint {
        factors: c.factors.iter().map(compose_factor).collect(),
    }
}

/// `exp(-Σ μ_j t_j)`, the density of `dg` against `dt dx dk`.
pub fn haar_density(c: &IwasawaCoords) -> f64 {
    let s: f64 = c.factors.iter().map(|f| f.kind().mu_f64() * f.t).sum();
    (-s).exp()
}

/// Probability density of `dk_θ` against `dθ` on `[0, 2π)`.
pub fn real_compact_density() -> f64 {
    1.0 / TWO_PI
}

/// Probability density of Haar measure on `SU(2)` against `dθ dα dβ` on the
/// chart `[0, π/2] × [0, 2π)²`.
pub fn complex_compact_density(theta: f64) -> f64 {
    (2.0 * theta).sin().abs() / (4.0 * PI * PI)
}

/// Flow direction `y ∈ [0,1]^n` with `max_j y_j = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct FlowDirection(Vec<f64>);

impl FlowDirection {
    pub fn new(y: Vec<f64>) -> Result<Self> {
        if y.is_empty() {
            return Err(Error::InvalidInput("FlowDirection must be non-empty"));
        }
        if y.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidInput("FlowDirection entries must lie in [0, 1]"));
        }
        if !y.iter().any(|&v| v == 1.0) {
            return Err(Error::InvalidInput("FlowDirection needs max_j y_j = 1"));
        }
        Ok(FlowDirection(y))
    }

    /// The default direction `(1, …, 1)`.
    pub fn ones(n: usize) -> Self {
        FlowDirection(alloc::vec![1.0; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for FlowDirection {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        FlowDirection::new(v)
    }
}

impl From<FlowDirection> for Vec<f64> {
    fn from(y: FlowDirection) -> Vec<f64> {
        y.0
    }
}

/// `u_s = n⁻_{s y}`: lower-triangular `[[1, 0], [s y_j, 1]]` per factor.
pub fn unipotent(s: f64, y: &FlowDirection, kinds: &[FactorKind]) -> Result<GroupPoint> {
    if kinds.len() != y.0.len() {
        return Err(Error::InvalidInput("flow direction length differs from group rank"));
    }
    let factors = kinds
        .iter()
        .zip(&y.0)
        .map(|(k, &yj)| match k {
            FactorKind::Real => Factor::Real(Mat2::new(1.0, 0.0, s * yj, 1.0)),
            FactorKind::Complex => Factor::Complex(Mat2::new(
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(s * yj, 0.0),
                Complex64::new(1.0, 0.0),
            )),
        })
        .collect();
    Ok(GroupPoint { factors })
}

/// Coordinates at the cusp: `g = n_x a_{D t} k`.
#[derive(Debug, Clone, PartialEq)]
pub struct CuspCoords {
    pub x: Vec<Complex64>,
    /// Coordinates in the basis given by the columns of `D`.
    pub tvec: Vec<f64>,
    /// Cusp height coordinate, the last entry of `tvec`.
    pub tn: f64,
    pub k: Vec<Compact>,
    pub regulator: f64,
}

impl CuspCoords {
    /// `R_Γ e^{-t_n}`.
    pub fn density(&self) -> f64 {
        self.regulator * (-self.tn).exp()
    }
}

/// Cusp basis: `n × n` matrix whose first `n-1` columns span the unit-log
/// lattice and whose last column is `η`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CuspBasis {
    /// Row-major `n × n`.
    pub d: Vec<f64>,
    pub n: usize,
}

impl CuspBasis {
    /// `D = (1/μ)` for a single factor.
    pub fn rank_one(kind: FactorKind) -> Self {
        CuspBasis {
            d: alloc::vec![1.0 / kind.mu_f64()],
            n: 1,
        }
    }

    /// Build `D` from caller-supplied unit-log vectors (each of length `n`),
    /// appending `η` as the last column.
    pub fn from_unit_logs(kinds: &[FactorKind], unit_logs: &[Vec<f64>]) -> Result<Self> {
        let n = kinds.len();
        if unit_logs.len() + 1 != n || unit_logs.iter().any(|v| v.len() != n) {
            return Err(Error::InvalidInput("need n-1 unit-log vectors of length n"));
        }
        let mut d = alloc::vec![0.0; n * n];
        for (col, v) in unit_logs.iter().enumerate() {
            for row in 0..n {
                d[row * n + col] = v[row];
            }
        }
        for (row, k) in kinds.iter().enumerate() {
            d[row * n + n - 1] = 1.0 / (n as f64 * k.mu_f64());
        }
        Ok(CuspBasis { d, n })
    }

    /// `R_Γ = det D`.
    pub fn regulator(&self) -> f64 {
        linalg::det(&self.d, self.n)
    }
}

/// Convert `g` to cusp coordinates relative to the basis `D`.
pub fn cusp_coords(g: &GroupPoint, basis: &CuspBasis) -> Result<CuspCoords> {
    let n = g.len();
    if basis.n != n || basis.d.len() != n * n {
        return Err(Error::InvalidInput("cusp basis dimension differs from group rank"));
    }
    let kinds = g.kinds();
    for (row, k) in kinds.iter().enumerate() {
        let eta = 1.0 / (n as f64 * k.mu_f64());
        if (basis.d[row * n + n - 1] - eta).abs() > 1e-12 {
            return Err(Error::BadEta);
        }
    }
    let det = basis.regulator();
    if det.abs() < 1e-14 {
        return Err(Error::SingularD);
    }
    let iw = iwasawa_decompose(g);
    let ttilde: Vec<f64> = iw.factors.iter().map(|f| f.t).collect();
    let tvec = linalg::solve(&basis.d, &ttilde, n).ok_or(Error::SingularD)?;
    Ok(CuspCoords {
        x: iw.factors.iter().map(|f| f.x).collect(),
        tn: tvec[n - 1],
        tvec,
        k: iw.factors.iter().map(|f| f.k).collect(),
        regulator: det.abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn decompose_upper_triangular() {
        let g = GroupPoint::real(Mat2::new(2.0, 1.0, 0.0, 0.5)).unwrap();
        let c = &iwasawa_decompose(&g).factors[0];
        assert!((c.x.re - 2.0).abs() < 1e-14);
        assert!((c.t - 4f64.ln()).abs() < 1e-14);
        assert_eq!(c.k, Compact::Real { theta: 0.0 });
    }

    #[test]
    fn decompose_rotation() {
        let g = GroupPoint::real(Mat2::new(0.0, 1.0, -1.0, 0.0)).unwrap();
        let c = &iwasawa_decompose(&g).factors[0];
        assert!(c.x.norm() < 1e-15);
        assert!(c.t.abs() < 1e-15);
        match c.k {
            Compact::Real { theta } => assert!((theta - PI / 2.0).abs() < 1e-15),
            _ => unreachable!(),
        }
    }

    #[test]
    fn compose_diagonal() {
        let c = IwasawaCoords {
            factors: vec![FactorCoords {
                x: Complex64::new(0.0, 0.0),
                t: 1.3,
                k: Compact::identity(FactorKind::Real),
            }],
        };
        match compose(&c).factors()[0] {
            Factor::Real(m) => {
                assert!((m.a - 0.65f64.exp()).abs() < 1e-14);
                assert!((m.d - (-0.65f64).exp()).abs() < 1e-14);
                assert_eq!(m.b, 0.0);
                assert_eq!(m.c, 0.0);
            }
            _ => unreachable!(),
        }
        let id = IwasawaCoords {
            factors: vec![FactorCoords {
                x: Complex64::new(0.0, 0.0),
                t: 0.0,
                k: Compact::identity(FactorKind::Complex),
            }],
        };
        let g = compose(&id);
        assert!(g.max_abs_diff(&GroupPoint::identity(&[FactorKind::Complex])) < 1e-15);
    }

    #[test]
    fn haar_density_values() {
        let mk = |t| IwasawaCoords {
            factors: vec![FactorCoords {
                x: Complex64::new(0.0, 0.0),
                t,
                k: Compact::identity(FactorKind::Real),
            }],
        };
        assert_eq!(haar_density(&mk(0.0)), 1.0);
        assert!((haar_density(&mk(4f64.ln())) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn su2_density_integrates_to_one() {
        // Gauss–Legendre in θ; α, β integrate trivially to (2π)².
        let nodes = crate::quad::gauss_legendre(40);
        let (a, b) = (0.0, PI / 2.0);
        let s: f64 = nodes
            .iter()
            .map(|(x, w)| {
                let th = 0.5 * (b - a) * x + 0.5 * (a + b);
                0.5 * (b - a) * w * complex_compact_density(th)
            })
            .sum();
        assert!((s * 4.0 * PI * PI - 1.0).abs() < 1e-6);
    }

    #[test]
    fn unipotent_values() {
        let y = FlowDirection::ones(1);
        let u = unipotent(3.0, &y, &[FactorKind::Real]).unwrap();
        assert_eq!(u.factors()[0], Factor::Real(Mat2::new(1.0, 0.0, 3.0, 1.0)));
        let u0 = unipotent(0.0, &y, &[FactorKind::Real]).unwrap();
        assert_eq!(u0, GroupPoint::identity(&[FactorKind::Real]));
    }

    #[test]
    fn flow_direction_invariants() {
        assert!(FlowDirection::new(vec![0.0]).is_err());
        assert!(FlowDirection::new(vec![0.5, 0.5]).is_err());
        assert!(FlowDirection::new(vec![1.2, 1.0]).is_err());
        assert!(FlowDirection::new(vec![0.3, 1.0]).is_ok());
    }

    #[test]
    fn cusp_coords_rank_one() {
        let real = compose(&IwasawaCoords {
            factors: vec![FactorCoords {
                x: Complex64::new(0.3, 0.0),
                t: 2.0,
                k: Compact::Real { theta: 1.0 },
            }],
        });
        let c = cusp_coords(&real, &CuspBasis::rank_one(FactorKind::Real)).unwrap();
        assert!((c.tn - 2.0).abs() < 1e-12);
        let cplx = compose(&IwasawaCoords {
            factors: vec![FactorCoords {
                x: Complex64::new(0.3, -0.1),
                t: 2.0,
                k: Compact::Complex {
                    theta: 0.4,
                    alpha: 1.0,
                    beta: 2.0,
                },
            }],
        });
        let basis = CuspBasis::rank_one(FactorKind::Complex);
        let c = cusp_coords(&cplx, &basis).unwrap();
        assert!((c.tn - 4.0).abs() < 1e-12);
        assert!((basis.regulator() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn cusp_coords_rank_two_height_is_weighted_sum() {
        // Q(√2)-like real quadratic setup: one unit-log vector (l, -l).
        let kinds = [FactorKind::Real, FactorKind::Real];
        let l = (1.0 + 2f64.sqrt()).ln();
        let basis = CuspBasis::from_unit_logs(&kinds, &[vec![l, -l]]).unwrap();
        let g = compose(&IwasawaCoords {
            factors: vec![
                FactorCoords {
                    x: Complex64::new(0.1, 0.0),
                    t: 0.7,
                    k: Compact::Real { theta: 0.2 },
                },
                FactorCoords {
                    x: Complex64::new(-0.4, 0.0),
                    t: -1.9,
                    k: Compact::Real { theta: 2.2 },
                },
            ],
        });
        let c = cusp_coords(&g, &basis).unwrap();
        assert!((c.tn - (0.7 - 1.9)).abs() < 1e-12);
        // Recompose D · tvec and compare with the Iwasawa heights.
        let t0 = basis.d[0] * c.tvec[0] + basis.d[1] * c.tvec[1];
        let t1 = basis.d[2] * c.tvec[0] + basis.d[3] * c.tvec[1];
        assert!((t0 - 0.7).abs() < 1e-12 && (t1 + 1.9).abs() < 1e-12);
        assert!((c.regulator - l).abs() < 1e-12);
    }

    #[test]
    fn singular_basis_rejected() {
        let kinds = [FactorKind::Real, FactorKind::Real];
        let basis = CuspBasis::from_unit_logs(&kinds, &[vec![0.5, 0.5]]).unwrap();
        let g = GroupPoint::identity(&kinds);
        assert_eq!(cusp_coords(&g, &basis), Err(Error::SingularD));
    }
}
