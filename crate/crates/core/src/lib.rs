//! Cusp geometry, incomplete theta series and unipotent-flow cusp excursions
//! on `Γ\G` for `G = SL2(R)` and `G = SL2(C)`.
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is a pure
//! function of its inputs; Monte Carlo routines take a caller-owned
//! [`rand_core::RngCore`] stream, so a driver can split one master seed into
//! per-worker streams and merge the returned [`stats::Accumulator`]s in a
//! fixed order.
//!
//! Module map:
//!
//! - [`group`]: 2×2 matrices, Iwasawa and cusp coordinates, Haar densities,
//!   the unipotent flow.
//! - [`lattice`]: `SL2(Z)`, `SL2(Z[i])` and `Γ0(N)`; reduction into a
//!   fundamental domain, the distance-like function `Δ`, coset enumeration
//!   for `Γ∞\Γ`, Haar sampling of `Γ\G`.
//! - [`special`]: complex Gamma, ζ, `L(s, χ₋₄)` and the scattering constant.
//! - [`bump`]: the smooth cut-off family `v_λ` and its shifted Fourier
//!   transform.
//! - [`spectral`]: `P_m(s)`, `M_f(s)`, weight projections and the spectral
//!   expression for `‖Θ_f‖²`.
//! - [`theta`]: coset-sum evaluation of `Θ_f`, the unfolded Monte Carlo norm,
//!   Siegel's mean value formula.
//! - [`dynamics`]: orbits, shrinking targets, the sets `D_k` and `Y_{D_k}`.
#![no_std]
#![allow(clippy::many_single_char_names)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bump;
pub mod dynamics;
pub mod error;
pub mod gaussian;
pub mod group;
pub mod lattice;
pub mod linalg;
pub mod quad;
pub mod rng;
pub mod special;
pub mod spectral;
pub mod stats;
pub mod test_function;
pub mod theta;

pub use error::{Error, Result};
pub use num_complex::Complex64;
