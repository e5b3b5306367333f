use core::f64::consts::PI;

use cuspflow_core::lattice::{LatticeSpec, CATALAN};
use cuspflow_core::special::*;
use cuspflow_core::Complex64 as C;
use proptest::prelude::*;

const APERY: f64 = 1.202_056_903_159_594_3;
const ZETA_HALF: f64 = -1.460_354_508_809_586_8;
const FIRST_ZERO: f64 = 14.134_725_141_734_693;

fn re(x: f64) -> C {
    C::new(x, 0.0)
}

#[test]
fn zeta_known_values() {
    assert!((zeta(re(2.0)).unwrap().re - PI * PI / 6.0).abs() < 1e-13);
    assert!((zeta(re(4.0)).unwrap().re - PI.powi(4) / 90.0).abs() < 1e-13);
    assert!((zeta(re(3.0)).unwrap().re - APERY).abs() < 1e-13);
    assert!((zeta(re(0.5)).unwrap().re - ZETA_HALF).abs() < 1e-12);
    assert!(zeta(C::new(0.5, FIRST_ZERO)).unwrap().norm() < 1e-9);
}

#[test]
fn dirichlet_l_known_values() {
    assert!((l_chi4(re(1.0)).re - PI / 4.0).abs() < 1e-12);
    assert!((l_chi4(re(2.0)).re - CATALAN).abs() < 1e-13);
    // L(3, χ₋₄) = π³/32.
    assert!((l_chi4(re(3.0)).re - PI.powi(3) / 32.0).abs() < 1e-13);
}

#[test]
fn gamma_known_values() {
    assert!((gamma(re(5.0)).re - 24.0).abs() < 1e-11);
    assert!((gamma(re(0.5)).re - PI.sqrt()).abs() < 1e-13);
    // |Γ(1 + i y)|² = π y / sinh(π y).
    for y in [0.5, 3.0, 12.0] {
        let g = gamma(C::new(1.0, y)).norm_sqr();
        let want = PI * y / (PI * y).sinh();
        assert!((g - want).abs() < 1e-11 * want, "y={y}");
    }
}

#[test]
fn residues_at_one() {
    let r = numeric_residue(scattering_modular).unwrap();
    assert!((r - 3.0 / PI).abs() < 1e-6, "{r}");
    assert!((LatticeSpec::modular().c0 - 3.0 / PI).abs() < 1e-15);
    // Class number formula for Q(i): Res_{w=1} ζ_K = π/4, so C has residue
    // π (π/8) / ζ_K(2) = 3 / (4 G).
    let r = numeric_residue(scattering_gaussian).unwrap();
    let want = 3.0 / (4.0 * CATALAN);
    assert!((r - want).abs() < 1e-6 * want, "{r} {want}");
    assert!((LatticeSpec::bianchi().c0 - want).abs() < 1e-9 * want);
}

#[test]
fn no_exceptional_zero_of_the_denominator() {
    // ξ(2 - 2s) < 0 < ξ(2s) on (½, 1): C stays finite and negative there.
    for i in 1..50 {
        let s = 0.5 + 0.5 * i as f64 / 50.0;
        let c = scattering_modular(re(s)).unwrap();
        assert!(c.re.is_finite() && c.re < 0.0 && c.im.abs() < 1e-12, "s={s}");
    }
}

proptest! {
    #[test]
    fn scattering_is_unitary_on_the_line(r in 0.1..20.0f64) {
        let c = scattering_modular(C::new(0.5, r)).unwrap();
        prop_assert!((c.norm() - 1.0).abs() < 1e-9);
        let c = scattering_gaussian(C::new(0.5, r)).unwrap();
        prop_assert!((c.norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn functional_equation(sr in 0.55..0.95f64, si in -8.0..8.0f64) {
        let s = C::new(sr, si);
        let one = C::new(1.0, 0.0);
        for f in [scattering_modular as fn(C) -> cuspflow_core::Result<C>, scattering_gaussian] {
            let p = f(s).unwrap() * f(one - s).unwrap();
            prop_assert!((p - one).norm() < 1e-9, "{p}");
        }
    }

    #[test]
    fn gamma_recurrence(x in 0.2..10.0f64, y in -10.0..10.0f64) {
        let z = C::new(x, y);
        let lhs = gamma(z + 1.0);
        let rhs = z * gamma(z);
        prop_assert!((lhs - rhs).norm() <= 1e-11 * rhs.norm().max(1e-300));
    }
}
