use cuspflow_core::group::FactorKind;
use cuspflow_core::lattice::LatticeSpec;
use cuspflow_core::special::{gamma, ScatteringEvaluator};
use cuspflow_core::spectral::*;
use cuspflow_core::test_function::TestFunction;
use cuspflow_core::Complex64 as C;
use proptest::prelude::*;

/// `P_m(s)` as a ratio of Gamma values.
fn pm_gamma(m: u64, s: C, mu: f64) -> C {
    let one = C::new(1.0, 0.0);
    let (a, b) = ((one - s) * mu, s * mu);
    gamma(a + m as f64) * gamma(b) / (gamma(a) * gamma(b + m as f64))
}

proptest! {
    #[test]
    fn pm_matches_gamma_ratio(m in 0u64..20, sr in 0.52..0.98f64, si in -5.0..5.0f64, complex in any::<bool>()) {
        let (kind, mu) = if complex { (FactorKind::Complex, 2.0) } else { (FactorKind::Real, 1.0) };
        let s = C::new(sr, si);
        let p = pm_eval(&WeightIndex(vec![m as i64]), s, &[kind]).unwrap();
        let q = pm_gamma(m, s, mu);
        prop_assert!((p - q).norm() <= 1e-9 * q.norm().max(1e-12), "{p} {q}");
        let series = pm_series(m as usize, s, kind).unwrap();
        prop_assert!((series[m as usize] - p).norm() <= 1e-12 * p.norm().max(1e-12));
    }

    #[test]
    fn pm_is_a_product_over_factors(m1 in -6i64..6, m2 in 0i64..6, s in 0.55..0.95f64) {
        let s = C::new(s, 0.0);
        let both = pm_eval(&WeightIndex(vec![m1, m2]), s, &[FactorKind::Real, FactorKind::Complex]).unwrap();
        let a = pm_eval(&WeightIndex(vec![m1]), s, &[FactorKind::Real]).unwrap();
        let b = pm_eval(&WeightIndex(vec![m2]), s, &[FactorKind::Complex]).unwrap();
        prop_assert!((both - a * b).norm() <= 1e-13);
    }
}

#[test]
fn pm_special_points() {
    for m in 0..10 {
        let half = pm_eval(&WeightIndex(vec![m]), C::new(0.5, 0.0), &[FactorKind::Real]).unwrap();
        assert!((half - 1.0).norm() < 1e-15);
        let one = pm_eval(&WeightIndex(vec![m]), C::new(1.0, 0.0), &[FactorKind::Real]).unwrap();
        assert_eq!(one.norm(), if m == 0 { 1.0 } else { 0.0 });
    }
    assert!(pm_eval(&WeightIndex(vec![-1]), C::new(0.5, 0.0), &[FactorKind::Complex]).is_err());
}

#[test]
fn pm_decays_like_a_power() {
    for s in [0.6, 0.75, 0.9] {
        let (lo, hi) = pm_asymptotic_check(s, 2000, FactorKind::Real).unwrap();
        assert!(lo > 0.0 && hi / lo < 10.0, "s={s} {lo} {hi}");
    }
}

#[test]
fn operator_identities_hold() {
    use rand_chacha::rand_core::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
    for m in 0..4 {
        for s in [0.6, 0.75] {
            let r = operator_identity_check(C::new(s, 0.0), m, FactorKind::Real, 20, 1e-3, &mut rng).unwrap();
            assert!(r.raising_residual < 1e-6 && r.lowering_residual < 1e-6, "{r:?}");
            let c = operator_identity_check(C::new(s, 0.0), m, FactorKind::Complex, 20, 1e-3, &mut rng).unwrap();
            assert!(c.kappa_spread < 1e-5, "{c:?}");
        }
    }
}

#[test]
fn mf_is_positive_and_increasing_in_lambda() {
    let mut prev = 0.0;
    for lambda in [8.0, 32.0] {
        let f = TestFunction::real_family(lambda, 0.2).unwrap();
        let v = mf_eval(&f, 0.75).unwrap();
        assert!(v.value > prev, "{v:?}");
        prev = v.value;
    }
}

#[test]
fn spectral_norm_dominates_the_squared_mean() {
    // ‖Θ_f‖² ≥ (∫Θ_f)² = (c0 ∫f)² by Cauchy–Schwarz on a probability space.
    let l = LatticeSpec::modular();
    let f = TestFunction::real_family(4.0, 0.2).unwrap();
    let rep = spectral_theta_norm(&f, &ScatteringEvaluator::modular(), &l).unwrap();
    let mean = l.c0 * f.integral();
    assert!(rep.total >= mean * mean, "{} {}", rep.total, mean * mean);
}
