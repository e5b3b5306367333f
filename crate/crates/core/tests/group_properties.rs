use cuspflow_core::group::*;
use cuspflow_core::Complex64;
use proptest::prelude::*;

fn real_from_entries(a: f64, b: f64, c: f64) -> Mat2<f64> {
    Mat2::new(a, b, c, (1.0 + b * c) / a)
}

fn complex_from_entries(a: Complex64, b: Complex64, c: Complex64) -> Mat2<Complex64> {
    Mat2::new(a, b, c, (Complex64::new(1.0, 0.0) + b * c) / a)
}

fn small() -> impl Strategy<Value = f64> {
    -3.0..3.0f64
}

fn away_from_zero() -> impl Strategy<Value = f64> {
    prop_oneof![0.2..3.0f64, -3.0..-0.2f64]
}

proptest! {
    #[test]
    fn real_iwasawa_round_trip(a in away_from_zero(), b in small(), c in small()) {
        let g = GroupPoint::real(real_from_entries(a, b, c)).unwrap();
        let back = compose(&iwasawa_decompose(&g));
        prop_assert!(g.max_abs_diff(&back) <= 1e-10 * (1.0 + b.abs() + c.abs()).powi(2));
    }

    #[test]
    fn complex_iwasawa_round_trip(
        ar in away_from_zero(), ai in small(), br in small(), bi in small(), cr in small(), ci in small(),
    ) {
        let m = complex_from_entries(Complex64::new(ar, ai), Complex64::new(br, bi), Complex64::new(cr, ci));
        let g = GroupPoint::complex(m).unwrap();
        let co = iwasawa_decompose(&g);
        let f = co.factors[0];
        // t is -log of the bottom-row norm.
        prop_assert!((f.t + (m.c.norm_sqr() + m.d.norm_sqr()).ln()).abs() <= 1e-12 * (1.0 + f.t.abs()));
        let back = compose(&co);
        let scale = m.a.norm().max(m.b.norm()).max(m.c.norm()).max(m.d.norm());
        prop_assert!(g.max_abs_diff(&back) <= 1e-10 * scale * scale);
    }

    #[test]
    fn coordinates_round_trip(x in -5.0..5.0f64, t in -6.0..6.0f64, th in 0.0..6.28f64) {
        let co = IwasawaCoords {
            factors: vec![FactorCoords { x: Complex64::new(x, 0.0), t, k: Compact::Real { theta: th } }],
        };
        let again = iwasawa_decompose(&compose(&co)).factors[0];
        prop_assert!((again.x.re - x).abs() <= 1e-9 * (1.0 + x.abs()));
        prop_assert!((again.t - t).abs() <= 1e-9);
        let Compact::Real { theta } = again.k else { unreachable!() };
        prop_assert!(wrap_angle(theta - th).min(wrap_angle(th - theta)) <= 1e-9);
    }

    #[test]
    fn flow_is_a_one_parameter_group(s in -50.0..50.0f64, u in -50.0..50.0f64) {
        let y = FlowDirection::new(vec![0.7, 1.0]).unwrap();
        let kinds = [FactorKind::Real, FactorKind::Complex];
        let lhs = unipotent(s, &y, &kinds).unwrap().mul(&unipotent(u, &y, &kinds).unwrap()).unwrap();
        let rhs = unipotent(s + u, &y, &kinds).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-12 * (1.0 + s.abs() + u.abs()));
    }
}

#[test]
fn flow_direction_rejects_zero() {
    assert!(FlowDirection::new(vec![0.0]).is_err());
    assert!(FlowDirection::new(vec![]).is_err());
}

#[test]
fn complex_compact_density_integrates_to_one() {
    // ∫_0^{π/2} |sin 2θ| dθ · (2π)² over the (α, β) torus.
    let n = 20_000;
    let h = core::f64::consts::FRAC_PI_2 / n as f64;
    let s: f64 = (0..n).map(|i| complex_compact_density((i as f64 + 0.5) * h) * h).sum();
    let total = s * (2.0 * core::f64::consts::PI).powi(2);
    assert!((total - 1.0).abs() < 1e-6, "{total}");
}
