use instanton_core::quadrature::tanh_sinh;
use instanton_core::*;
use proptest::prelude::*;

#[test]
fn benchmark_action_matches_reference() {
    // 30-digit reference values of int_{-1}^{1} sqrt(2 V) dx
    let cases = [(0.5, 2.050_703_870_026_539_7), (0.0, 2.058_063_100_350_576_3)];
    for (b, reference) in cases {
        let pot = PolynomialPotential::benchmark(1.0, b).unwrap();
        let s = instanton_action(&pot, -1.0, 1.0).unwrap();
        assert!((s - reference).abs() < 1e-10 * reference, "{b}: {s}");
        let ts = tanh_sinh(|x| (2.0 * pot.value(x)).sqrt(), -1.0, 1.0, 1e-13).unwrap();
        assert!((s - ts.value).abs() < 1e-10 * reference);
    }
}

#[test]
fn asymmetric_benchmark_parameters() {
    let pot = PolynomialPotential::benchmark(1.0, 0.5).unwrap();
    let minima = find_minima(&pot).unwrap();
    let wells: Vec<_> = minima.iter().filter(|m| m.value.abs() < 1e-12).collect();
    assert_eq!(wells.len(), 2);
    let p = well_parameters(&pot, wells[0], wells[1], None, 1.0).unwrap();
    assert!((p.omega0 - 12f64.sqrt()).abs() < 1e-10);
    assert!((p.omega1 - 20f64.sqrt()).abs() < 1e-10);
    assert!((p.delta + 0.5040).abs() < 5e-5);
    assert!(p.coupling.is_none());
    let with_k = well_parameters(&pot, wells[0], wells[1], Some(2.0), 1.0).unwrap();
    assert_eq!(with_k.coupling, Some(2.0 * (-with_k.action.unwrap()).exp()));
}

#[test]
fn json_form() {
    let pot: PolynomialPotential = serde_json::from_str(r#"{"coefficients":[1,0,-2,0,1]}"#).unwrap();
    assert_eq!(pot.coefficients(), &[1.0, 0.0, -2.0, 0.0, 1.0]);
    assert!(serde_json::from_str::<PolynomialPotential>(r#"{"coefficients":[1,0,-1]}"#).is_err());
    assert!(serde_json::from_str::<PolynomialPotential>(r#"{"coefficients":[1,0,0,0,-1]}"#).is_err());
    let text = serde_json::to_string(&pot).unwrap();
    assert_eq!(serde_json::from_str::<PolynomialPotential>(&text).unwrap(), pot);
}

fn benchmark_family() -> impl Strategy<Value = PolynomialPotential> {
    (0.5f64..20.0, -1.9f64..1.9).prop_map(|(l, b)| PolynomialPotential::benchmark(l, b).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn minima_are_refined_roots(pot in benchmark_family()) {
        for m in find_minima(&pot).unwrap() {
            let residual = pot.first_derivative(m.location).abs();
            prop_assert!(residual <= 1e-12 * (1.0f64).max(m.curvature * m.location.abs()).max(pot.scale()));
            prop_assert!(m.curvature >= 0.0);
            prop_assert_eq!(m.frequency, m.curvature.sqrt());
        }
    }

    #[test]
    fn action_is_reflection_invariant(pot in benchmark_family()) {
        let s = instanton_action(&pot, -1.0, 1.0).unwrap();
        let r = instanton_action(&pot.mirrored(), -1.0, 1.0).unwrap();
        prop_assert!((s - r).abs() <= 1e-10 * s);
    }

    #[test]
    fn action_scales_with_root_lambda(pot in benchmark_family(), lambda in 0.1f64..50.0) {
        let s = instanton_action(&pot, -1.0, 1.0).unwrap();
        let scaled = instanton_action(&pot.scaled(lambda).unwrap(), -1.0, 1.0).unwrap();
        prop_assert!((scaled - lambda.sqrt() * s).abs() <= 1e-9 * scaled);
    }

    #[test]
    fn curvatures_follow_the_family_formula(lambda in 0.5f64..20.0, b in -1.9f64..1.9) {
        let pot = PolynomialPotential::benchmark(lambda, b).unwrap();
        let minima = find_minima(&pot).unwrap();
        let at = |x: f64| minima.iter().find(|m| (m.location - x).abs() < 1e-9).unwrap().curvature;
        prop_assert!((at(-1.0) - 8.0 * lambda * (2.0 - b)).abs() <= 1e-9 * at(-1.0));
        prop_assert!((at(1.0) - 8.0 * lambda * (2.0 + b)).abs() <= 1e-9 * at(1.0));
    }
}
