use instanton_core::triangle::{
    a0_closed, a1_closed, exponential_amplitudes, exponential_rates, format_ratio, parse_ratio,
    ratio_of, verify_relations,
};
use instanton_core::*;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use proptest::prelude::*;

fn to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap()
}

#[test]
fn closed_form_equals_triangle_at_spec_ratios() {
    for (p, q) in [(1, 3), (2, 5), (7, 2), (3, 7)] {
        let r = ratio_of(p, q);
        let t = build_triangle(10, r.clone()).unwrap();
        for n in 0..=10 {
            for m in 0..=10 - n {
                assert_eq!(
                    closed_form_coefficients(MomentKey::new(n, m), &r),
                    t.entry(n, m).unwrap()
                );
            }
        }
    }
}

#[test]
fn floating_evaluation_matches_recursion() {
    let p = WellParameters::new(1.0, 2.0, 0.3, 2.0).unwrap();
    let table = moment_recursive(6, 6, &p).unwrap();
    // the exact rational value of the f64 ratio the recursion works with
    let t = build_triangle(12, BigRational::from_float(0.3f64 / -0.5).unwrap()).unwrap();
    for n in 0..=6 {
        for m in 0..=6 {
            let e = t.evaluate_stripped(n, m, 0.6, -0.5).unwrap();
            let r = table.get(n, m).unwrap().stripped;
            assert!((e - r).abs() <= 1e-12 * r.abs(), "({n},{m}) {e} {r}");
        }
    }
}

#[test]
fn recurrence_on_central_sequence() {
    // a_{i-1}, a_i summed to order k, a_{i+1} to order k - 1
    let r = ratio_of(2, 5);
    let t = build_triangle(24, r.clone()).unwrap();
    let inv = r.recip();
    for i in 1..=8 {
        let k = (24 - 2 * (i + 1)) / 2 + 2;
        let a = |j: usize, order: usize| column_coefficients(&t, j, j, order).unwrap();
        for sign in [Sign::Plus, Sign::Minus] {
            let prev = a(i - 1, k).coefficient(sign, i - 1);
            let here = a(i, k).coefficient(sign, i);
            let next = a(i + 1, k - 1).coefficient(sign, i + 1);
            let step = here * &inv;
            let predicted = if sign == Sign::Plus { prev - step } else { prev + step };
            assert_eq!(next, predicted, "{i} {sign:?}");
        }
    }
    let report = verify_relations(&build_triangle(12, r).unwrap());
    assert_eq!(report.total_failures(), 0);
}

#[test]
fn central_values_match_closed_forms() {
    let t = build_triangle(24, ratio_of(1, 4)).unwrap();
    let (plus, _) = central_sequence(&t, 1).unwrap();
    // depth 24 truncates the columns; the first omitted term is ~6e-10
    assert!((to_f64(&plus[0]) - a0_closed(0.25)).abs() < 1e-8);
    assert!((to_f64(&plus[1]) - a1_closed(0.25)).abs() < 1e-8);
    assert!((a1_closed(0.25) - 0.052786).abs() < 5e-7);
    assert!((a0_closed(0.5) - 0.353553).abs() < 5e-7);
}

#[test]
fn generating_function_is_one_exponential() {
    for (p, q) in [(1, 10), (1, 8), (-1, 8)] {
        let x = p as f64 / q as f64;
        let t = build_triangle(24, ratio_of(p, q)).unwrap();
        let (plus, _) = central_sequence(&t, 12).unwrap();
        let (alpha_plus, alpha_minus) = exponential_rates(x);
        let (c_plus, c_minus) = exponential_amplitudes(x);
        // only the exponential with |alpha| < 1 survives; the other amplitude
        // vanishes analytically and its float residue would grow like alpha^i
        let (c, alpha, c_zero) = if x > 0.0 {
            (c_plus, alpha_plus, c_minus)
        } else {
            (c_minus, alpha_minus, c_plus)
        };
        assert!(c_zero.abs() < 1e-15);
        for bt in [-3.0, -1.0, 0.5, 1.0, 2.0, 3.0f64] {
            let mut sum = 0.0;
            let mut power = 1.0;
            for (i, a) in plus.iter().enumerate() {
                if i > 0 {
                    power *= bt / i as f64;
                }
                sum += to_f64(a) * power;
            }
            let expected = c * (alpha * bt).exp();
            assert!((sum - expected).abs() < 1e-10, "x={x} bt={bt}: {sum} {expected}");
        }
    }
}

#[test]
fn series_against_closed_forms() {
    for x in [0.1, 0.25, 0.4] {
        let s = series_a0_a1(x, 200).unwrap();
        assert!(s.converged);
        assert!((s.a0 - 1.0 / (2.0 * (1.0 + (1.0 / (2.0 * x)).powi(2)).sqrt())).abs() < 1e-10);
        assert!((s.a1 - (0.5 - 1.0 / (2.0 * (1.0 + (2.0 * x).powi(2)).sqrt()))).abs() < 1e-10);
    }
    assert!(!series_a0_a1(0.5, 200).unwrap().converged);
}

#[test]
fn report_json() {
    let t = build_triangle(6, parse_ratio("2/5").unwrap()).unwrap();
    let report = verify_relations(&t);
    let json = serde_json::to_value(&report).unwrap();
    assert_eq!(json["depth"], 6);
    assert_eq!(json["ratio"], "2/5");
    assert_eq!(json["families"].as_array().unwrap().len(), 4);
    assert_eq!(json["families"][0]["failures"], 0);
    assert_eq!(format_ratio(&ratio_of(-4, 6)), "-2/3");
}

fn small_ratio() -> impl Strategy<Value = (i64, i64)> {
    (-9i64..=9, 1i64..=9).prop_filter("non-zero", |(p, _)| *p != 0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn relations_hold_exactly((p, q) in small_ratio(), depth in 2usize..=10) {
        let t = build_triangle(depth, ratio_of(p, q)).unwrap();
        let report = verify_relations(&t);
        prop_assert_eq!(report.total_failures(), 0, "{}", report);
    }

    #[test]
    fn mirror_symmetry((p, q) in small_ratio()) {
        // a_i^-(r) = a_i^+(-r), with no extra sign
        let t = build_triangle(12, ratio_of(p, q)).unwrap();
        let u = build_triangle(12, ratio_of(-p, q)).unwrap();
        let (_, minus) = central_sequence(&t, 6).unwrap();
        let (plus, _) = central_sequence(&u, 6).unwrap();
        prop_assert_eq!(minus, plus);
    }

    #[test]
    fn interior_rule((p, q) in small_ratio(), n in 1usize..6, m in 1usize..6) {
        let r = ratio_of(p, q);
        let t = build_triangle(12, r.clone()).unwrap();
        let here = t.plus_weights(n, m).unwrap();
        let left = t.plus_weights(n, m - 1).unwrap();
        let up = t.plus_weights(n - 1, m).unwrap();
        for j in 0..=n {
            let l = left.get(j).cloned().unwrap_or_default();
            let u = up.get(j).cloned().unwrap_or_default();
            prop_assert_eq!(&here[j], &(&r * (l - u)));
        }
    }
}
