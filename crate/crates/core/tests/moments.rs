use instanton_core::moments::{moment_auto, moment_closed_with};
use instanton_core::*;
use proptest::prelude::*;

fn params(w0: f64, w1: f64, b: f64, t: f64) -> WellParameters {
    WellParameters::new(w0, w1, b, t).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(a.abs()).max(f64::MIN_POSITIVE)
}

/// `exp(d t) (T/2 + t)^n (T/2 - t)^m`, integrated by composite Simpson
/// with many panels; independent of the library's adaptive rules.
fn simpson_stripped(n: i32, m: i32, b: f64, delta: f64, time: f64) -> f64 {
    let half = time / 2.0;
    let f = |t: f64| (delta * t).exp() * (half + t).powi(n) * (half - t).powi(m);
    let panels = 20_000;
    let h = time / panels as f64;
    let mut s = f(-half) + f(half);
    for k in 1..panels {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(-half + k as f64 * h);
    }
    let fact = |k: i32| (1..=k).map(f64::from).product::<f64>();
    s * h / 3.0 * b.powi(n + m + 1) / (fact(n) * fact(m))
}

#[test]
fn quadrature_against_simpson() {
    for (n, m) in [(0, 0), (1, 0), (2, 3), (5, 5)] {
        let p = params(1.0, 2.0, 0.3, 2.0);
        let q = moment_quadrature(MomentKey::new(n, m), &p).unwrap().stripped;
        let s = simpson_stripped(n as i32, m as i32, 0.3, -0.5, 2.0);
        assert!(rel(q, s) < 1e-11, "({n},{m}) {q} {s}");
    }
}

#[test]
fn spec_examples() {
    let p = params(1.0, 2.0, 0.3, 2.0);
    let v = moment_closed(MomentKey::new(0, 0), &p).unwrap();
    assert!((v.stripped - 0.625314).abs() < 5e-7);
    assert!((v.full - 0.139526).abs() < 5e-7);
    let q11 = moment_quadrature(MomentKey::new(1, 1), &p).unwrap().stripped;
    let r = moment_recursive(1, 1, &p).unwrap();
    assert!(rel(r.get(1, 1).unwrap().stripped, q11) < 1e-10);
    let q = moment_quadrature(MomentKey::new(2, 1), &params(1.0, 1.0, 1.0, 2.0)).unwrap();
    assert!((q.stripped - 2.0 / 3.0).abs() < 1e-12);
    let w = params(1.0, 3.0, 0.5, 1.0);
    for i in 0..=6 {
        let key = MomentKey::new(i, i);
        let c = moment_closed(key, &w).unwrap().stripped;
        let q = moment_quadrature(key, &w).unwrap().stripped;
        assert!(rel(c, q) < 1e-8, "{i}");
    }
}

#[test]
fn double_precision_closed_form_on_benign_point() {
    let p = params(1.0, 3.0, 0.5, 5.0);
    let d = moment_closed_with(MomentKey::new(2, 2), &p, Precision::Double).unwrap();
    let q = moment_quadrature(MomentKey::new(2, 2), &p).unwrap();
    assert!(rel(d.stripped, q.stripped) < 1e-10);
}

#[test]
fn decay_bound_on_sweep_grid() {
    for &(w0, w1) in &[(1.0, 2.0), (1.5, 3.0), (2.0, 1.0)] {
        for &b in &[0.1, 0.5, 1.0] {
            for &t in &[1.0, 2.0, 5.0] {
                let p = params(w0, w1, b, t);
                let delta = (w0 - w1) / 2.0f64;
                for i in 0..8 {
                    let a = multi_instanton(i, &p).unwrap().full;
                    let c = multi_instanton(i + 1, &p).unwrap().full;
                    assert!(a > 0.0 && c > 0.0);
                    let k = (2 * i + 2) as f64 * (2 * i + 3) as f64;
                    let bound = (b * t).powi(2) / k * (delta.abs() * t).exp();
                    assert!(c / a < bound, "{w0} {w1} {b} {t} {i}");
                }
            }
        }
    }
}

fn grid_point() -> impl Strategy<Value = WellParameters> {
    let omegas = prop::sample::select(vec![1.0, 1.5, 2.0, 3.0]);
    (
        omegas.clone(),
        omegas,
        prop::sample::select(vec![0.1, 0.5, 1.0]),
        prop::sample::select(vec![1.0, 2.0, 5.0]),
    )
        .prop_filter("distinct frequencies", |(a, b, _, _)| a != b)
        .prop_map(|(w0, w1, b, t)| params(w0, w1, b, t))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn three_way_agreement(p in grid_point(), n in 0usize..=8, m in 0usize..=8) {
        let key = MomentKey::new(n, m);
        let q = moment_quadrature(key, &p).unwrap().stripped;
        let c = moment_closed(key, &p).unwrap().stripped;
        let r = moment_recursive(n, m, &p).unwrap().get(n, m).unwrap().stripped;
        prop_assert!(rel(c, q) < 1e-8, "closed {c} quad {q}");
        prop_assert!(rel(r, q) < 1e-8, "recursive {r} quad {q}");
        prop_assert!(rel(c, r) < 1e-8);
    }

    #[test]
    fn quadrature_satisfies_recursion(p in grid_point(), n in 1usize..=6, m in 1usize..=6) {
        let b = p.b().unwrap();
        let q = |n, m| moment_quadrature(MomentKey::new(n, m), &p).unwrap().stripped;
        let lhs = q(n, m);
        let rhs = b / p.delta * (q(n, m - 1) - q(n - 1, m));
        let scale = lhs.abs().max((b / p.delta * q(n, m - 1)).abs());
        prop_assert!((lhs - rhs).abs() <= 1e-11 * scale);
    }

    #[test]
    fn reflection(p in grid_point(), n in 0usize..=8, m in 0usize..=8) {
        let mirrored = params(p.omega1, p.omega0, p.b().unwrap(), p.time);
        let a = moment_closed(MomentKey::new(n, m), &p).unwrap().stripped;
        let b = moment_closed(MomentKey::new(m, n), &mirrored).unwrap().stripped;
        prop_assert!(rel(a, b) < 1e-14);
        let qa = moment_quadrature(MomentKey::new(n, m), &p).unwrap().stripped;
        let qb = moment_quadrature(MomentKey::new(m, n), &mirrored).unwrap().stripped;
        prop_assert!(rel(qa, qb) < 1e-11);
        let ta = moment_recursive(n, m, &p).unwrap();
        let tb = moment_recursive(m, n, &mirrored).unwrap();
        prop_assert!(rel(ta.get(n, m).unwrap().stripped, tb.get(m, n).unwrap().stripped) < 1e-14);
    }

    #[test]
    fn depends_only_on_scaled_products(p in grid_point(), n in 0usize..=8, m in 0usize..=8) {
        // T -> 2T, B -> B/2, delta -> delta/2 leaves B T and delta T fixed
        let b = p.b().unwrap();
        let scaled = params(p.omega0 / 2.0, p.omega1 / 2.0, b / 2.0, 2.0 * p.time);
        let key = MomentKey::new(n, m);
        let a = moment_closed(key, &p).unwrap().stripped;
        let c = moment_closed(key, &scaled).unwrap().stripped;
        prop_assert!(rel(a, c) < 1e-13);
    }

    #[test]
    fn full_value_carries_prefactor(p in grid_point(), n in 0usize..=8, m in 0usize..=8) {
        let v = moment_closed(MomentKey::new(n, m), &p).unwrap();
        let expected = v.stripped * (-(p.omega0 + p.omega1) * p.time / 4.0).exp();
        prop_assert!(rel(v.full, expected) < 1e-15);
        prop_assert!(v.stripped > 0.0);
    }

    #[test]
    fn symmetric_limit(n in 0usize..=5, m in 0usize..=5, b in 0.1f64..1.0, t in 0.5f64..5.0) {
        // |delta| T = 1e-6
        let delta = 1e-6 / t;
        let p = params(1.0 + delta, 1.0 - delta, b, t);
        let key = MomentKey::new(n, m);
        let s = moment_symmetric(key, b, t, 1.0).unwrap().stripped;
        let c = moment_closed(key, &p).unwrap().stripped;
        let r = moment_recursive(n, m, &p).unwrap().get(n, m).unwrap().stripped;
        prop_assert!(rel(c, s) < 1e-5);
        prop_assert!(rel(r, s) < 1e-5);
        let a = moment_auto(key, &p).unwrap();
        prop_assert_eq!(a.method, Method::SymmetricLimit);
        prop_assert!(rel(a.stripped, c) < 1e-10);
    }
}

#[test]
fn dispatch_regimes_agree_with_quadrature() {
    // one point per regime of |delta| T
    for (w1, t) in [(1.0 + 2e-5, 2.0), (1.02, 2.0), (2.0, 2.0)] {
        let p = params(1.0, w1, 0.3, t);
        for i in 0..5 {
            let a = multi_instanton(i, &p).unwrap();
            let q = moment_quadrature(MomentKey::new(i, i), &p).unwrap();
            assert!(rel(a.full, q.full) < 1e-9, "{w1} {i}: {:?}", a.method);
        }
    }
}

#[test]
fn table_json_round_trips() {
    let p = params(1.0, 2.0, 0.3, 2.0);
    let t = moment_recursive(2, 2, &p).unwrap();
    let json = t.to_json().to_string();
    let back: serde_json::Value = serde_json::from_str(&json).unwrap();
    let entries = back["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 9);
    for (e, (_, v)) in entries.iter().zip(t.iter()) {
        let parsed: f64 = e["stripped"].to_string().parse().unwrap();
        assert_eq!(parsed, v.stripped);
    }
}
