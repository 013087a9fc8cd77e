//! Deterministic float printing for machine-readable output.

use serde::Serializer;

/// Formats `x` with 17 significant digits, enough to round-trip any `f64`.
pub fn sig17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "NaN".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

/// Formats `x` with 6 significant digits for human-readable tables.
pub fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    if (-4..6).contains(&magnitude) {
        let decimals = (5 - magnitude).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.5e}")
    }
}

/// `serialize_with` adapter emitting a JSON number with 17 significant digits.
pub fn serialize_sig17<S: Serializer>(x: &f64, serializer: S) -> Result<S::Ok, S::Error> {
    use serde::Serialize;
    if x.is_finite() {
        serde_json::Number::from_string_unchecked(sig17(*x)).serialize(serializer)
    } else {
        serializer.serialize_none()
    }
}

pub fn serialize_sig17_vec<S: Serializer>(xs: &[f64], serializer: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    struct Wrap(f64);
    impl serde::Serialize for Wrap {
        fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
            serialize_sig17(&self.0, s)
        }
    }
    let mut seq = serializer.serialize_seq(Some(xs.len()))?;
    for &x in xs {
        seq.serialize_element(&Wrap(x))?;
    }
    seq.end()
}

pub fn serialize_sig17_opt<S: Serializer>(x: &Option<f64>, serializer: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(v) => serialize_sig17(v, serializer),
        None => serializer.serialize_none(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig17_round_trips() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            assert_eq!(sig17(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn sig6_table_style() {
        assert_eq!(sig6(0.359488_2), "0.359488");
        assert_eq!(sig6(1.1405117), "1.14051");
        assert_eq!(sig6(2.0e-9), "2.00000e-9");
    }
}
