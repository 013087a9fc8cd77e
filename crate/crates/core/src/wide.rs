//! Arbitrary-precision binary floats for the cancellation-prone paths.
//!
//! The closed form and the recursion subtract quantities that agree to many
//! more digits than `f64` carries once `|delta| T` is small compared with
//! `n + m`. Both are evaluated here at a working precision chosen from the
//! observed cancellation.

use dashu_float::round::mode::HalfEven;
use dashu_float::FBig;
use dashu_int::ops::BitTest;
use dashu_int::{IBig, UBig};
use num_bigint::BigInt;
use num_rational::BigRational;

pub(crate) type Wide = FBig<HalfEven, 2>;

/// Precision ceiling; past this the computation is abandoned.
pub(crate) const MAX_BITS: usize = 1 << 14;

pub(crate) fn from_f64(x: f64, bits: usize) -> Wide {
    Wide::try_from(x)
        .expect("finite input")
        .with_precision(bits)
        .value()
}

pub(crate) fn from_u128(x: u128, bits: usize) -> Wide {
    Wide::from(UBig::from(x)).with_precision(bits).value()
}

pub(crate) fn zero(bits: usize) -> Wide {
    Wide::ZERO.with_precision(bits).value()
}

pub(crate) fn from_bigint(x: &BigInt, bits: usize) -> Wide {
    let (sign, bytes) = x.to_bytes_le();
    let magnitude = IBig::from(UBig::from_le_bytes(&bytes));
    let signed = if sign == num_bigint::Sign::Minus {
        -magnitude
    } else {
        magnitude
    };
    Wide::from(signed).with_precision(bits).value()
}

pub(crate) fn from_rational(x: &BigRational, bits: usize) -> Wide {
    from_bigint(x.numer(), bits + 8) / from_bigint(x.denom(), bits + 8)
}

pub(crate) fn to_f64(x: &Wide) -> f64 {
    x.to_f64().value()
}

/// `log2 |x|`, accurate to about one unit; `-inf` for zero.
pub(crate) fn log2_abs(x: &Wide) -> f64 {
    let repr = x.repr();
    if repr.is_zero() {
        return f64::NEG_INFINITY;
    }
    repr.exponent() as f64 + repr.significand().bit_len() as f64
}
