//! The integral family
//!
//! ```text
//! I(n, m) = B^(n+m+1) exp(-(w0 + w1) T / 4)
//!           * int_{-T/2}^{T/2} exp(delta t) (T/2 + t)^n / n! (T/2 - t)^m / m! dt
//! ```
//!
//! with `delta = (w0 - w1) / 2`. The `(2i+1)`-instanton contribution is
//! `M_i = I(i, i)`.
//!
//! Values are carried in two forms: `stripped`, without the common
//! exponential `exp(-(w0 + w1) T / 4)`, and `full`, with it. The recursion
//! and the triangle work with stripped values; the path-counting closed form
//! is naturally written with `exp(-w0 T / 2) = prefactor * exp(-delta T / 2)`
//! and `exp(-w1 T / 2) = prefactor * exp(+delta T / 2)`.
//!
//! Both the recursion and the closed form alternate in sign with powers of
//! `B / delta`, so they lose roughly `(n + m) log2(2 |B / delta|)` bits to
//! cancellation. They are evaluated in extended precision sized from the
//! cancellation actually observed; see [`Precision`].

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::{serialize_sig17, sig17};
use crate::potential::WellParameters;
use crate::quadrature::gauss_kronrod;
use crate::wide::{self, Wide};

/// Largest `n` or `m` accepted by every evaluation path.
pub const DEPTH_CAP: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MomentKey {
    pub n: usize,
    pub m: usize,
}

impl MomentKey {
    pub fn new(n: usize, m: usize) -> Self {
        Self { n, m }
    }

    fn check_cap(self) -> Result<Self> {
        let largest = self.n.max(self.m);
        if largest > DEPTH_CAP {
            return Err(Error::DepthExceeded {
                requested: largest,
                cap: DEPTH_CAP,
            });
        }
        Ok(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Closed,
    Recursive,
    Quadrature,
    SymmetricLimit,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Closed => "closed",
            Method::Recursive => "recursive",
            Method::Quadrature => "quadrature",
            Method::SymmetricLimit => "symmetric-limit",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentValue {
    #[serde(serialize_with = "serialize_sig17")]
    pub stripped: f64,
    #[serde(serialize_with = "serialize_sig17")]
    pub full: f64,
    pub method: Method,
}

impl MomentValue {
    fn new(stripped: f64, prefactor: f64, method: Method) -> Self {
        Self {
            stripped,
            full: stripped * prefactor,
            method,
        }
    }
}

/// Working precision for the cancellation-prone evaluations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Precision {
    /// Plain `f64` with compensated summation; fails on cancellation.
    Double,
    /// A fixed number of significand bits.
    Extended(usize),
    /// Raise the precision until the result keeps at least 80 bits.
    #[default]
    Auto,
}

fn coupling(params: &WellParameters) -> Result<f64> {
    let b = params.b()?;
    if !(b > 0.0) {
        return Err(Error::InvalidParameter {
            name: "B",
            reason: "must be positive for this evaluation".into(),
        });
    }
    Ok(b)
}

fn check_delta(params: &WellParameters, b: f64) -> Result<()> {
    if params.delta == 0.0 || !(b / params.delta).is_finite() {
        return Err(Error::SmallDelta {
            delta: params.delta,
        });
    }
    Ok(())
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// `x^k / k!` for `k = 0..=len-1`, built by repeated multiplication.
fn scaled_powers(x: f64, len: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(len);
    let mut term = 1.0;
    for k in 0..len {
        if k > 0 {
            term *= x / k as f64;
        }
        out.push(term);
    }
    out
}

/// Direct numerical integration; the reference the other paths are judged by.
pub fn moment_quadrature(key: MomentKey, params: &WellParameters) -> Result<MomentValue> {
    let key = key.check_cap()?;
    let b = coupling(params)?;
    let (n, m) = (key.n as i32, key.m as i32);
    let half = params.time / 2.0;
    let delta = params.delta;
    let integrand = |t: f64| (delta * t).exp() * (half + t).powi(n) * (half - t).powi(m);
    let integral = gauss_kronrod(integrand, -half, half, 0.0, 1e-13)?;
    // B^(n+m+1) / (n! m!)
    let factor = scaled_powers(b, key.n + 1)[key.n]
        * scaled_powers(b, key.m + 1)[key.m]
        * b;
    Ok(MomentValue::new(
        integral.value * factor,
        params.prefactor_exponential(),
        Method::Quadrature,
    ))
}

/// `delta = 0`: the integral is a Beta function,
/// `stripped = (B T)^(n+m+1) / (n+m+1)!`, and the full value carries
/// `exp(-omega T / 2)`.
pub fn moment_symmetric(key: MomentKey, b: f64, time: f64, omega: f64) -> Result<MomentValue> {
    let key = key.check_cap()?;
    if !(b >= 0.0) || !(time > 0.0) || !(omega > 0.0) {
        return Err(Error::InvalidParameter {
            name: "B",
            reason: format!("need B >= 0, T > 0, omega > 0; got {b}, {time}, {omega}"),
        });
    }
    let order = key.n + key.m + 1;
    let stripped = scaled_powers(b * time, order + 1)[order];
    Ok(MomentValue::new(
        stripped,
        (-omega * time / 2.0).exp(),
        Method::SymmetricLimit,
    ))
}

/// Terms of the closed form in extended precision: returns the sum and
/// `log2` of the largest term.
fn closed_wide(key: MomentKey, b: f64, delta: f64, time: f64, bits: usize) -> (Wide, f64) {
    let (n, m) = (key.n, key.m);
    let wb = wide::from_f64(b, bits);
    let wd = wide::from_f64(delta, bits);
    let ratio = &wb / &wd;
    let bt = &wb * wide::from_f64(time, bits);
    let half_dt = &wd * wide::from_f64(time, bits) / wide::from_f64(2.0, bits);
    let plus_exp = half_dt.exp();
    let minus_exp = (-half_dt).exp();

    let top = n + m + 1;
    let mut ratio_pow = Vec::with_capacity(top + 1);
    ratio_pow.push(wide::from_f64(1.0, bits));
    for k in 1..=top {
        let next = &ratio_pow[k - 1] * &ratio;
        ratio_pow.push(next);
    }
    let mut bt_scaled = Vec::with_capacity(n.max(m) + 1);
    bt_scaled.push(wide::from_f64(1.0, bits));
    for k in 1..=n.max(m) {
        let next = &bt_scaled[k - 1] * &bt / wide::from_u128(k as u128, bits);
        bt_scaled.push(next);
    }

    let mut sum = wide::zero(bits);
    let mut max_log = f64::NEG_INFINITY;
    let mut add = |term: Wide, sum: &mut Wide| {
        max_log = max_log.max(wide::log2_abs(&term));
        *sum += term;
    };
    // exp(+delta T / 2) branch: paths from the I(n', 0) side.
    for i in 0..=n {
        let mut term = wide::from_u128(binomial(m + n - i, m), bits)
            * &ratio_pow[n + m - i + 1]
            * &bt_scaled[i]
            * &plus_exp;
        if (n - i) % 2 == 1 {
            term = -term;
        }
        add(term, &mut sum);
    }
    // exp(-delta T / 2) branch: paths from the I(0, m') side.
    for j in 0..=m {
        let mut term = wide::from_u128(binomial(m + n - j, n), bits)
            * &ratio_pow[n + m - j + 1]
            * &bt_scaled[j]
            * &minus_exp;
        if (n + 1) % 2 == 1 {
            term = -term;
        }
        add(term, &mut sum);
    }
    (sum, max_log)
}

fn closed_double(key: MomentKey, b: f64, delta: f64, time: f64) -> (f64, f64) {
    let (n, m) = (key.n, key.m);
    let ratio = b / delta;
    let half_dt = delta * time / 2.0;
    let bt = scaled_powers(b * time, n.max(m) + 1);
    let mut terms = Vec::with_capacity(n + m + 2);
    for i in 0..=n {
        let sign = if (n - i) % 2 == 1 { -1.0 } else { 1.0 };
        terms.push(
            sign * binomial(m + n - i, m) as f64
                * ratio.powi((n + m - i + 1) as i32)
                * bt[i]
                * half_dt.exp(),
        );
    }
    for j in 0..=m {
        let sign = if (n + 1) % 2 == 1 { -1.0 } else { 1.0 };
        terms.push(
            sign * binomial(m + n - j, n) as f64
                * ratio.powi((n + m - j + 1) as i32)
                * bt[j]
                * (-half_dt).exp(),
        );
    }
    // Neumaier summation
    let (mut sum, mut compensation) = (0.0f64, 0.0f64);
    for &t in &terms {
        let s = sum + t;
        compensation += if sum.abs() >= t.abs() {
            (sum - s) + t
        } else {
            (t - s) + sum
        };
        sum = s;
    }
    let largest = terms.iter().fold(0.0f64, |a, t| a.max(t.abs()));
    (sum + compensation, largest)
}

/// Path-counting closed form of `I(n, m)` at the requested precision.
pub fn moment_closed_with(
    key: MomentKey,
    params: &WellParameters,
    precision: Precision,
) -> Result<MomentValue> {
    let key = key.check_cap()?;
    let b = params.b()?;
    let prefactor = params.prefactor_exponential();
    if b == 0.0 {
        return Ok(MomentValue::new(0.0, prefactor, Method::Closed));
    }
    check_delta(params, b)?;
    let (delta, time) = (params.delta, params.time);
    let stripped = match precision {
        Precision::Double => {
            let (sum, largest) = closed_double(key, b, delta, time);
            let ratio = sum.abs() / largest;
            if ratio < 1e-10 {
                return Err(Error::Cancellation { ratio });
            }
            sum
        }
        Precision::Extended(bits) => {
            let (sum, max_log) = closed_wide(key, b, delta, time, bits);
            let lost = max_log - wide::log2_abs(&sum);
            if bits as f64 - lost < 53.0 {
                return Err(Error::Cancellation {
                    ratio: (-lost).exp2(),
                });
            }
            wide::to_f64(&sum)
        }
        Precision::Auto => {
            let mut bits = 128;
            loop {
                let (sum, max_log) = closed_wide(key, b, delta, time, bits);
                let lost = max_log - wide::log2_abs(&sum);
                if lost.is_finite() && bits as f64 - lost >= 80.0 {
                    break wide::to_f64(&sum);
                }
                let next = if lost.is_finite() {
                    ((lost + 128.0) as usize).next_multiple_of(64)
                } else {
                    bits * 2
                };
                if next > wide::MAX_BITS {
                    return Err(Error::Cancellation {
                        ratio: (-lost).exp2(),
                    });
                }
                bits = next.max(bits + 64);
            }
        }
    };
    Ok(MomentValue::new(stripped, prefactor, Method::Closed))
}

/// Path-counting closed form, evaluated at automatically chosen precision.
pub fn moment_closed(key: MomentKey, params: &WellParameters) -> Result<MomentValue> {
    moment_closed_with(key, params, Precision::Auto)
}

fn recursive_wide(max_n: usize, max_m: usize, b: f64, delta: f64, time: f64, bits: usize) -> Vec<Wide> {
    let wb = wide::from_f64(b, bits);
    let wd = wide::from_f64(delta, bits);
    let ratio = &wb / &wd;
    let bt = &wb * wide::from_f64(time, bits);
    let half_dt = &wd * wide::from_f64(time, bits) / wide::from_f64(2.0, bits);
    let plus_exp = half_dt.exp();
    let minus_exp = (-half_dt).exp();
    let width = max_m + 1;
    let mut table: Vec<Wide> = Vec::with_capacity((max_n + 1) * width);
    // (B T)^k / k! along the edges
    let mut edge = vec![wide::from_f64(1.0, bits)];
    for k in 1..=max_n.max(max_m) {
        let next = &edge[k - 1] * &bt / wide::from_u128(k as u128, bits);
        edge.push(next);
    }
    for n in 0..=max_n {
        for m in 0..=max_m {
            let value = match (n, m) {
                (0, 0) => &ratio * (&plus_exp - &minus_exp),
                (n, 0) => &ratio * (&plus_exp * &edge[n] - &table[(n - 1) * width]),
                (0, m) => &ratio * (&table[m - 1] - &minus_exp * &edge[m]),
                (n, m) => &ratio * (&table[n * width + m - 1] - &table[(n - 1) * width + m]),
            };
            table.push(value);
        }
    }
    table
}

/// Fills `I(n, m)` for `n <= max_n`, `m <= max_m` with the
/// integration-by-parts recursion:
///
/// ```text
/// I(0,0) = (B/d) [e^{dT/2} - e^{-dT/2}]
/// I(n,0) = (B/d) [e^{dT/2} (BT)^n/n! - I(n-1,0)]
/// I(0,m) = (B/d) [I(0,m-1) - e^{-dT/2} (BT)^m/m!]
/// I(n,m) = (B/d) [I(n,m-1) - I(n-1,m)]
/// ```
///
/// The table is recomputed with 64 extra bits until two passes agree to
/// better than `f64` resolution.
pub fn moment_recursive(max_n: usize, max_m: usize, params: &WellParameters) -> Result<MomentTable> {
    MomentKey::new(max_n, max_m).check_cap()?;
    let b = coupling(params)?;
    check_delta(params, b)?;
    let (delta, time) = (params.delta, params.time);
    let mut bits = 128;
    let mut previous = recursive_wide(max_n, max_m, b, delta, time, bits);
    let values = loop {
        if bits * 2 > wide::MAX_BITS {
            return Err(Error::SmallDelta { delta });
        }
        let next_bits = bits + 64;
        let current = recursive_wide(max_n, max_m, b, delta, time, next_bits);
        let converged = previous.iter().zip(&current).all(|(a, c)| {
            let (a, c) = (wide::to_f64(a), wide::to_f64(c));
            (a - c).abs() <= 1e-17 * c.abs() || a == c
        });
        if converged {
            break current;
        }
        previous = recursive_wide(max_n, max_m, b, delta, time, bits * 2);
        bits *= 2;
    };
    let prefactor = params.prefactor_exponential();
    Ok(MomentTable {
        max_n,
        max_m,
        entries: values
            .iter()
            .map(|v| MomentValue::new(wide::to_f64(v), prefactor, Method::Recursive))
            .collect(),
    })
}

/// Below this `|delta| T` the symmetric limit (with its first-order
/// correction) is used.
pub const SYMMETRIC_THRESHOLD: f64 = 1e-4;
/// Below this `|delta| T` (and above the symmetric one) quadrature is used.
pub const QUADRATURE_THRESHOLD: f64 = 1e-1;

/// `I(n, m)` by the most accurate path for the regime of `|delta| T`.
pub fn moment_auto(key: MomentKey, params: &WellParameters) -> Result<MomentValue> {
    let key = key.check_cap()?;
    let b = params.b()?;
    let prefactor = params.prefactor_exponential();
    if b == 0.0 {
        return Ok(MomentValue::new(0.0, prefactor, Method::Closed));
    }
    let scaled_delta = params.delta.abs() * params.time;
    if scaled_delta < SYMMETRIC_THRESHOLD {
        // e^{dt} ~ 1 + d t; the linear term integrates to a Beta function too.
        let base = moment_symmetric(key, b, params.time, 1.0)?.stripped;
        let (n, m) = (key.n as f64, key.m as f64);
        let correction = params.delta * params.time * ((n + 1.0) / (n + m + 2.0) - 0.5);
        Ok(MomentValue::new(
            base * (1.0 + correction),
            prefactor,
            Method::SymmetricLimit,
        ))
    } else if scaled_delta < QUADRATURE_THRESHOLD {
        moment_quadrature(key, params)
    } else {
        moment_closed(key, params)
    }
}

/// `M_i = I(i, i)`, the contribution of `i + 1` instantons and `i`
/// anti-instantons.
pub fn multi_instanton(i: usize, params: &WellParameters) -> Result<MomentValue> {
    moment_auto(MomentKey::new(i, i), params)
}

/// `I(n, m)` over the rectangle `0..=max_n` x `0..=max_m`, row-major in `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentTable {
    pub max_n: usize,
    pub max_m: usize,
    entries: Vec<MomentValue>,
}

impl MomentTable {
    pub fn from_fn<F>(max_n: usize, max_m: usize, mut f: F) -> Result<Self>
    where
        F: FnMut(MomentKey) -> Result<MomentValue>,
    {
        let mut entries = Vec::with_capacity((max_n + 1) * (max_m + 1));
        for n in 0..=max_n {
            for m in 0..=max_m {
                entries.push(f(MomentKey::new(n, m))?);
            }
        }
        Ok(Self {
            max_n,
            max_m,
            entries,
        })
    }

    pub fn get(&self, n: usize, m: usize) -> Option<&MomentValue> {
        if n > self.max_n || m > self.max_m {
            return None;
        }
        self.entries.get(n * (self.max_m + 1) + m)
    }

    pub fn iter(&self) -> impl Iterator<Item = (MomentKey, &MomentValue)> + '_ {
        let width = self.max_m + 1;
        self.entries
            .iter()
            .enumerate()
            .map(move |(k, v)| (MomentKey::new(k / width, k % width), v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// CSV with header `n,m,stripped,full,method`, floats at 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,m,stripped,full,method\n");
        for (key, v) in self.iter() {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                key.n,
                key.m,
                sig17(v.stripped),
                sig17(v.full),
                v.method
            ));
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct Row<'a> {
            n: usize,
            m: usize,
            #[serde(flatten)]
            value: &'a MomentValue,
        }
        let rows: Vec<Row<'_>> = self
            .iter()
            .map(|(k, value)| Row {
                n: k.n,
                m: k.m,
                value,
            })
            .collect();
        serde_json::json!({
            "max_n": self.max_n,
            "max_m": self.max_m,
            "entries": rows,
        })
    }
}
