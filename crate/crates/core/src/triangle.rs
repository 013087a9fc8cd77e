//! Exact coefficient triangle of the moment family.
//!
//! Every stripped `I(n, m)` is a finite combination of the basis functions
//! `e^{+delta T/2} (BT)^j / j!` and `e^{-delta T/2} (BT)^j / j!`, with
//! weights that are monomials in `r = B / delta`. Fixing `r` as an exact
//! rational makes all weights exact, so the triangle built from the
//! recursion, the path-counting closed form and the column-sum identities
//! can be compared with `==` instead of a tolerance.
//!
//! Column sums `S(n, m) = sum_k I(n + k, m + k)` are infinite; here a column
//! carries an explicit `order`, the number of entries summed. Each identity
//! is checked between columns whose orders are matched so that both sides
//! contain the same powers of `r`. No coefficient of a column ever becomes
//! final at finite order, since every deeper entry contributes to every
//! basis index.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::moments::MomentKey;
use crate::wide::{self, Wide};

/// Largest triangle depth accepted by [`build_triangle`].
pub const TRIANGLE_DEPTH_CAP: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    /// Multiplies `e^{+delta T / 2}`.
    Plus,
    /// Multiplies `e^{-delta T / 2}`.
    Minus,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisCoefficient {
    pub sign: Sign,
    /// Index of `(BT)^j / j!`.
    pub j: usize,
    pub weight: BigRational,
}

/// Dense weights of one triangle entry: `plus[j]` for `j <= n`,
/// `minus[j]` for `j <= m`.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Entry {
    plus: Vec<BigRational>,
    minus: Vec<BigRational>,
}

impl Entry {
    fn zeros(plus: usize, minus: usize) -> Self {
        Self {
            plus: vec![BigRational::zero(); plus],
            minus: vec![BigRational::zero(); minus],
        }
    }

    fn basis(&self) -> Vec<BasisCoefficient> {
        let plus = self.plus.iter().enumerate().map(|(j, w)| (Sign::Plus, j, w));
        let minus = self.minus.iter().enumerate().map(|(j, w)| (Sign::Minus, j, w));
        plus.chain(minus)
            .filter(|(_, _, w)| !w.is_zero())
            .map(|(sign, j, w)| BasisCoefficient {
                sign,
                j,
                weight: w.clone(),
            })
            .collect()
    }
}

fn sub_into(acc: &mut [BigRational], rhs: &[BigRational]) {
    for (a, b) in acc.iter_mut().zip(rhs) {
        *a -= b;
    }
}

fn add_into(acc: &mut Vec<BigRational>, rhs: &[BigRational]) {
    if acc.len() < rhs.len() {
        acc.resize(rhs.len(), BigRational::zero());
    }
    for (a, b) in acc.iter_mut().zip(rhs) {
        *a += b;
    }
}

#[derive(Debug, Clone)]
pub struct CoefficientTriangle {
    depth: usize,
    ratio: BigRational,
    /// `rows[n][m]` for `n + m <= depth`.
    rows: Vec<Vec<Entry>>,
}

/// Builds every entry with `n + m <= depth` from the boundary rules and the
/// interior rule `I(n, m) = r [I(n, m - 1) - I(n - 1, m)]`.
pub fn build_triangle(depth: usize, ratio: BigRational) -> Result<CoefficientTriangle> {
    if depth > TRIANGLE_DEPTH_CAP {
        return Err(Error::DepthExceeded {
            requested: depth,
            cap: TRIANGLE_DEPTH_CAP,
        });
    }
    if ratio.is_zero() {
        return Err(Error::InvalidParameter {
            name: "ratio",
            reason: "B / delta must be non-zero".into(),
        });
    }
    let mut rows: Vec<Vec<Entry>> = Vec::with_capacity(depth + 1);
    for n in 0..=depth {
        let mut row: Vec<Entry> = Vec::with_capacity(depth + 1 - n);
        for m in 0..=depth - n {
            let mut e = Entry::zeros(n + 1, m + 1);
            match (n, m) {
                (0, 0) => {
                    e.plus[0] = BigRational::one();
                    e.minus[0] = -BigRational::one();
                }
                (n, 0) => {
                    // r [e^+ (BT)^n / n! - I(n-1, 0)]
                    let prev = &rows[n - 1][0];
                    e.plus[n] = BigRational::one();
                    sub_into(&mut e.plus, &prev.plus);
                    sub_into(&mut e.minus, &prev.minus);
                }
                (0, m) => {
                    // r [I(0, m-1) - e^- (BT)^m / m!]
                    let prev = &row[m - 1];
                    e.plus.clone_from(&prev.plus);
                    e.minus[..m].clone_from_slice(&prev.minus);
                    e.minus[m] = -BigRational::one();
                }
                (n, m) => {
                    let left = &row[m - 1];
                    let up = &rows[n - 1][m];
                    e.plus[..=n].clone_from_slice(&left.plus);
                    e.minus[..m].clone_from_slice(&left.minus);
                    sub_into(&mut e.plus, &up.plus);
                    sub_into(&mut e.minus, &up.minus);
                }
            }
            for w in e.plus.iter_mut().chain(e.minus.iter_mut()) {
                *w *= &ratio;
            }
            row.push(e);
        }
        rows.push(row);
    }
    Ok(CoefficientTriangle { depth, ratio, rows })
}

impl CoefficientTriangle {
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn ratio(&self) -> &BigRational {
        &self.ratio
    }

    fn get(&self, n: usize, m: usize) -> Option<&Entry> {
        self.rows.get(n).and_then(|row| row.get(m))
    }

    /// Non-zero basis coefficients of `I(n, m)`, plus branch first.
    pub fn entry(&self, n: usize, m: usize) -> Option<Vec<BasisCoefficient>> {
        self.get(n, m).map(Entry::basis)
    }

    pub fn plus_weights(&self, n: usize, m: usize) -> Option<&[BigRational]> {
        self.get(n, m).map(|e| e.plus.as_slice())
    }

    pub fn minus_weights(&self, n: usize, m: usize) -> Option<&[BigRational]> {
        self.get(n, m).map(|e| e.minus.as_slice())
    }

    /// Stripped `I(n, m)` at `(B T, delta T / 2)`.
    ///
    /// The weights alternate in sign, so the sum is taken in extended
    /// precision and rounded once.
    pub fn evaluate_stripped(&self, n: usize, m: usize, bt: f64, half_delta_t: f64) -> Option<f64> {
        let entry = self.get(n, m)?;
        let mut bits = 128;
        loop {
            let (sum, max_log) = evaluate_entry(entry, bt, half_delta_t, bits);
            let lost = max_log - wide::log2_abs(&sum);
            if !lost.is_finite() || bits as f64 - lost >= 80.0 || bits >= wide::MAX_BITS {
                return Some(wide::to_f64(&sum));
            }
            bits = ((lost + 128.0) as usize).next_multiple_of(64).max(bits + 64);
        }
    }
}

fn evaluate_entry(entry: &Entry, bt: f64, half_delta_t: f64, bits: usize) -> (Wide, f64) {
    let wbt = wide::from_f64(bt, bits);
    let h = wide::from_f64(half_delta_t, bits);
    let exps = [h.exp(), (-h).exp()];
    let longest = entry.plus.len().max(entry.minus.len());
    let mut powers = vec![wide::from_f64(1.0, bits)];
    for k in 1..longest {
        let next = &powers[k - 1] * &wbt / wide::from_u128(k as u128, bits);
        powers.push(next);
    }
    let mut sum = wide::zero(bits);
    let mut max_log = f64::NEG_INFINITY;
    for (weights, e) in [&entry.plus, &entry.minus].into_iter().zip(&exps) {
        for (j, w) in weights.iter().enumerate() {
            if w.is_zero() {
                continue;
            }
            let term = wide::from_rational(w, bits) * &powers[j] * e;
            max_log = max_log.max(wide::log2_abs(&term));
            sum += term;
        }
    }
    (sum, max_log)
}

fn binomial(n: usize, k: usize) -> BigInt {
    let k = k.min(n - k);
    (0..k).fold(BigInt::one(), |acc, i| acc * BigInt::from(n - i) / BigInt::from(i + 1))
}

fn closed_entry(n: usize, m: usize, ratio: &BigRational) -> Entry {
    let mut e = Entry::zeros(n + 1, m + 1);
    let power = |k: usize| -> BigRational { num_traits::pow(ratio.clone(), k) };
    for i in 0..=n {
        let mut w = power(n + m - i + 1) * BigRational::from_integer(binomial(m + n - i, m));
        if (n - i) % 2 == 1 {
            w = -w;
        }
        e.plus[i] = w;
    }
    for j in 0..=m {
        let mut w = power(n + m - j + 1) * BigRational::from_integer(binomial(m + n - j, n));
        if (n + 1) % 2 == 1 {
            w = -w;
        }
        e.minus[j] = w;
    }
    e
}

/// Path-counting closed form of `I(n, m)` as basis coefficients:
///
/// ```text
/// plus  j = 0..=n: C(m+n-j, m) (-1)^(n-j) r^(n+m-j+1)
/// minus j = 0..=m: C(m+n-j, n) (-1)^(n+1) r^(n+m-j+1)
/// ```
pub fn closed_form_coefficients(key: MomentKey, ratio: &BigRational) -> Vec<BasisCoefficient> {
    closed_entry(key.n, key.m, ratio).basis()
}

/// Truncated column sum `sum_{k < order} I(n + k, m + k)` in basis form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnCoefficients {
    pub n: usize,
    pub m: usize,
    /// Number of entries summed.
    pub order: usize,
    /// `S_j^+` for `j < n + order`.
    pub plus: Vec<BigRational>,
    /// `S_j^-` for `j < m + order`.
    pub minus: Vec<BigRational>,
}

impl ColumnCoefficients {
    pub fn coefficient(&self, sign: Sign, j: usize) -> BigRational {
        let v = match sign {
            Sign::Plus => &self.plus,
            Sign::Minus => &self.minus,
        };
        v.get(j).cloned().unwrap_or_else(BigRational::zero)
    }
}

pub fn column_coefficients(
    triangle: &CoefficientTriangle,
    n: usize,
    m: usize,
    order: usize,
) -> Result<ColumnCoefficients> {
    if order == 0 {
        return Err(Error::InvalidParameter {
            name: "order",
            reason: "a column needs at least one entry".into(),
        });
    }
    let needed = n + m + 2 * (order - 1);
    if needed > triangle.depth {
        return Err(Error::DepthExceeded {
            requested: needed,
            cap: triangle.depth,
        });
    }
    let mut plus = Vec::new();
    let mut minus = Vec::new();
    for k in 0..order {
        let e = triangle.get(n + k, m + k).expect("within depth");
        add_into(&mut plus, &e.plus);
        add_into(&mut minus, &e.minus);
    }
    Ok(ColumnCoefficients {
        n,
        m,
        order,
        plus,
        minus,
    })
}

/// Longest column starting at `(n, m)` that fits in the triangle.
fn max_order(triangle: &CoefficientTriangle, n: usize, m: usize) -> usize {
    if n + m > triangle.depth {
        0
    } else {
        (triangle.depth - n - m) / 2 + 1
    }
}

/// Central coefficients `a_i^+ = S_i^+(i, i)` and `a_i^- = S_i^-(i, i)` for
/// `i = 0..=order`, each summed over the longest column the triangle holds.
pub fn central_sequence(
    triangle: &CoefficientTriangle,
    order: usize,
) -> Result<(Vec<BigRational>, Vec<BigRational>)> {
    let mut plus = Vec::with_capacity(order + 1);
    let mut minus = Vec::with_capacity(order + 1);
    for i in 0..=order {
        let k = max_order(triangle, i, i);
        if k == 0 {
            return Err(Error::InsufficientDepth { index: i });
        }
        let col = column_coefficients(triangle, i, i, k)?;
        plus.push(col.coefficient(Sign::Plus, i));
        minus.push(col.coefficient(Sign::Minus, i));
    }
    Ok((plus, minus))
}

/// Pass/fail tally for one family of identities.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RelationCheck {
    pub family: &'static str,
    pub checked: usize,
    pub failures: usize,
}

impl RelationCheck {
    fn new(family: &'static str) -> Self {
        Self {
            family,
            checked: 0,
            failures: 0,
        }
    }

    fn record(&mut self, holds: bool) {
        self.checked += 1;
        if !holds {
            self.failures += 1;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub depth: usize,
    pub ratio: String,
    /// Triangle entries against the path-counting closed form.
    pub closed_form: RelationCheck,
    pub families: Vec<RelationCheck>,
}

impl VerificationReport {
    pub fn total_failures(&self) -> usize {
        self.closed_form.failures + self.families.iter().map(|f| f.failures).sum::<usize>()
    }

    pub fn summary(&self) -> String {
        format!(
            "relations checked: {} families, failures: {}",
            self.families.len(),
            self.families.iter().map(|f| f.failures).sum::<usize>()
        )
    }
}

struct Columns<'a> {
    triangle: &'a CoefficientTriangle,
    cache: HashMap<(usize, usize, usize), ColumnCoefficients>,
}

impl<'a> Columns<'a> {
    fn get(&mut self, n: usize, m: usize, order: usize) -> &ColumnCoefficients {
        let triangle = self.triangle;
        self.cache.entry((n, m, order)).or_insert_with(|| {
            column_coefficients(triangle, n, m, order).expect("orders chosen within depth")
        })
    }

    fn coefficient(&mut self, sign: Sign, j: usize, n: usize, m: usize, order: usize) -> BigRational {
        self.get(n, m, order).coefficient(sign, j)
    }
}

/// Checks the closed form against every entry, then the four families of
/// column identities:
///
/// * `difference`: `S_j(n,m) = r [S_j(n,m-1) - S_j(n-1,m)]`, both branches;
/// * `shift`: `S_j^+(n,m) = S_{j+1}^+(n+1,m)` and its mirror
///   `S_j^-(n,m) = S_{j+1}^-(n,m+1)`;
/// * `off-diagonal`: `n < i => S_i^+(n,m) = S_i^+(i, m+i-n)` and mirror;
/// * `central`: `S_i^+(i,m) = r [S_i^+(i,m-1) - S_i^+(i,m+1)]
///   = r [S_{i-1}^+(i-1,m-1) - S_{i+1}^+(i+1,m+1)]`, its mirror, and the
///   recurrence `a_{i+1} = a_{i-1} -+ a_i / r`.
pub fn verify_relations(triangle: &CoefficientTriangle) -> VerificationReport {
    let depth = triangle.depth;
    let r = triangle.ratio.clone();
    let mut cols = Columns {
        triangle,
        cache: HashMap::new(),
    };

    let mut closed = RelationCheck::new("closed-form");
    for n in 0..=depth {
        for m in 0..=depth - n {
            closed.record(triangle.get(n, m) == Some(&closed_entry(n, m, &r)));
        }
    }

    let mut difference = RelationCheck::new("difference");
    for n in 1..=depth {
        for m in 1..=depth.saturating_sub(n) {
            let k = max_order(triangle, n, m);
            let lhs = cols.get(n, m, k).clone();
            let a = cols.get(n, m - 1, k).clone();
            let b = cols.get(n - 1, m, k).clone();
            for sign in [Sign::Plus, Sign::Minus] {
                let len = match sign {
                    Sign::Plus => lhs.plus.len(),
                    Sign::Minus => lhs.minus.len(),
                };
                for j in 0..len {
                    let rhs = &r * (a.coefficient(sign, j) - b.coefficient(sign, j));
                    difference.record(lhs.coefficient(sign, j) == rhs);
                }
            }
        }
    }

    let mut shift = RelationCheck::new("shift");
    for n in 0..depth {
        for m in 0..depth - n {
            let k = max_order(triangle, n + 1, m);
            for j in 0..n + k {
                let lhs = cols.coefficient(Sign::Plus, j, n, m, k);
                shift.record(lhs == cols.coefficient(Sign::Plus, j + 1, n + 1, m, k));
            }
            let k = max_order(triangle, m, n + 1);
            for j in 0..n + k {
                let lhs = cols.coefficient(Sign::Minus, j, m, n, k);
                shift.record(lhs == cols.coefficient(Sign::Minus, j + 1, m, n + 1, k));
            }
        }
    }

    let mut off_diagonal = RelationCheck::new("off-diagonal");
    for n in 0..=depth {
        for m in 0..=depth - n {
            let k = max_order(triangle, n, m);
            for i in n + 1..n + k {
                let lhs = cols.coefficient(Sign::Plus, i, n, m, k);
                let rhs = cols.coefficient(Sign::Plus, i, i, m + i - n, k - (i - n));
                off_diagonal.record(lhs == rhs);
            }
            // mirror: m < i => S_i^-(n, m) = S_i^-(n + i - m, i)
            for i in m + 1..m + k {
                let lhs = cols.coefficient(Sign::Minus, i, n, m, k);
                let rhs = cols.coefficient(Sign::Minus, i, n + i - m, i, k - (i - m));
                off_diagonal.record(lhs == rhs);
            }
        }
    }

    let mut central = RelationCheck::new("central");
    for i in 1..=depth {
        for m in 1..=depth.saturating_sub(i) {
            let k = max_order(triangle, i, m);
            if k < 2 {
                continue;
            }
            let lhs = cols.coefficient(Sign::Plus, i, i, m, k);
            let first = &r
                * (cols.coefficient(Sign::Plus, i, i, m - 1, k)
                    - cols.coefficient(Sign::Plus, i, i, m + 1, k - 1));
            let second = &r
                * (cols.coefficient(Sign::Plus, i - 1, i - 1, m - 1, k)
                    - cols.coefficient(Sign::Plus, i + 1, i + 1, m + 1, k - 1));
            central.record(lhs == first);
            central.record(lhs == second);
            // mirror with the roles of n and m exchanged
            let lhs = cols.coefficient(Sign::Minus, i, m, i, k);
            let rhs = &r
                * (cols.coefficient(Sign::Minus, i + 1, m + 1, i + 1, k - 1)
                    - cols.coefficient(Sign::Minus, i - 1, m - 1, i - 1, k));
            central.record(lhs == rhs);
        }
    }
    let inverse = r.recip();
    for i in 1..=depth / 2 {
        let k = max_order(triangle, i + 1, i + 1);
        if k == 0 {
            break;
        }
        let (k_low, k_high) = (k + 1, k);
        for sign in [Sign::Plus, Sign::Minus] {
            let prev = cols.coefficient(sign, i - 1, i - 1, i - 1, k_low);
            let here = cols.coefficient(sign, i, i, i, k_low);
            let next = cols.coefficient(sign, i + 1, i + 1, i + 1, k_high);
            let step = &here * &inverse;
            let predicted = match sign {
                Sign::Plus => prev - step,
                Sign::Minus => prev + step,
            };
            central.record(next == predicted);
        }
    }

    VerificationReport {
        depth,
        ratio: format_ratio(&r),
        closed_form: closed,
        families: vec![difference, shift, off_diagonal, central],
    }
}

pub fn format_ratio(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `p/q` (or an integer `p`) into an exact rational. Decimal input is
/// rejected.
pub fn parse_ratio(text: &str) -> Result<BigRational> {
    let bad = |reason: &str| Error::InvalidParameter {
        name: "ratio",
        reason: format!("{reason}: {text:?}"),
    };
    let (p, q) = match text.trim().split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (text.trim(), "1"),
    };
    if p.contains(['.', 'e', 'E']) || q.contains(['.', 'e', 'E']) {
        return Err(bad("exact ratio expected as p/q, decimals are not accepted"));
    }
    let p: BigInt = p.parse().map_err(|_| bad("numerator is not an integer"))?;
    let q: BigInt = q.parse().map_err(|_| bad("denominator is not an integer"))?;
    if q.is_zero() {
        return Err(bad("zero denominator"));
    }
    Ok(BigRational::new(p, q))
}

/// Partial sums of the two central series in `x = B / delta`:
///
/// ```text
/// a0 = sum_{i>=0} C(2i, i)     (-1)^i     x^(2i+1)
/// a1 = sum_{i>=1} C(2i-1, i-1) (-1)^(i-1) x^(2i)
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesSums {
    pub a0: f64,
    pub a1: f64,
    /// True only inside the radius `|x| < 1/2` with a negligible last term.
    pub converged: bool,
}

pub fn series_a0_a1(x: f64, terms: usize) -> Result<SeriesSums> {
    if terms == 0 {
        return Err(Error::InvalidParameter {
            name: "terms",
            reason: "need at least one term".into(),
        });
    }
    let x2 = x * x;
    let mut t0 = x;
    let mut t1 = x2;
    let (mut a0, mut a1) = (0.0, 0.0);
    for i in 0..terms {
        a0 += t0;
        a1 += t1;
        if i + 1 < terms {
            // both series share the term ratio -x^2 2(2i+1)/(i+1), offset by one index
            t0 *= -x2 * 2.0 * (2 * i + 1) as f64 / (i + 1) as f64;
            t1 *= -x2 * 2.0 * (2 * i + 3) as f64 / (i + 2) as f64;
        }
    }
    let small = |t: f64, s: f64| t.abs() <= 1e-14 * s.abs();
    let converged = x.abs() < 0.5 && small(t0, a0) && small(t1, a1);
    Ok(SeriesSums { a0, a1, converged })
}

/// Closed form of `a0`, odd in `x`; for `x > 0` it equals
/// `1 / (2 sqrt(1 + (delta / 2B)^2))`.
pub fn a0_closed(x: f64) -> f64 {
    x / (1.0 + 4.0 * x * x).sqrt()
}

/// Closed form of `a1`: `1/2 - 1 / (2 sqrt(1 + (2B / delta)^2))`.
pub fn a1_closed(x: f64) -> f64 {
    0.5 - 0.5 / (1.0 + 4.0 * x * x).sqrt()
}

/// Rates `alpha_+-` of the two exponentials solving
/// `a_{i+1} = a_{i-1} - a_i / x`, i.e. `alpha^2 + alpha / x - 1 = 0`.
pub fn exponential_rates(x: f64) -> (f64, f64) {
    let u = 0.5 / x;
    let root = (u * u + 1.0).sqrt();
    (-u + root, -u - root)
}

/// Amplitudes `(C_+, C_-)` of `a_i^+ = C_+ alpha_+^i + C_- alpha_-^i`,
/// fixed by `a0` and `a1`.
pub fn exponential_amplitudes(x: f64) -> (f64, f64) {
    let (alpha_plus, alpha_minus) = exponential_rates(x);
    let (a0, a1) = (a0_closed(x), a1_closed(x));
    // C_+ + C_- = a0 and C_+ alpha_+ + C_- alpha_- = a1
    let c_plus = (a1 - alpha_minus * a0) / (alpha_plus - alpha_minus);
    (c_plus, a0 - c_plus)
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "depth {}  ratio {}", self.depth, self.ratio)?;
        writeln!(f, "{:<14} {:>8} {:>9}", "family", "checked", "failures")?;
        for c in std::iter::once(&self.closed_form).chain(&self.families) {
            writeln!(f, "{:<14} {:>8} {:>9}", c.family, c.checked, c.failures)?;
        }
        write!(f, "{}", self.summary())
    }
}

/// `gcd`-reduced check helper for callers holding integers.
pub fn ratio_of(p: i64, q: i64) -> BigRational {
    let g = p.gcd(&q).max(1);
    let r = BigRational::new(BigInt::from(p / g), BigInt::from(q / g));
    if r.denom().is_negative() {
        -(-r)
    } else {
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(p: i64, d: i64) -> BigRational {
        ratio_of(p, d)
    }

    #[test]
    fn first_entries() {
        let r = q(3, 7);
        let t = build_triangle(4, r.clone()).unwrap();
        assert_eq!(t.plus_weights(0, 0).unwrap(), std::slice::from_ref(&r));
        assert_eq!(t.minus_weights(0, 0).unwrap(), &[-r.clone()]);
        // I(1,0) = r (BT) e^+ - r^2 e^+ + r^2 e^-
        let r2 = &r * &r;
        assert_eq!(t.plus_weights(1, 0).unwrap(), &[-r2.clone(), r.clone()]);
        assert_eq!(t.minus_weights(1, 0).unwrap(), &[r2]);
    }

    #[test]
    fn closed_form_base_and_binomials() {
        let r = q(3, 7);
        let t = build_triangle(10, r.clone()).unwrap();
        assert_eq!(
            closed_form_coefficients(MomentKey::new(0, 0), &r),
            t.entry(0, 0).unwrap()
        );
        for n in 0..=10 {
            for m in 0..=10 - n {
                assert_eq!(
                    closed_form_coefficients(MomentKey::new(n, m), &r),
                    t.entry(n, m).unwrap(),
                    "({n},{m})"
                );
            }
        }
        // (2,1): the minus branch carries C(3 - j, 2), j = 0, 1
        let c = closed_form_coefficients(MomentKey::new(2, 1), &r);
        let minus: Vec<_> = c.iter().filter(|b| b.sign == Sign::Minus).collect();
        let r4: BigRational = num_traits::pow(r.clone(), 4);
        let r3: BigRational = num_traits::pow(r.clone(), 3);
        assert_eq!(minus[0].weight, -(r4 * BigRational::from_integer(3.into())));
        assert_eq!(minus[1].weight, -r3);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(build_triangle(25, q(1, 2)), Err(Error::DepthExceeded { .. })));
        assert!(build_triangle(4, q(0, 1)).is_err());
        let t = build_triangle(6, q(1, 2)).unwrap();
        assert!(column_coefficients(&t, 2, 2, 3).is_err());
        assert!(column_coefficients(&t, 2, 2, 2).is_ok());
        assert!(matches!(central_sequence(&t, 4), Err(Error::InsufficientDepth { index: 4 })));
    }

    #[test]
    fn ratio_parsing() {
        assert_eq!(parse_ratio("2/5").unwrap(), q(2, 5));
        assert_eq!(parse_ratio(" -7 / 2 ").unwrap(), q(-7, 2));
        assert_eq!(parse_ratio("3").unwrap(), q(3, 1));
        assert!(parse_ratio("0.4").is_err());
        assert!(parse_ratio("1/0").is_err());
        assert!(parse_ratio("1e3/2").is_err());
    }

    #[test]
    fn identities_hold_at_depth_12() {
        let t = build_triangle(12, q(2, 5)).unwrap();
        let report = verify_relations(&t);
        assert_eq!(report.total_failures(), 0, "{report}");
        assert!(report.families.iter().all(|f| f.checked > 0));
        assert_eq!(report.summary(), "relations checked: 4 families, failures: 0");
    }

    #[test]
    fn a_wrong_relation_is_caught() {
        // dropping the truncation matching makes the recurrence fail
        let t = build_triangle(12, q(2, 5)).unwrap();
        let (plus, _) = central_sequence(&t, 4).unwrap();
        let r = q(2, 5);
        let predicted = &plus[0] - &plus[1] / &r;
        assert_ne!(plus[2], predicted);
    }

    #[test]
    fn series_limits() {
        let s = series_a0_a1(1e-4, 5).unwrap();
        assert!((s.a0 - a0_closed(1e-4)).abs() < 1e-19);
        assert!((s.a1 - (1e-8 - 3e-16)).abs() < 1e-22);
        assert!(s.converged);
        let s = series_a0_a1(0.25, 100).unwrap();
        assert!((s.a0 - 0.25 / 1.25f64.sqrt()).abs() < 1e-12);
        assert!((s.a0 - 0.223607).abs() < 5e-7);
        assert!((s.a1 - (0.5 - 0.5 / 1.25f64.sqrt())).abs() < 1e-12);
        assert!((s.a1 - 0.052786).abs() < 5e-7);
        let s = series_a0_a1(0.6, 100).unwrap();
        assert!(!s.converged);
        assert!(series_a0_a1(0.1, 0).is_err());
    }

    #[test]
    fn c_minus_vanishes_for_positive_ratio() {
        for x in [0.1, 0.25, 0.5, 2.0] {
            let (c_plus, c_minus) = exponential_amplitudes(x);
            let half_form = 1.0 / (2.0 * (1.0 + (0.5 / x).powi(2)).sqrt());
            assert!((c_plus - half_form).abs() < 1e-15, "{x}");
            assert!(c_minus.abs() < 1e-15, "{x}");
        }
        // negative ratio: the roles swap and the sign flips
        let (c_plus, c_minus) = exponential_amplitudes(-0.25);
        assert!(c_plus.abs() < 1e-15);
        assert!((c_minus + 1.0 / (2.0 * 5f64.sqrt())).abs() < 1e-15);
    }
}
