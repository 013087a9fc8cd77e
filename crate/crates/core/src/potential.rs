//! Polynomial double-well potentials.
//!
//! A potential is a real polynomial with even degree of at least four and
//! positive leading coefficient. From it we locate the minima, read off the
//! harmonic frequencies `omega_i = sqrt(V''(x_i))`, and integrate the
//! zero-energy instanton action `S = int sqrt(2 V) dx` between two
//! degenerate minima.

use std::cell::Cell;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::gauss_kronrod;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPotential")]
pub struct PolynomialPotential {
    /// Ascending powers: `V(x) = sum_k coefficients[k] * x^k`.
    coefficients: Vec<f64>,
}

#[derive(Deserialize)]
struct RawPotential {
    coefficients: Vec<f64>,
}

impl TryFrom<RawPotential> for PolynomialPotential {
    type Error = Error;

    fn try_from(raw: RawPotential) -> Result<Self> {
        Self::new(raw.coefficients)
    }
}

fn horner(coefficients: &[f64], x: f64) -> f64 {
    coefficients.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

fn derive(coefficients: &[f64]) -> Vec<f64> {
    coefficients
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, &c)| k as f64 * c)
        .collect()
}

fn multiply(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

impl PolynomialPotential {
    pub fn new(coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidPotential("non-finite coefficient".into()));
        }
        let mut coefficients = coefficients;
        while coefficients.last() == Some(&0.0) {
            coefficients.pop();
        }
        let degree = coefficients.len().saturating_sub(1);
        if degree < 4 || !degree.is_multiple_of(2) {
            return Err(Error::InvalidPotential(format!(
                "degree must be even and at least 4, got {degree}"
            )));
        }
        if coefficients[degree] <= 0.0 {
            return Err(Error::InvalidPotential(
                "leading coefficient must be positive".into(),
            ));
        }
        Ok(Self { coefficients })
    }

    /// `V = lambda (x^2 - 1)^2 (x^2 + b x + 1)`: degenerate harmonic minima at
    /// `x = -1` and `x = +1` with curvatures `8 lambda (2 - b)` and
    /// `8 lambda (2 + b)`. Requires `lambda > 0` and `|b| < 2`.
    pub fn benchmark(lambda: f64, b: f64) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(Error::InvalidParameter {
                name: "lambda",
                reason: format!("must be positive, got {lambda}"),
            });
        }
        if !(b.abs() < 2.0) {
            return Err(Error::InvalidParameter {
                name: "b",
                reason: format!("must satisfy |b| < 2, got {b}"),
            });
        }
        let quartic = [1.0, 0.0, -2.0, 0.0, 1.0];
        let coefficients = multiply(&quartic, &[1.0, b, 1.0])
            .into_iter()
            .map(|c| lambda * c)
            .collect();
        Self::new(coefficients)
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn value(&self, x: f64) -> f64 {
        horner(&self.coefficients, x)
    }

    pub fn first_derivative(&self, x: f64) -> f64 {
        horner(&derive(&self.coefficients), x)
    }

    pub fn second_derivative(&self, x: f64) -> f64 {
        horner(&derive(&derive(&self.coefficients)), x)
    }

    /// Magnitude used for relative tolerances.
    pub fn scale(&self) -> f64 {
        1.0 + self.coefficients.iter().fold(0.0f64, |m, c| m.max(c.abs()))
    }

    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        Self::new(self.coefficients.iter().map(|c| lambda * c).collect())
    }

    /// The reflected potential `V(-x)`.
    pub fn mirrored(&self) -> Self {
        let coefficients = self
            .coefficients
            .iter()
            .enumerate()
            .map(|(k, &c)| if k % 2 == 1 { -c } else { c })
            .collect();
        Self { coefficients }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WellMinimum {
    pub location: f64,
    pub value: f64,
    /// `V''` at the minimum, clamped at zero.
    pub curvature: f64,
    /// `sqrt(curvature)`.
    pub frequency: f64,
    /// False for flat minima where the first non-vanishing derivative is of
    /// order four or higher.
    pub harmonic: bool,
}

fn real_roots(coefficients: &[f64]) -> Result<Vec<(f64, usize)>> {
    let degree = coefficients.len() - 1;
    let lead = coefficients[degree];
    let mut companion = DMatrix::<f64>::zeros(degree, degree);
    for i in 1..degree {
        companion[(i, i - 1)] = 1.0;
    }
    for i in 0..degree {
        companion[(i, degree - 1)] = -coefficients[i] / lead;
    }
    let mut eigenvalues: Vec<(f64, f64)> = companion
        .complex_eigenvalues()
        .iter()
        .map(|z| (z.re, z.im))
        .collect();
    eigenvalues.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));

    // Multiple roots come back from the eigensolver as a small cluster; its
    // centroid is far more accurate than any member.
    let mut clusters: Vec<Vec<(f64, f64)>> = Vec::new();
    for z in eigenvalues {
        let near = |c: &Vec<(f64, f64)>| {
            let (re, im) = c[0];
            let radius = 1e-4 * (1.0 + re.abs());
            ((re - z.0).powi(2) + (im - z.1).powi(2)).sqrt() < radius
        };
        match clusters.iter_mut().find(|c| near(c)) {
            Some(c) => c.push(z),
            None => clusters.push(vec![z]),
        }
    }

    let mut roots = Vec::new();
    for cluster in clusters {
        let k = cluster.len() as f64;
        let re = cluster.iter().map(|z| z.0).sum::<f64>() / k;
        let im = cluster.iter().map(|z| z.1).sum::<f64>() / k;
        if im.abs() > 1e-7 * (1.0 + re.abs()) {
            continue;
        }
        roots.push((re, cluster.len()));
    }
    Ok(roots)
}

/// Locates all minima of `potential`, sorted by location.
///
/// Real roots of `V'` are found from the companion matrix and polished by
/// (multiplicity-aware) Newton iteration. Flat minima are returned with
/// `harmonic = false`.
pub fn find_minima(potential: &PolynomialPotential) -> Result<Vec<WellMinimum>> {
    let dv = derive(potential.coefficients());
    let d2v = derive(&dv);
    let scale = potential.scale();
    let curvature_tol = 1e-7 * scale;

    let mut minima: Vec<WellMinimum> = Vec::new();
    for (start, multiplicity) in real_roots(&dv)? {
        let mut x = start;
        let mut f = horner(&dv, x);
        for _ in 0..100 {
            let fp = horner(&d2v, x);
            if f == 0.0 || fp == 0.0 {
                break;
            }
            // near a multiple root f and f' are both rounding noise; only
            // accept steps that actually reduce the residual
            let candidate = x - multiplicity as f64 * f / fp;
            let f_candidate = horner(&dv, candidate);
            if f_candidate.abs() >= f.abs() {
                break;
            }
            let step = (candidate - x).abs();
            x = candidate;
            f = f_candidate;
            if step <= 1e-15 * (1.0 + x.abs()) {
                break;
            }
        }
        let curvature = horner(&d2v, x);
        let residual = horner(&dv, x).abs();
        if residual > 1e-12 * scale.max(curvature.abs() * x.abs()) {
            return Err(Error::RootNotConverged { last: x });
        }

        let harmonic = curvature > curvature_tol;
        if !harmonic {
            if curvature < -curvature_tol {
                continue;
            }
            // Flat stationary point: a minimum only if the first
            // non-vanishing derivative has even order and positive sign.
            let mut derivative = derive(&d2v);
            let mut order = 3;
            let mut is_minimum = false;
            while !derivative.is_empty() {
                let d = horner(&derivative, x);
                if d.abs() > curvature_tol {
                    is_minimum = order % 2 == 0 && d > 0.0;
                    break;
                }
                derivative = derive(&derivative);
                order += 1;
            }
            if !is_minimum {
                continue;
            }
        }
        if minima.iter().any(|m| (m.location - x).abs() < 1e-8) {
            continue;
        }
        let curvature = curvature.max(0.0);
        minima.push(WellMinimum {
            location: x,
            value: potential.value(x),
            curvature,
            frequency: curvature.sqrt(),
            harmonic,
        });
    }
    if minima.is_empty() {
        return Err(Error::NoWells);
    }
    minima.sort_by(|a, b| a.location.total_cmp(&b.location));
    Ok(minima)
}

/// Reduced parameters of the two-well problem.
///
/// `omega0` belongs to the left well, `omega1` to the right one, and
/// `delta = (omega0 - omega1) / 2` keeps its sign. The coupling `B` may be
/// given directly or derived as `K exp(-S_inst)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WellParameters {
    pub omega0: f64,
    pub omega1: f64,
    pub delta: f64,
    pub coupling: Option<f64>,
    pub prefactor: Option<f64>,
    pub action: Option<f64>,
    pub time: f64,
}

fn check_positive(name: &'static str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("must be positive and finite, got {x}"),
        })
    }
}

fn check_non_negative(name: &'static str, x: f64) -> Result<()> {
    if x >= 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("must be non-negative and finite, got {x}"),
        })
    }
}

impl WellParameters {
    pub fn new(omega0: f64, omega1: f64, coupling: f64, time: f64) -> Result<Self> {
        check_positive("omega0", omega0)?;
        check_positive("omega1", omega1)?;
        check_non_negative("B", coupling)?;
        check_positive("T", time)?;
        Ok(Self {
            omega0,
            omega1,
            delta: (omega0 - omega1) / 2.0,
            coupling: Some(coupling),
            prefactor: None,
            action: None,
            time,
        })
    }

    /// Builds `B = K exp(-S_inst)` from the one-instanton prefactor and action.
    pub fn from_instanton(
        omega0: f64,
        omega1: f64,
        prefactor: f64,
        action: f64,
        time: f64,
    ) -> Result<Self> {
        check_non_negative("K", prefactor)?;
        check_non_negative("S_inst", action)?;
        let mut params = Self::new(omega0, omega1, prefactor * (-action).exp(), time)?;
        params.prefactor = Some(prefactor);
        params.action = Some(action);
        Ok(params)
    }

    /// Frequencies and action only; the coupling stays absent until a
    /// prefactor is known.
    pub fn without_coupling(omega0: f64, omega1: f64, action: Option<f64>, time: f64) -> Result<Self> {
        check_positive("omega0", omega0)?;
        check_positive("omega1", omega1)?;
        check_positive("T", time)?;
        if let Some(s) = action {
            check_non_negative("S_inst", s)?;
        }
        Ok(Self {
            omega0,
            omega1,
            delta: (omega0 - omega1) / 2.0,
            coupling: None,
            prefactor: None,
            action,
            time,
        })
    }

    pub fn with_time(mut self, time: f64) -> Result<Self> {
        check_positive("T", time)?;
        self.time = time;
        Ok(self)
    }

    /// The coupling `B`, or an error when it was never supplied.
    pub fn b(&self) -> Result<f64> {
        self.coupling.ok_or(Error::InvalidParameter {
            name: "B",
            reason: "coupling absent; supply B or the prefactor K".into(),
        })
    }

    /// `exp(-(omega0 + omega1) T / 4)`, the factor stripped from `I(n, m)`.
    pub fn prefactor_exponential(&self) -> f64 {
        (-(self.omega0 + self.omega1) * self.time / 4.0).exp()
    }
}

/// Parameters for the well pair `(left, right)` of `potential`.
pub fn well_parameters(
    potential: &PolynomialPotential,
    left: &WellMinimum,
    right: &WellMinimum,
    prefactor: Option<f64>,
    time: f64,
) -> Result<WellParameters> {
    for m in [left, right] {
        if !m.harmonic || m.curvature <= 0.0 {
            return Err(Error::NonHarmonicMinimum {
                location: m.location,
                curvature: m.curvature,
            });
        }
    }
    if (left.value - right.value).abs() > 1e-9 * potential.scale() {
        return Err(Error::AsymmetricDepths {
            left: left.value,
            right: right.value,
        });
    }
    let (a, b) = if left.location <= right.location {
        (left, right)
    } else {
        (right, left)
    };
    let action = instanton_action(potential, a.location, b.location)?;
    match prefactor {
        Some(k) => WellParameters::from_instanton(a.frequency, b.frequency, k, action, time),
        None => WellParameters::without_coupling(a.frequency, b.frequency, Some(action), time),
    }
}

/// Zero-energy instanton action `int_{x0}^{x1} sqrt(2 (V - V_floor)) dx`.
///
/// The integrand vanishes linearly at both minima; the outer slivers of
/// width `1e-3 (x1 - x0)` are integrated in `u` with `u^2 = |x - x_end|`.
pub fn instanton_action(potential: &PolynomialPotential, x0: f64, x1: f64) -> Result<f64> {
    if !(x0 < x1) {
        return Err(Error::InvalidParameter {
            name: "x0",
            reason: format!("need x0 < x1, got {x0} >= {x1}"),
        });
    }
    let floor = potential.value(x0).min(potential.value(x1));
    let tol = 1e-9 * potential.scale();
    let violation: Cell<Option<(f64, f64)>> = Cell::new(None);
    let integrand = |x: f64| {
        let excess = potential.value(x) - floor;
        if excess < -tol && violation.get().is_none() {
            violation.set(Some((x, excess)));
        }
        (2.0 * excess.max(0.0)).sqrt()
    };

    let eps = 1e-3 * (x1 - x0);
    let root = eps.sqrt();
    let rel = 1e-13;
    let abs = 1e-15 * potential.scale();
    let left = gauss_kronrod(|u| integrand(x0 + u * u) * 2.0 * u, 0.0, root, abs, rel)?;
    let middle = gauss_kronrod(integrand, x0 + eps, x1 - eps, abs, rel)?;
    let right = gauss_kronrod(|u| integrand(x1 - u * u) * 2.0 * u, 0.0, root, abs, rel)?;
    if let Some((x, excess)) = violation.get() {
        return Err(Error::BelowWellFloor { x, excess });
    }
    Ok(left.value + middle.value + right.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quartic() -> PolynomialPotential {
        PolynomialPotential::new(vec![1.0, 0.0, -2.0, 0.0, 1.0]).unwrap()
    }

    #[test]
    fn rejects_bad_degree_and_sign() {
        assert!(PolynomialPotential::new(vec![0.0, 0.0, 1.0]).is_err());
        assert!(PolynomialPotential::new(vec![0.0, 0.0, 0.0, 0.0, 0.0, 1.0]).is_err());
        assert!(PolynomialPotential::new(vec![1.0, 0.0, -2.0, 0.0, -1.0]).is_err());
        assert!(PolynomialPotential::new(vec![1.0, 0.0, f64::NAN, 0.0, 1.0]).is_err());
        // trailing zeros are trimmed
        let p = PolynomialPotential::new(vec![1.0, 0.0, -2.0, 0.0, 1.0, 0.0, 0.0]).unwrap();
        assert_eq!(p.degree(), 4);
    }

    #[test]
    fn symmetric_quartic_minima() {
        let minima = find_minima(&quartic()).unwrap();
        assert_eq!(minima.len(), 2);
        for (m, x) in minima.iter().zip([-1.0, 1.0]) {
            assert!((m.location - x).abs() < 1e-14);
            assert!(m.value.abs() < 1e-14);
            assert!((m.curvature - 8.0).abs() < 1e-12);
            assert!(m.harmonic);
        }
    }

    #[test]
    fn sextic_with_flat_minimum() {
        // x^2 (x - 2)^4
        let c = multiply(&[0.0, 0.0, 1.0], &multiply(&[4.0, -4.0, 1.0], &[4.0, -4.0, 1.0]));
        let minima = find_minima(&PolynomialPotential::new(c).unwrap()).unwrap();
        assert_eq!(minima.len(), 2);
        assert!(minima[0].location.abs() < 1e-12);
        assert!((minima[0].curvature - 32.0).abs() < 1e-9);
        assert!(minima[0].harmonic);
        assert!((minima[1].location - 2.0).abs() < 1e-4);
        assert!(!minima[1].harmonic);
    }

    #[test]
    fn asymmetric_benchmark_curvatures() {
        let p = PolynomialPotential::benchmark(1.0, 0.5).unwrap();
        let minima = find_minima(&p).unwrap();
        assert_eq!(minima.len(), 2);
        assert!((minima[0].location + 1.0).abs() < 1e-13);
        assert!((minima[1].location - 1.0).abs() < 1e-13);
        assert!((minima[0].curvature - 12.0).abs() < 1e-11);
        assert!((minima[1].curvature - 20.0).abs() < 1e-11);
    }

    #[test]
    fn well_parameters_examples() {
        let p = quartic();
        let m = find_minima(&p).unwrap();
        let w = well_parameters(&p, &m[0], &m[1], None, 1.0).unwrap();
        assert!((w.omega0 - 8f64.sqrt()).abs() < 1e-12);
        assert_eq!(w.delta, 0.0);
        assert!(w.coupling.is_none());

        let p = PolynomialPotential::benchmark(1.0, 0.5).unwrap();
        let m = find_minima(&p).unwrap();
        let w = well_parameters(&p, &m[0], &m[1], Some(2.0), 1.0).unwrap();
        assert!((w.omega0 - 12f64.sqrt()).abs() < 1e-12);
        assert!((w.omega1 - 20f64.sqrt()).abs() < 1e-12);
        assert!((w.delta - (12f64.sqrt() - 20f64.sqrt()) / 2.0).abs() < 1e-12);
        let b = w.coupling.unwrap();
        assert_eq!(b, 2.0 * (-w.action.unwrap()).exp());

        let w = WellParameters::new(1.0, 2.0, 0.3, 1.0).unwrap();
        assert_eq!(w.delta, -0.5);
    }

    #[test]
    fn non_degenerate_minima_rejected() {
        // (x^2 - 1)^2 + 0.1 x tilts the wells
        let p = PolynomialPotential::new(vec![1.0, 0.1, -2.0, 0.0, 1.0]).unwrap();
        let m = find_minima(&p).unwrap();
        assert!(matches!(
            well_parameters(&p, &m[0], &m[1], None, 1.0),
            Err(Error::AsymmetricDepths { .. })
        ));
    }

    #[test]
    fn quartic_action_closed_form() {
        let s = instanton_action(&quartic(), -1.0, 1.0).unwrap();
        let exact = 4.0 * 2f64.sqrt() / 3.0;
        assert!((s - exact).abs() / exact < 1e-12, "{s} vs {exact}");
        let s4 = instanton_action(&quartic().scaled(4.0).unwrap(), -1.0, 1.0).unwrap();
        assert!((s4 - 2.0 * exact).abs() / exact < 1e-12);
    }

    #[test]
    fn action_detects_dip_below_floor() {
        // endpoints at V = 1.5625 straddle the interior minima at V = 0
        assert!(matches!(
            instanton_action(&quartic(), -1.5, 1.5),
            Err(Error::BelowWellFloor { .. })
        ));
        assert!(instanton_action(&quartic(), 1.0, -1.0).is_err());
    }
}
