//! Summation of the dilute instanton gas and the doublet it describes.
//!
//! The summed transition amplitude between the two minima is
//! `C (e^{-E_+ T} - e^{-E_- T})` with
//!
//! ```text
//! E_+- = (omega0 + omega1) / 4 -+ sqrt(delta^2 / 4 + B^2)
//! C    = B / sqrt(delta^2 + 4 B^2)
//! ```
//!
//! which are exactly the eigenvalues of the two-level matrix
//! `[[omega0/2, B], [B, omega1/2]]` and the product of its eigenvector
//! components.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::format::{serialize_sig17, serialize_sig17_vec};
use crate::moments::multi_instanton;
use crate::potential::WellParameters;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectrumResult {
    /// Lower level `E_+`.
    #[serde(serialize_with = "serialize_sig17")]
    pub e_plus: f64,
    /// Upper level `E_-`.
    #[serde(serialize_with = "serialize_sig17")]
    pub e_minus: f64,
    #[serde(serialize_with = "serialize_sig17")]
    pub gap: f64,
    #[serde(serialize_with = "serialize_sig17")]
    pub amplitude_coefficient: f64,
}

/// Roots of `E^2 - 2 mean E + det` given `root = sqrt(mean^2 - det)`.
///
/// The larger root is formed by addition and the smaller from the product,
/// so neither suffers cancellation when `mean > 0`.
fn stable_pair(mean: f64, root: f64, det: f64) -> (f64, f64) {
    let upper = mean + root;
    let lower = if upper != 0.0 { det / upper } else { mean - root };
    (lower, upper)
}

/// `B / sqrt(delta^2 + 4 B^2)`, with the symmetric value `1/2` when both
/// vanish.
fn amplitude_coefficient(half_difference: f64, coupling: f64) -> f64 {
    if coupling == 0.0 && half_difference == 0.0 {
        return 0.5;
    }
    coupling / (2.0 * half_difference.hypot(coupling))
}

fn doublet(omega0: f64, omega1: f64, coupling: f64, half_split: f64) -> SpectrumResult {
    if coupling == 0.0 {
        // decoupled wells keep their own harmonic ground levels exactly
        let (lo, hi) = (omega0.min(omega1) / 2.0, omega0.max(omega1) / 2.0);
        return SpectrumResult {
            e_plus: lo,
            e_minus: hi,
            gap: hi - lo,
            amplitude_coefficient: amplitude_coefficient(half_split, 0.0),
        };
    }
    let mean = (omega0 + omega1) / 4.0;
    let root = half_split.hypot(coupling);
    let det = omega0 * omega1 / 4.0 - coupling * coupling;
    let (e_plus, e_minus) = stable_pair(mean, root, det);
    SpectrumResult {
        e_plus,
        e_minus,
        gap: 2.0 * root,
        amplitude_coefficient: amplitude_coefficient(half_split, coupling),
    }
}

/// Doublet energies read off the summed amplitude. `T` plays no role.
pub fn energies(params: &WellParameters) -> Result<SpectrumResult> {
    let b = params.b()?;
    let result = doublet(params.omega0, params.omega1, b, params.delta / 2.0);
    if let Some(alt) = gap_from_instanton(params) {
        debug_assert!(
            (alt - result.gap).abs() <= 1e-12 * result.gap.max(f64::MIN_POSITIVE),
            "gap {} disagrees with K, S form {alt}",
            result.gap
        );
    }
    Ok(result)
}

/// `sqrt((omega1 - omega0)^2 / 4 + 4 K^2 e^{-2 S_inst})`, available when the
/// parameters were built from a prefactor and an action.
pub fn gap_from_instanton(params: &WellParameters) -> Option<f64> {
    let k = params.prefactor?;
    let s = params.action?;
    let split = (params.omega1 - params.omega0) / 2.0;
    Some(split.hypot(2.0 * k * (-s).exp()))
}

/// Eigenvalues of `[[omega0/2, B'], [B', omega1/2]]`.
pub fn truncated_hamiltonian(omega0: f64, omega1: f64, coupling: f64) -> Result<SpectrumResult> {
    if !(coupling >= 0.0) || !coupling.is_finite() {
        return Err(Error::InvalidParameter {
            name: "B",
            reason: format!("coupling must be non-negative and finite, got {coupling}"),
        });
    }
    let (a, d) = (omega0 / 2.0, omega1 / 2.0);
    if coupling == 0.0 {
        return Ok(SpectrumResult {
            e_plus: a.min(d),
            e_minus: a.max(d),
            gap: (a - d).abs(),
            amplitude_coefficient: amplitude_coefficient(a - d, 0.0),
        });
    }
    let mean = (a + d) / 2.0;
    let half_difference = (a - d) / 2.0;
    let root = half_difference.hypot(coupling);
    let (e_plus, e_minus) = stable_pair(mean, root, a * d - coupling * coupling);
    Ok(SpectrumResult {
        e_plus,
        e_minus,
        gap: 2.0 * root,
        amplitude_coefficient: amplitude_coefficient(half_difference, coupling),
    })
}

/// Coupling recovered from a measured gap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExtractedCoupling {
    #[serde(serialize_with = "serialize_sig17")]
    pub coupling: f64,
    /// The gap did not exceed the bare asymmetry `|omega1 - omega0| / 2`,
    /// so the coupling was clamped to zero.
    pub asymmetry_dominated: bool,
}

/// `B' = sqrt(max(gap^2 - (omega1 - omega0)^2 / 4, 0)) / 2`.
pub fn extract_coupling(measured_gap: f64, omega0: f64, omega1: f64) -> Result<ExtractedCoupling> {
    if !(measured_gap >= 0.0) || !measured_gap.is_finite() {
        return Err(Error::InvalidParameter {
            name: "gap",
            reason: format!("must be non-negative and finite, got {measured_gap}"),
        });
    }
    let split = (omega1 - omega0).abs() / 2.0;
    // difference of squares as a product keeps precision near the clamp
    let excess = (measured_gap - split) * (measured_gap + split);
    if excess <= 0.0 {
        return Ok(ExtractedCoupling {
            coupling: 0.0,
            asymmetry_dominated: true,
        });
    }
    Ok(ExtractedCoupling {
        coupling: 0.5 * excess.sqrt(),
        asymmetry_dominated: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosedAmplitude {
    #[serde(serialize_with = "serialize_sig17")]
    pub value: f64,
    /// `B = 0`: no path joins the wells and the amplitude vanishes.
    pub decoupled: bool,
}

/// `C (e^{-E_+ T} - e^{-E_- T})`, the sum of all multi-instanton terms.
pub fn gas_sum_closed(params: &WellParameters) -> Result<ClosedAmplitude> {
    let b = params.b()?;
    if b == 0.0 {
        return Ok(ClosedAmplitude {
            value: 0.0,
            decoupled: true,
        });
    }
    let s = energies(params)?;
    let t = params.time;
    // e^{-E_+ T} (1 - e^{-gap T})
    let value = -s.amplitude_coefficient * (-s.e_plus * t).exp() * (-s.gap * t).exp_m1();
    Ok(ClosedAmplitude {
        value,
        decoupled: false,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartialSum {
    #[serde(serialize_with = "serialize_sig17")]
    pub sum: f64,
    /// `M_0, M_1, ...` as summed.
    #[serde(serialize_with = "serialize_sig17_vec")]
    pub terms: Vec<f64>,
}

/// `sum_{i < n_terms} M_i` with `M_i = I(i, i)` including its exponential
/// prefactor.
pub fn gas_sum_partial(params: &WellParameters, n_terms: usize) -> Result<PartialSum> {
    if n_terms == 0 {
        return Err(Error::InvalidParameter {
            name: "n_terms",
            reason: "need at least one term".into(),
        });
    }
    let terms = (0..n_terms)
        .map(|i| multi_instanton(i, params).map(|v| v.full))
        .collect::<Result<Vec<_>>>()?;
    Ok(PartialSum {
        sum: compensated_sum(&terms),
        terms,
    })
}

/// Default cut-off of [`gas_sum_auto`].
pub const AUTO_MAX_TERMS: usize = 64;
pub const AUTO_RELATIVE_CUTOFF: f64 = 1e-16;

/// Partial sum that stops once a term adds less than `1e-16` of the running
/// sum, or after 64 terms.
pub fn gas_sum_auto(params: &WellParameters) -> Result<PartialSum> {
    let mut terms = Vec::new();
    let mut running = 0.0;
    // terms grow up to i ~ BT e^{|delta| T/2} / 2 before they decay
    let b = params.b()?;
    let peak = b * params.time * (params.delta.abs() * params.time / 2.0).exp() / 2.0;
    for i in 0..AUTO_MAX_TERMS {
        let term = multi_instanton(i, params)?.full;
        terms.push(term);
        running += term;
        if (i as f64) > peak && term.abs() < AUTO_RELATIVE_CUTOFF * running.abs() {
            break;
        }
        if running == 0.0 && term == 0.0 {
            break;
        }
    }
    Ok(PartialSum {
        sum: compensated_sum(&terms),
        terms,
    })
}

fn compensated_sum(xs: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut carry = 0.0;
    for &x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            carry += (sum - t) + x;
        } else {
            carry += (x - t) + sum;
        }
        sum = t;
    }
    sum + carry
}
