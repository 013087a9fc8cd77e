//! Dilute instanton gas summation for the asymmetric double well.
//!
//! The crate is organised bottom-up:
//!
//! * [`potential`] polynomial double wells, their minima, curvature
//!   frequencies and the one-instanton action;
//! * [`moments`] the integral family `I(n, m)` evaluated by quadrature,
//!   by the integration-by-parts recursion and by the path-counting closed
//!   form, plus the symmetric (Beta function) limit;
//! * [`triangle`] the same family as an exact rational coefficient
//!   triangle, its column-sum identities and the central series;
//! * [`spectrum`] the summed amplitude, the doublet energies and the
//!   two-level Hamiltonian they correspond to;
//! * [`schrodinger`] a finite-difference eigensolver used as an independent
//!   benchmark of the splitting law.
//!
//! Units are `hbar = 1`, particle mass `1` throughout.

pub mod error;
pub mod format;
pub mod moments;
pub mod potential;
pub mod quadrature;
pub mod schrodinger;
pub mod spectrum;
pub mod triangle;

mod wide;

pub use error::{Error, Result};
pub use schrodinger::{
    discretize, lowest_eigenvalues, numeric_gap, scaling_study, BenchmarkRecord, GridSpec,
    ScalingStudy, TridiagonalOperator,
};
pub use spectrum::{
    energies, extract_coupling, gas_sum_closed, gas_sum_partial, truncated_hamiltonian,
    SpectrumResult,
};
pub use triangle::{
    build_triangle, central_sequence, closed_form_coefficients, column_coefficients,
    series_a0_a1, BasisCoefficient, CoefficientTriangle, ColumnCoefficients, Sign,
};
pub use moments::{
    moment_closed, moment_quadrature, moment_recursive, moment_symmetric, multi_instanton,
    Method, MomentKey, MomentTable, MomentValue, Precision,
};
pub use potential::{
    find_minima, instanton_action, well_parameters, PolynomialPotential, WellMinimum,
    WellParameters,
};
