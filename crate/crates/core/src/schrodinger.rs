//! Finite-difference eigensolver for `-psi''/2 + V psi = E psi`.
//!
//! The operator is discretized with second-order central differences and
//! Dirichlet walls, which gives a symmetric tridiagonal matrix with a
//! constant negative off-diagonal. Its lowest eigenvalues are found by Sturm
//! count bisection, and the doublet gap is refined over two grids.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::format::{serialize_sig17, serialize_sig17_opt, serialize_sig17_vec, sig17};
use crate::potential::{find_minima, well_parameters, PolynomialPotential};
use crate::spectrum::{energies, extract_coupling};

/// Largest number of levels [`lowest_eigenvalues`] will return.
pub const MAX_LEVELS: usize = 4;

/// Wall height required by [`numeric_gap`], in units of the second level.
pub const CONFINEMENT_FACTOR: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub points: usize,
}

impl Default for GridSpec {
    /// `[-6, 6]` with 4001 points (`h = 0.003`).
    fn default() -> Self {
        Self {
            x_min: -6.0,
            x_max: 6.0,
            points: 4001,
        }
    }
}

impl GridSpec {
    pub fn new(x_min: f64, x_max: f64, points: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite() && x_min < x_max) {
            return Err(Error::InvalidParameter {
                name: "grid",
                reason: format!("need finite x_min < x_max, got [{x_min}, {x_max}]"),
            });
        }
        if points < 3 {
            return Err(Error::InvalidParameter {
                name: "grid",
                reason: format!("need at least 3 points, got {points}"),
            });
        }
        Ok(Self {
            x_min,
            x_max,
            points,
        })
    }

    pub fn spacing(&self) -> f64 {
        (self.x_max - self.x_min) / (self.points - 1) as f64
    }

    pub fn x(&self, k: usize) -> f64 {
        self.x_min + k as f64 * self.spacing()
    }

    /// The same interval with the spacing halved.
    pub fn refined(&self) -> Self {
        Self {
            points: 2 * self.points - 1,
            ..*self
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalOperator {
    /// `1/h^2 + V(x_k)` on the interior points.
    pub diagonal: Vec<f64>,
    /// `-1 / (2 h^2)`.
    pub off_diagonal: f64,
    pub grid: GridSpec,
}

impl TridiagonalOperator {
    /// Discretizes an arbitrary potential on the interior of `grid`.
    pub fn from_fn<F: Fn(f64) -> f64>(grid: GridSpec, potential: F) -> Result<Self> {
        let grid = GridSpec::new(grid.x_min, grid.x_max, grid.points)?;
        let h = grid.spacing();
        let kinetic = 1.0 / (h * h);
        let diagonal = (1..grid.points - 1)
            .map(|k| kinetic + potential(grid.x(k)))
            .collect();
        Ok(Self {
            diagonal,
            off_diagonal: -0.5 * kinetic,
            grid,
        })
    }

    pub fn size(&self) -> usize {
        self.diagonal.len()
    }

    /// Number of eigenvalues strictly below `x`.
    pub fn sturm_count(&self, x: f64) -> usize {
        let e2 = self.off_diagonal * self.off_diagonal;
        let tiny = f64::MIN_POSITIVE.sqrt() * (1.0 + x.abs());
        let mut count = 0;
        let mut q = 1.0;
        for (k, &d) in self.diagonal.iter().enumerate() {
            q = if k == 0 { d - x } else { d - x - e2 / q };
            if q == 0.0 {
                q = -tiny;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Gershgorin interval containing the whole spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let r = 2.0 * self.off_diagonal.abs();
        let lo = self.diagonal.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = self.diagonal.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        (lo - r, hi + r)
    }

    /// Normalized eigenvector for an eigenvalue `energy` by inverse
    /// iteration.
    pub fn eigenvector(&self, energy: f64) -> Vec<f64> {
        let n = self.size();
        let mut v = vec![1.0 / (n as f64).sqrt(); n];
        // a deterministic, non-symmetric start so both parities are present
        for (k, x) in v.iter_mut().enumerate() {
            *x *= 1.0 + 0.5 * ((k as f64) * 0.37).sin();
        }
        for _ in 0..4 {
            v = self.solve_shifted(energy, &v);
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.iter_mut().for_each(|x| *x /= norm);
        }
        v
    }

    /// Solves `(A - sigma) y = rhs` by the Thomas algorithm.
    fn solve_shifted(&self, sigma: f64, rhs: &[f64]) -> Vec<f64> {
        let n = self.size();
        let e = self.off_diagonal;
        let tiny = f64::EPSILON * self.gershgorin().1.abs().max(1.0);
        let mut c = vec![0.0; n];
        let mut y = vec![0.0; n];
        let mut pivot = self.diagonal[0] - sigma;
        for k in 0..n {
            if k > 0 {
                pivot = self.diagonal[k] - sigma - e * c[k - 1];
            }
            if pivot.abs() < tiny {
                pivot = tiny;
            }
            c[k] = e / pivot;
            let prev = if k > 0 { e * y[k - 1] } else { 0.0 };
            y[k] = (rhs[k] - prev) / pivot;
        }
        for k in (0..n - 1).rev() {
            y[k] -= c[k] * y[k + 1];
        }
        y
    }
}

/// Discretizes `potential` on `grid`.
pub fn discretize(potential: &PolynomialPotential, grid: GridSpec) -> Result<TridiagonalOperator> {
    TridiagonalOperator::from_fn(grid, |x| potential.value(x))
}

/// Like [`discretize`], but rejects a domain whose walls are lower than
/// `threshold`.
pub fn discretize_confined(
    potential: &PolynomialPotential,
    grid: GridSpec,
    threshold: f64,
) -> Result<TridiagonalOperator> {
    check_walls(potential, &grid, threshold)?;
    discretize(potential, grid)
}

fn check_walls(potential: &PolynomialPotential, grid: &GridSpec, threshold: f64) -> Result<()> {
    for boundary in [grid.x_min, grid.x_max] {
        if potential.value(boundary) < threshold {
            return Err(Error::DomainTooSmall {
                boundary,
                required: threshold,
            });
        }
    }
    Ok(())
}

/// The `count` smallest eigenvalues in ascending order.
pub fn lowest_eigenvalues(operator: &TridiagonalOperator, count: usize) -> Result<Vec<f64>> {
    if count == 0 || count > MAX_LEVELS || count > operator.size() {
        return Err(Error::InvalidParameter {
            name: "count",
            reason: format!(
                "between 1 and {} levels, got {count}",
                MAX_LEVELS.min(operator.size())
            ),
        });
    }
    let (lower, upper) = operator.gershgorin();
    if operator.sturm_count(lower) != 0 || operator.sturm_count(upper) != operator.size() {
        return Err(Error::BisectionFailed { lower, upper });
    }
    let mut out = Vec::with_capacity(count);
    let mut lo_start = lower;
    for k in 0..count {
        // eigenvalue k: the smallest x with more than k eigenvalues below it
        let (mut lo, mut hi) = (lo_start, upper);
        loop {
            let mid = 0.5 * (lo + hi);
            if hi - lo <= 1e-12 * mid.abs().max(1.0) || mid <= lo || mid >= hi {
                break;
            }
            if operator.sturm_count(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let value = 0.5 * (lo + hi);
        out.push(value);
        lo_start = lo;
    }
    Ok(out)
}

/// `<psi, P psi>` for the eigenvector at `energy`, `P` the reflection
/// `x -> -x`. Needs a grid symmetric about the origin.
pub fn parity_overlap(operator: &TridiagonalOperator, energy: f64) -> Result<f64> {
    let g = operator.grid;
    if (g.x_min + g.x_max).abs() > 1e-12 * g.x_max.abs() {
        return Err(Error::InvalidParameter {
            name: "grid",
            reason: "parity needs a grid symmetric about 0".into(),
        });
    }
    let v = operator.eigenvector(energy);
    Ok(v.iter().zip(v.iter().rev()).map(|(a, b)| a * b).sum())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapEstimate {
    /// `E1 - E0` on the refined grid.
    #[serde(serialize_with = "serialize_sig17")]
    pub gap: f64,
    /// Richardson estimate of the remaining discretization error.
    #[serde(serialize_with = "serialize_sig17")]
    pub error_estimate: f64,
    /// `gap` extrapolated to `h -> 0`.
    #[serde(serialize_with = "serialize_sig17")]
    pub extrapolated: f64,
    /// `[E0, E1]` on the refined grid.
    #[serde(serialize_with = "serialize_sig17_vec")]
    pub levels: Vec<f64>,
}

/// Doublet gap from grids with spacing `h` and `h/2`.
///
/// The walls must exceed 50 times the upper level.
pub fn numeric_gap(potential: &PolynomialPotential, grid: GridSpec) -> Result<GapEstimate> {
    let coarse = lowest_eigenvalues(&discretize(potential, grid)?, 2)?;
    let fine = lowest_eigenvalues(&discretize(potential, grid.refined())?, 2)?;
    check_walls(potential, &grid, CONFINEMENT_FACTOR * fine[1].max(0.0))?;
    let (g_coarse, g_fine) = (coarse[1] - coarse[0], fine[1] - fine[0]);
    // second order: error(h/2) ~ (g(h/2) - g(h)) / 3
    let correction = (g_fine - g_coarse) / 3.0;
    Ok(GapEstimate {
        gap: g_fine,
        error_estimate: correction.abs(),
        extrapolated: g_fine + correction,
        levels: fine,
    })
}

/// `(E(h) - E(h/2)) / (E(h/2) - E(h/4))` for level `level`; close to 4 for
/// a second-order scheme on a smooth potential.
pub fn refinement_ratio<F: Fn(f64) -> f64 + Copy>(
    potential: F,
    grid: GridSpec,
    level: usize,
) -> Result<f64> {
    let mut values = Vec::with_capacity(3);
    let mut g = grid;
    for _ in 0..3 {
        let op = TridiagonalOperator::from_fn(g, potential)?;
        values.push(lowest_eigenvalues(&op, level + 1)?[level]);
        g = g.refined();
    }
    Ok((values[0] - values[1]) / (values[1] - values[2]))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BenchmarkRecord {
    #[serde(serialize_with = "serialize_sig17")]
    pub lambda: f64,
    #[serde(serialize_with = "serialize_sig17")]
    pub s_inst: f64,
    #[serde(serialize_with = "serialize_sig17")]
    pub omega0: f64,
    #[serde(serialize_with = "serialize_sig17")]
    pub omega1: f64,
    #[serde(serialize_with = "serialize_sig17")]
    pub gap_numeric: f64,
    #[serde(serialize_with = "serialize_sig17")]
    pub b_prime: f64,
    #[serde(serialize_with = "serialize_sig17")]
    pub refinement_error: f64,
}

impl BenchmarkRecord {
    pub const CSV_HEADER: &'static str =
        "lambda,s_inst,omega0,omega1,gap_numeric,b_prime,refinement_error";

    pub fn csv_row(&self) -> String {
        [
            self.lambda,
            self.s_inst,
            self.omega0,
            self.omega1,
            self.gap_numeric,
            self.b_prime,
            self.refinement_error,
        ]
        .map(sig17)
        .join(",")
    }

    /// `gap^2 - (omega1 - omega0)^2 / 4` exceeds ten times its own
    /// discretization uncertainty, and the extraction was not clamped.
    pub fn passes_regime_guard(&self) -> bool {
        let split = (self.omega1 - self.omega0).abs() / 2.0;
        let excess = (self.gap_numeric - split) * (self.gap_numeric + split);
        let uncertainty = 2.0 * self.gap_numeric * self.refinement_error;
        self.b_prime > 0.0 && excess > 10.0 * uncertainty
    }
}

pub fn records_to_csv(records: &[BenchmarkRecord]) -> String {
    let mut out = String::from(BenchmarkRecord::CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

/// Benchmark record for `lambda (x^2 - 1)^2 (x^2 + b x + 1)`.
pub fn benchmark_point(b: f64, lambda: f64, grid: GridSpec) -> Result<BenchmarkRecord> {
    let potential = PolynomialPotential::benchmark(lambda, b)?;
    let mut minima = find_minima(&potential)?;
    if minima.len() < 2 {
        return Err(Error::NoWells);
    }
    // the two degenerate wells are the deepest pair
    minima.sort_by(|p, q| p.value.total_cmp(&q.value));
    let (mut left, mut right) = (minima[0], minima[1]);
    if left.location > right.location {
        std::mem::swap(&mut left, &mut right);
    }
    let params = well_parameters(&potential, &left, &right, None, 1.0)?;
    let gap = numeric_gap(&potential, grid)?;
    let coupling = extract_coupling(gap.gap, params.omega0, params.omega1)?;
    Ok(BenchmarkRecord {
        lambda,
        s_inst: params.action.expect("well_parameters sets the action"),
        omega0: params.omega0,
        omega1: params.omega1,
        gap_numeric: gap.gap,
        b_prime: coupling.coupling,
        refinement_error: gap.error_estimate,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingStudy {
    #[serde(serialize_with = "serialize_sig17")]
    pub b: f64,
    /// One record per requested `lambda`, in input order.
    pub records: Vec<BenchmarkRecord>,
    /// `lambda` values failing the regime guard, left out of the fit.
    #[serde(serialize_with = "serialize_sig17_vec")]
    pub excluded: Vec<f64>,
    /// Least-squares slope of `ln B'` against `S_inst`.
    #[serde(serialize_with = "serialize_sig17")]
    pub slope: f64,
    #[serde(serialize_with = "serialize_sig17")]
    pub intercept: f64,
    /// `ln B' - (intercept + slope S_inst)` for each fitted point.
    #[serde(serialize_with = "serialize_sig17_vec")]
    pub residuals: Vec<f64>,
    /// `E_- - E_+` from the instanton formula with `K = K_hint`, per record.
    #[serde(serialize_with = "serialize_predicted")]
    pub predicted_gaps: Option<Vec<f64>>,
    #[serde(serialize_with = "serialize_sig17_opt")]
    pub k_hint: Option<f64>,
}

fn serialize_predicted<S: serde::Serializer>(
    x: &Option<Vec<f64>>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match x {
        Some(v) => serialize_sig17_vec(v, s),
        None => s.serialize_none(),
    }
}

/// Fits `ln B' = intercept + slope S_inst` over the benchmark family at
/// fixed `b`. Points run concurrently; the output order follows `lambdas`.
pub fn scaling_study(
    b: f64,
    lambdas: &[f64],
    k_hint: Option<f64>,
    grid: GridSpec,
) -> Result<ScalingStudy> {
    if lambdas.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidParameter {
            name: "lambdas",
            reason: "must be strictly ascending".into(),
        });
    }
    if let Some(k) = k_hint {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "K",
                reason: format!("must be positive and finite, got {k}"),
            });
        }
    }
    let records = lambdas
        .par_iter()
        .map(|&lambda| benchmark_point(b, lambda, grid))
        .collect::<Result<Vec<_>>>()?;
    let (usable, excluded): (Vec<&BenchmarkRecord>, Vec<&BenchmarkRecord>) =
        records.iter().partition(|r| r.passes_regime_guard());
    let excluded: Vec<f64> = excluded.iter().map(|r| r.lambda).collect();
    if usable.len() < 3 {
        return Err(Error::InsufficientPoints {
            usable: usable.len(),
            excluded,
        });
    }
    let xs: Vec<f64> = usable.iter().map(|r| r.s_inst).collect();
    let ys: Vec<f64> = usable.iter().map(|r| r.b_prime.ln()).collect();
    let (slope, intercept) = least_squares(&xs, &ys);
    let residuals = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| y - (intercept + slope * x))
        .collect();
    let predicted_gaps = match k_hint {
        Some(k) => Some(
            records
                .iter()
                .map(|r| {
                    let p = crate::potential::WellParameters::from_instanton(
                        r.omega0, r.omega1, k, r.s_inst, 1.0,
                    )?;
                    Ok(energies(&p)?.gap)
                })
                .collect::<Result<Vec<_>>>()?,
        ),
        None => None,
    };
    Ok(ScalingStudy {
        b,
        records,
        excluded,
        slope,
        intercept,
        residuals,
        predicted_gaps,
        k_hint,
    })
}

fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}
