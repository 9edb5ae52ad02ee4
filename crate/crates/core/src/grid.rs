//! Uniform grids, quadrature, finite differences and the ω-scaled Fourier
//! transform between q-space and L-space.
//!
//! Infinite integrals are truncated to `[x_min, x_max]`. For oscillator
//! problems the grid is symmetric and its half width should scale like
//! `1/√ω` (and grow with the highest mode in use); see
//! [`default_half_width`].

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest grid the crate accepts.
pub const MIN_POINTS: usize = 16;

/// Fraction of grid points on each side that forms the boundary band used to
/// measure decay.
pub const DECAY_BAND_FRACTION: f64 = 0.05;

/// Half width at which the ground-state Gaussian of frequency `omega` has
/// decayed below 1e-13.
pub fn default_half_width(omega: f64) -> f64 {
    8.0 / omega.sqrt()
}

/// A uniform grid on `[x_min, x_max]` with `n_points` nodes including both
/// endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridSpec", into = "GridSpec")]
pub struct Grid {
    x_min: f64,
    x_max: f64,
    n_points: usize,
    spacing: f64,
}

#[derive(Serialize, Deserialize)]
struct GridSpec {
    x_min: f64,
    x_max: f64,
    n_points: usize,
}

impl TryFrom<GridSpec> for Grid {
    type Error = Error;

    fn try_from(spec: GridSpec) -> Result<Self> {
        Grid::new(spec.x_min, spec.x_max, spec.n_points)
    }
}

impl From<Grid> for GridSpec {
    fn from(g: Grid) -> Self {
        GridSpec { x_min: g.x_min, x_max: g.x_max, n_points: g.n_points }
    }
}

impl Grid {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        if !x_min.is_finite() || !x_max.is_finite() {
            return Err(Error::InvalidGrid(format!("non-finite bounds [{x_min}, {x_max}]")));
        }
        if x_min >= x_max {
            return Err(Error::InvalidGrid(format!("empty interval [{x_min}, {x_max}]")));
        }
        if n_points < MIN_POINTS {
            return Err(Error::InvalidGrid(format!(
                "{n_points} points, need at least {MIN_POINTS}"
            )));
        }
        let spacing = (x_max - x_min) / (n_points - 1) as f64;
        Ok(Grid { x_min, x_max, n_points, spacing })
    }

    /// Symmetric grid on `[-x_max, x_max]`.
    pub fn symmetric(x_max: f64, n_points: usize) -> Result<Self> {
        if !(x_max.is_finite() && x_max > 0.0) {
            return Err(Error::InvalidGrid(format!("half width must be positive, got {x_max}")));
        }
        Grid::new(-x_max, x_max, n_points)
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    #[inline]
    pub fn point(&self, j: usize) -> f64 {
        // anchor the last node exactly on x_max
        if j + 1 == self.n_points {
            self.x_max
        } else {
            self.x_min + j as f64 * self.spacing
        }
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(move |j| self.point(j))
    }

    /// Trapezoidal quadrature weight of node `j`.
    #[inline]
    pub fn weight(&self, j: usize) -> f64 {
        if j == 0 || j + 1 == self.n_points {
            0.5 * self.spacing
        } else {
            self.spacing
        }
    }

    pub fn is_symmetric(&self) -> bool {
        (self.x_min + self.x_max).abs() <= 1e-12 * self.x_max.abs().max(1.0)
    }

    pub(crate) fn require_symmetric(&self, what: &str) -> Result<()> {
        if self.is_symmetric() {
            Ok(())
        } else {
            Err(Error::InvalidGrid(format!(
                "{what} grid [{}, {}] is not symmetric about 0",
                self.x_min, self.x_max
            )))
        }
    }

    /// Number of nodes in each boundary band.
    pub fn band_len(&self) -> usize {
        ((DECAY_BAND_FRACTION * self.n_points as f64).ceil() as usize).max(1)
    }

    /// Indices of the two boundary bands, left band first.
    pub fn band_indices(&self) -> impl Iterator<Item = usize> {
        let b = self.band_len();
        let n = self.n_points;
        (0..b).chain(n - b..n)
    }
}

/// `make_grid(x_max, n)`: symmetric grid on `[-x_max, x_max]`.
pub fn make_grid(x_max: f64, n_points: usize) -> Result<Grid> {
    Grid::symmetric(x_max, n_points)
}

/// Complex samples of a function on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    grid: Grid,
    values: Vec<Complex64>,
}

impl SampledFunction {
    pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.n_points() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.n_points()
            )));
        }
        if let Some(j) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::NonFinite(format!("sample {j} is {}", values[j])));
        }
        Ok(SampledFunction { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        SampledFunction { grid, values: vec![Complex64::new(0.0, 0.0); grid.n_points()] }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let values = grid.points().map(f).collect();
        SampledFunction::new(grid, values)
    }

    pub fn from_real_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        SampledFunction::from_fn(grid, |x| Complex64::new(f(x), 0.0))
    }

    /// Constructor for values produced by crate code from valid inputs.
    pub(crate) fn from_parts(grid: Grid, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), grid.n_points());
        SampledFunction { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Pointwise `|f|²`.
    pub fn density(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }

    /// `∫|f|²`.
    pub fn norm_squared(&self) -> f64 {
        self.values
            .iter()
            .enumerate()
            .map(|(j, v)| self.grid.weight(j) * v.norm_sqr())
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn scale(&self, c: Complex64) -> SampledFunction {
        self.map(|v| v * c)
    }

    pub fn scale_real(&self, c: f64) -> SampledFunction {
        self.map(|v| v * c)
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> SampledFunction {
        SampledFunction::from_parts(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn add(&self, other: &SampledFunction) -> Result<SampledFunction> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &SampledFunction) -> Result<SampledFunction> {
        self.zip_with(other, |a, b| a - b)
    }

    /// `self + c·other`.
    pub fn add_scaled(&self, c: Complex64, other: &SampledFunction) -> Result<SampledFunction> {
        self.zip_with(other, |a, b| a + c * b)
    }

    fn zip_with(
        &self,
        other: &SampledFunction,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<SampledFunction> {
        check_same_grid(&self.grid, &other.grid)?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Ok(SampledFunction::from_parts(self.grid, values))
    }

    /// Largest magnitude over the two boundary bands.
    pub fn boundary_magnitude(&self) -> f64 {
        self.grid.band_indices().map(|j| self.values[j].norm()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

pub(crate) fn check_same_grid(a: &Grid, b: &Grid) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::GridMismatch(format!(
            "[{}, {}]x{} vs [{}, {}]x{}",
            a.x_min, a.x_max, a.n_points, b.x_min, b.x_max, b.n_points
        )))
    }
}

/// Trapezoidal quadrature of the samples.
pub fn integrate(f: &SampledFunction) -> Complex64 {
    f.values
        .iter()
        .enumerate()
        .map(|(j, &v)| v * f.grid.weight(j))
        .sum()
}

/// Second-order finite-difference derivative: central differences inside,
/// one-sided three-point stencils at the endpoints.
pub fn differentiate(f: &SampledFunction) -> Result<SampledFunction> {
    let n = f.len();
    if n < 3 {
        return Err(Error::InvalidGrid(format!("{n} points, differentiation needs 3")));
    }
    let v = &f.values;
    let inv2h = 0.5 / f.grid.spacing();
    let mut out = Vec::with_capacity(n);
    out.push((-3.0 * v[0] + 4.0 * v[1] - v[2]) * inv2h);
    for j in 1..n - 1 {
        out.push((v[j + 1] - v[j - 1]) * inv2h);
    }
    out.push((3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) * inv2h);
    Ok(SampledFunction::from_parts(f.grid, out))
}

/// `√(∫|a − b|²)`.
pub fn l2_distance(a: &SampledFunction, b: &SampledFunction) -> Result<f64> {
    Ok(a.sub(b)?.norm())
}

/// Sign of the exponent in the transform kernel `exp(∓iωqL)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// L-space to q-space, kernel `exp(-iωqL)`.
    Forward,
    /// q-space to L-space, kernel `exp(+iωqL)`.
    Inverse,
}

impl Direction {
    fn sign(self) -> f64 {
        match self {
            Direction::Forward => -1.0,
            Direction::Inverse => 1.0,
        }
    }
}

fn check_omega(omega: f64) -> Result<()> {
    if omega.is_finite() && omega > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("omega must be positive, got {omega}")))
    }
}

/// Dense quadrature matrix of the ω-scaled Fourier transform
///
/// `g(y_j) = √(ω/2π) Σ_k w_k f(x_k) exp(∓iω y_j x_k)`
///
/// with trapezoidal weights `w_k` of the input grid. The `√(ω/2π)` prefactor
/// makes the transform unitary, so normalized inputs give normalized outputs.
#[derive(Debug, Clone)]
pub struct FourierKernel {
    input: Grid,
    output: Grid,
    // row-major, output index outer
    entries: Vec<Complex64>,
}

impl FourierKernel {
    pub fn new(input: &Grid, output: &Grid, omega: f64, direction: Direction) -> Result<Self> {
        check_omega(omega)?;
        let scale = (omega / (2.0 * PI)).sqrt();
        let sign = direction.sign();
        let n_in = input.n_points();
        let mut entries = Vec::with_capacity(n_in * output.n_points());
        for y in output.points() {
            for k in 0..n_in {
                let phase = sign * omega * y * input.point(k);
                entries.push(Complex64::from_polar(scale * input.weight(k), phase));
            }
        }
        Ok(FourierKernel { input: *input, output: *output, entries })
    }

    pub fn input(&self) -> &Grid {
        &self.input
    }

    pub fn output(&self) -> &Grid {
        &self.output
    }

    pub fn apply(&self, f: &SampledFunction) -> Result<SampledFunction> {
        check_same_grid(&self.input, f.grid())?;
        Ok(SampledFunction::from_parts(self.output, self.apply_values(f.values())))
    }

    pub(crate) fn apply_values(&self, x: &[Complex64]) -> Vec<Complex64> {
        let n_in = self.input.n_points();
        self.entries
            .chunks_exact(n_in)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Conjugate-transpose product `Aᴴ y`.
    pub(crate) fn apply_adjoint_values(&self, y: &[Complex64]) -> Vec<Complex64> {
        let n_in = self.input.n_points();
        let mut out = vec![Complex64::new(0.0, 0.0); n_in];
        for (row, &yj) in self.entries.chunks_exact(n_in).zip(y) {
            for (o, a) in out.iter_mut().zip(row) {
                *o += a.conj() * yj;
            }
        }
        out
    }
}

/// Transform `f` (sampled on its L-grid) onto `q_grid` with kernel
/// `exp(-iωqL)`.
pub fn transform_forward(f: &SampledFunction, q_grid: &Grid, omega: f64) -> Result<SampledFunction> {
    FourierKernel::new(f.grid(), q_grid, omega, Direction::Forward)?.apply(f)
}

/// Adjoint of [`transform_forward`], kernel `exp(+iωqL)`.
pub fn transform_inverse(psi: &SampledFunction, l_grid: &Grid, omega: f64) -> Result<SampledFunction> {
    FourierKernel::new(psi.grid(), l_grid, omega, Direction::Inverse)?.apply(psi)
}

/// Forward transform evaluated only at the given output points.
pub(crate) fn transform_forward_at(f: &SampledFunction, points: &[f64], omega: f64) -> Result<Vec<Complex64>> {
    check_omega(omega)?;
    let scale = (omega / (2.0 * PI)).sqrt();
    let grid = f.grid();
    Ok(points
        .iter()
        .map(|&y| {
            f.values()
                .iter()
                .enumerate()
                .map(|(k, &v)| v * Complex64::from_polar(scale * grid.weight(k), -omega * y * grid.point(k)))
                .sum()
        })
        .collect())
}
