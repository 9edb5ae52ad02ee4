//! Discretized stationarity operators, their low spectrum, Hermite reference
//! states and multiplier triples.
//!
//! The first stationarity ODE
//!
//! ```text
//! -½ ψ'' + (-λ1) ½ ω² q² ψ + λ3 ψ = 0
//! ```
//!
//! is the eigenproblem of `-½ d²/dq² + c ½ ω² q²` with `c = -λ1` and
//! eigenvalue `-λ3`. It is discretized with the three-point Laplacian on a
//! truncated grid with zero boundary values.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, SampledFunction};

/// Largest Hermite index [`hermite_state`] accepts.
pub const MAX_HERMITE_INDEX: usize = 20;

/// Largest boundary magnitude tolerated for a reference state.
pub const BOUNDARY_THRESHOLD: f64 = 1e-8;

/// Symmetric tridiagonal matrix on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalOperator {
    diagonal: Vec<f64>,
    off_diagonal: Vec<f64>,
    grid: Grid,
}

impl TridiagonalOperator {
    pub fn new(diagonal: Vec<f64>, off_diagonal: Vec<f64>, grid: Grid) -> Result<Self> {
        if diagonal.len() != grid.n_points() || off_diagonal.len() + 1 != diagonal.len() {
            return Err(Error::GridMismatch(format!(
                "{} diagonal / {} off-diagonal entries for {} points",
                diagonal.len(),
                off_diagonal.len(),
                grid.n_points()
            )));
        }
        if diagonal.iter().chain(&off_diagonal).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("operator entry".into()));
        }
        Ok(TridiagonalOperator { diagonal, off_diagonal, grid })
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    pub fn off_diagonal(&self) -> &[f64] {
        &self.off_diagonal
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.diagonal.len()
    }

    pub fn apply(&self, f: &SampledFunction) -> Result<SampledFunction> {
        crate::grid::check_same_grid(&self.grid, f.grid())?;
        let v = f.values();
        let n = v.len();
        let out = (0..n)
            .map(|j| {
                let mut acc = self.diagonal[j] * v[j];
                if j > 0 {
                    acc += self.off_diagonal[j - 1] * v[j - 1];
                }
                if j + 1 < n {
                    acc += self.off_diagonal[j] * v[j + 1];
                }
                acc
            })
            .collect();
        Ok(SampledFunction::from_parts(self.grid, out))
    }

    fn apply_real(&self, v: &[f64]) -> Vec<f64> {
        let n = v.len();
        (0..n)
            .map(|j| {
                let mut acc = self.diagonal[j] * v[j];
                if j > 0 {
                    acc += self.off_diagonal[j - 1] * v[j - 1];
                }
                if j + 1 < n {
                    acc += self.off_diagonal[j] * v[j + 1];
                }
                acc
            })
            .collect()
    }

    fn max_abs_entry(&self) -> f64 {
        self.diagonal.iter().chain(&self.off_diagonal).fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Number of eigenvalues strictly below `x` (Sturm sequence).
    fn count_below(&self, x: f64) -> usize {
        let tiny = f64::MIN_POSITIVE.sqrt() * self.max_abs_entry().max(1.0);
        let mut count = 0;
        let mut d = 1.0;
        for j in 0..self.dim() {
            let b2 = if j == 0 { 0.0 } else { self.off_diagonal[j - 1].powi(2) };
            d = self.diagonal[j] - x - b2 / d;
            if d == 0.0 {
                d = -tiny;
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn gershgorin(&self) -> (f64, f64) {
        let n = self.dim();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for j in 0..n {
            let r = if j > 0 { self.off_diagonal[j - 1].abs() } else { 0.0 }
                + if j + 1 < n { self.off_diagonal[j].abs() } else { 0.0 };
            lo = lo.min(self.diagonal[j] - r);
            hi = hi.max(self.diagonal[j] + r);
        }
        (lo, hi)
    }
}

/// Operator of the first stationarity ODE with `curvature = -λ1`:
/// diagonal `1/h² + curvature·½ω²q²`, off-diagonal `-1/(2h²)`.
pub fn hamiltonian(grid: &Grid, omega: f64, curvature: f64) -> Result<TridiagonalOperator> {
    if !(omega.is_finite() && omega > 0.0) {
        return Err(Error::invalid(format!("omega must be positive, got {omega}")));
    }
    if !(curvature.is_finite() && curvature > 0.0) {
        return Err(Error::invalid(format!(
            "curvature must be positive for a bound-state problem, got {curvature}"
        )));
    }
    let h2 = grid.spacing() * grid.spacing();
    let diagonal = grid
        .points()
        .map(|q| 1.0 / h2 + curvature * 0.5 * omega * omega * q * q)
        .collect();
    let off_diagonal = vec![-0.5 / h2; grid.n_points() - 1];
    TridiagonalOperator::new(diagonal, off_diagonal, *grid)
}

/// The three Lagrange multipliers of the stationarity ODEs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Multipliers {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
}

impl Multipliers {
    pub fn new(lambda1: f64, lambda2: f64, lambda3: f64) -> Result<Self> {
        if !lambda1.is_finite() || lambda1 >= 0.0 || !lambda2.is_finite() || !lambda3.is_finite() {
            return Err(Error::invalid(format!(
                "multipliers ({lambda1}, {lambda2}, {lambda3}) need finite values and lambda1 < 0"
            )));
        }
        Ok(Multipliers { lambda1, lambda2, lambda3 })
    }
}

/// `(λ1, λ2, λ3) = (-1, (n+½)ω, -(n+½)ω)`, under which `h_n` solves both
/// stationarity ODEs.
pub fn multipliers_for(n: usize, omega: f64) -> Result<Multipliers> {
    if !(omega.is_finite() && omega > 0.0) {
        return Err(Error::invalid(format!("omega must be positive, got {omega}")));
    }
    let e = (n as f64 + 0.5) * omega;
    Ok(Multipliers { lambda1: -1.0, lambda2: e, lambda3: -e })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenSolution {
    pub eigenvalues: Vec<f64>,
    pub eigenfunctions: Vec<SampledFunction>,
}

/// Lowest `k` eigenpairs by Sturm bisection followed by inverse iteration.
///
/// Eigenfunctions are real, normalized with trapezoidal quadrature and signed
/// so the first component above `1e-8` of the peak is positive.
pub fn solve_spectrum(op: &TridiagonalOperator, k: usize) -> Result<EigenSolution> {
    let n = op.dim();
    if k == 0 || k > n / 4 {
        return Err(Error::invalid(format!("k = {k} outside 1..={}", n / 4)));
    }
    let (lo, hi) = op.gershgorin();
    let scale = op.max_abs_entry().max(1.0);

    let mut eigenvalues = Vec::with_capacity(k);
    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(k);
    for i in 0..k {
        let lambda = bisect(op, i, lo, hi);
        let v = inverse_iteration(op, lambda, &vectors, scale)?;
        eigenvalues.push(lambda);
        vectors.push(v);
    }

    let grid = *op.grid();
    let eigenfunctions = vectors
        .into_iter()
        .map(|v| {
            let norm2: f64 = v.iter().enumerate().map(|(j, x)| grid.weight(j) * x * x).sum();
            let peak = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            let first = v.iter().find(|x| x.abs() > 1e-8 * peak).copied().unwrap_or(1.0);
            let s = first.signum() / norm2.sqrt();
            SampledFunction::from_parts(grid, v.iter().map(|x| Complex64::new(s * x, 0.0)).collect())
        })
        .collect();
    Ok(EigenSolution { eigenvalues, eigenfunctions })
}

fn bisect(op: &TridiagonalOperator, index: usize, mut lo: f64, mut hi: f64) -> f64 {
    // invariant: count_below(lo) <= index < count_below(hi)
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if op.count_below(mid) > index {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 4.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
            break;
        }
    }
    0.5 * (lo + hi)
}

const INVERSE_ITERATION_CAP: usize = 8;

fn inverse_iteration(
    op: &TridiagonalOperator,
    lambda: f64,
    previous: &[Vec<f64>],
    scale: f64,
) -> Result<Vec<f64>> {
    let n = op.dim();
    // deterministic start with components in every mode
    let mut v: Vec<f64> = (0..n).map(|j| 1.0 + 0.5 * ((j as f64) * 0.618).sin()).collect();
    let tol = 1e-10 * scale;
    let mut residual = f64::INFINITY;
    for _ in 0..INVERSE_ITERATION_CAP {
        v = shifted_solve(op, lambda, &v, scale);
        for p in previous {
            let d: f64 = v.iter().zip(p).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(p).for_each(|(a, b)| *a -= d * b);
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            break;
        }
        v.iter_mut().for_each(|x| *x /= norm);
        let tv = op.apply_real(&v);
        residual = tv.iter().zip(&v).map(|(a, b)| (a - lambda * b).abs()).fold(0.0, f64::max);
        if residual <= tol {
            return Ok(v);
        }
    }
    Err(Error::NoConvergence {
        iterations: INVERSE_ITERATION_CAP,
        reason: format!("inverse iteration at eigenvalue {lambda}: residual {residual:.3e}"),
    })
}

/// Solve `(T - σI) x = b` by Gaussian elimination with partial pivoting.
fn shifted_solve(op: &TridiagonalOperator, sigma: f64, b: &[f64], scale: f64) -> Vec<f64> {
    let n = op.dim();
    let tiny = f64::EPSILON * scale;
    let mut d: Vec<f64> = op.diagonal.iter().map(|a| a - sigma).collect();
    let dl = op.off_diagonal.clone();
    let mut du = op.off_diagonal.clone();
    let mut du2 = vec![0.0; n.saturating_sub(2)];
    let mut x = b.to_vec();

    for i in 0..n - 1 {
        if d[i].abs() >= dl[i].abs() {
            if d[i] == 0.0 {
                d[i] = tiny;
            }
            let fact = dl[i] / d[i];
            d[i + 1] -= fact * du[i];
            x[i + 1] -= fact * x[i];
        } else {
            let fact = d[i] / dl[i];
            d[i] = dl[i];
            let tmp = d[i + 1];
            d[i + 1] = du[i] - fact * tmp;
            if i + 2 < n {
                du2[i] = du[i + 1];
                du[i + 1] = -fact * du2[i];
            }
            du[i] = tmp;
            x.swap(i, i + 1);
            x[i + 1] -= fact * x[i];
        }
    }
    if d[n - 1] == 0.0 {
        d[n - 1] = tiny;
    }
    x[n - 1] /= d[n - 1];
    x[n - 2] = (x[n - 2] - du[n - 2] * x[n - 1]) / d[n - 2];
    for i in (0..n - 2).rev() {
        x[i] = (x[i] - du[i] * x[i + 1] - du2[i] * x[i + 2]) / d[i];
    }
    x
}

/// Normalized Hermite-Gaussian
/// `h_n(q) = (ω/π)^{1/4} (2ⁿ n!)^{-1/2} H_n(√ω q) e^{-ωq²/2}`
/// by the three-term recurrence on normalized Hermite functions.
pub fn hermite_state(n: usize, omega: f64, grid: &Grid) -> Result<SampledFunction> {
    if n > MAX_HERMITE_INDEX {
        return Err(Error::invalid(format!("Hermite index {n} exceeds {MAX_HERMITE_INDEX}")));
    }
    if !(omega.is_finite() && omega > 0.0) {
        return Err(Error::invalid(format!("omega must be positive, got {omega}")));
    }
    let values: Vec<Complex64> = grid
        .points()
        .map(|q| Complex64::new(hermite_function(n, omega.sqrt() * q) * omega.powf(0.25), 0.0))
        .collect();
    let f = SampledFunction::new(*grid, values)?;
    let edge = f.values()[0].norm().max(f.values()[f.len() - 1].norm());
    if edge > BOUNDARY_THRESHOLD {
        return Err(Error::GridTooNarrow(format!(
            "h_{n} is {edge:.2e} at the boundary of [{}, {}]",
            grid.x_min(),
            grid.x_max()
        )));
    }
    Ok(f)
}

/// Normalized Hermite function of unit frequency,
/// `ψ_{k+1}(x) = √(2/(k+1)) x ψ_k(x) − √(k/(k+1)) ψ_{k−1}(x)`.
pub(crate) fn hermite_function(n: usize, x: f64) -> f64 {
    let mut prev = 0.0;
    let mut cur = std::f64::consts::PI.powf(-0.25) * (-0.5 * x * x).exp();
    for k in 0..n {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * x * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Sign changes among samples whose magnitude exceeds `1e-8` of the peak.
pub fn sign_changes(f: &SampledFunction) -> usize {
    let peak = f.max_abs();
    let mut last = 0.0f64;
    let mut changes = 0;
    for v in f.values() {
        if v.norm() <= 1e-8 * peak {
            continue;
        }
        let s = v.re.signum();
        if last != 0.0 && s != last {
            changes += 1;
        }
        last = s;
    }
    changes
}
