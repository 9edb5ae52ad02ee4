//! The two-variable analogue `x² − y² = 0`.
//!
//! Every point of the cone `|x| = |y|` solves the unperturbed equation. Under
//! random perturbations `(δx_i, δy_i)` the overdetermined system
//! `(x + δx_i)² − (y + δy_i)² = 0` has its least-squares optimum near the
//! origin, so the origin resists perturbation while a point such as `(1, 1)`
//! is pulled all the way back to it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{label_for, StabilityLabel, MIN_COUNT};
use crate::descent::{self, DescentOptions};
use crate::error::{Error, Result};

pub fn toy_residual(x: f64, y: f64, dx: f64, dy: f64) -> f64 {
    (x + dx).powi(2) - (y + dy).powi(2)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToyEnsemble {
    deltas: Vec<(f64, f64)>,
    amplitude: f64,
    seed: u64,
}

impl ToyEnsemble {
    /// `count` draws of `(δx, δy)` from a normal distribution with standard
    /// deviation `amplitude`, truncated at three deviations. The standard
    /// draws do not depend on `amplitude`, so changing it rescales the same
    /// ensemble.
    pub fn generate(count: usize, amplitude: f64, seed: u64) -> Result<Self> {
        if count < MIN_COUNT {
            return Err(Error::invalid(format!("count must be at least {MIN_COUNT}, got {count}")));
        }
        if !(amplitude.is_finite() && amplitude > 0.0) {
            return Err(Error::invalid(format!("amplitude must be positive, got {amplitude}")));
        }
        let normal = Normal::new(0.0, 1.0).expect("unit normal");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = || loop {
            let z: f64 = normal.sample(&mut rng);
            if z.abs() <= 3.0 {
                break z * amplitude;
            }
        };
        let deltas = (0..count).map(|_| (draw(), draw())).collect();
        Ok(ToyEnsemble { deltas, amplitude, seed })
    }

    /// Explicit perturbations, without size checks.
    pub fn from_deltas(deltas: Vec<(f64, f64)>, amplitude: f64) -> Result<Self> {
        if deltas.is_empty() {
            return Err(Error::invalid("empty toy ensemble"));
        }
        if deltas.iter().any(|(a, b)| !(a.is_finite() && b.is_finite())) {
            return Err(Error::NonFinite("toy perturbation".into()));
        }
        Ok(ToyEnsemble { deltas, amplitude, seed: 0 })
    }

    pub fn deltas(&self) -> &[(f64, f64)] {
        &self.deltas
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// `Σ_i toy_residual(x, y, δx_i, δy_i)²`.
    pub fn objective(&self, x: f64, y: f64) -> f64 {
        self.deltas.iter().map(|&(dx, dy)| toy_residual(x, y, dx, dy).powi(2)).sum()
    }

    fn objective_and_gradient(&self, x: f64, y: f64) -> (f64, [f64; 2]) {
        let mut s = 0.0;
        let mut g = [0.0; 2];
        for &(dx, dy) in &self.deltas {
            let r = toy_residual(x, y, dx, dy);
            s += r * r;
            g[0] += 4.0 * r * (x + dx);
            g[1] -= 4.0 * r * (y + dy);
        }
        (s, g)
    }

    /// Power sums of the residual coefficients. Writing each residual as
    /// `u + a x + b y + c` with `u = x² − y²`, the objective is a polynomial
    /// in `(x, y)` whose coefficients are these sums.
    pub fn moments(&self) -> ToyMoments {
        let mut m = ToyMoments { n: self.deltas.len() as f64, ..ToyMoments::default() };
        for &(dx, dy) in &self.deltas {
            let (a, b, c) = (2.0 * dx, -2.0 * dy, dx * dx - dy * dy);
            m.a += a;
            m.b += b;
            m.c += c;
            m.aa += a * a;
            m.bb += b * b;
            m.cc += c * c;
            m.ab += a * b;
            m.ac += a * c;
            m.bc += b * c;
        }
        m
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ToyMoments {
    n: f64,
    a: f64,
    b: f64,
    c: f64,
    aa: f64,
    bb: f64,
    cc: f64,
    ab: f64,
    ac: f64,
    bc: f64,
}

impl ToyMoments {
    /// Same value as [`ToyEnsemble::objective`], in constant time.
    pub fn objective(&self, x: f64, y: f64) -> f64 {
        let u = x * x - y * y;
        self.n * u * u
            + 2.0 * u * (self.a * x + self.b * y + self.c)
            + self.aa * x * x
            + self.bb * y * y
            + self.cc
            + 2.0 * (self.ab * x * y + self.ac * x + self.bc * y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToyOptimum {
    pub x: f64,
    pub y: f64,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
}

pub const TOY_MAX_ITERATIONS: usize = 200_000;

/// Least-squares optimum by gradient descent with backtracking from `init`.
pub fn toy_optimize(ensemble: &ToyEnsemble, init: (f64, f64)) -> Result<ToyOptimum> {
    let eval = |p: &[f64]| {
        let (s, g) = ensemble.objective_and_gradient(p[0], p[1]);
        (s, g.to_vec())
    };
    let dot = |a: &[f64], b: &[f64]| a[0] * b[0] + a[1] * b[1];
    let opts = DescentOptions { max_iterations: TOY_MAX_ITERATIONS, gradient_tolerance: 0.0, relative_tolerance: 1e-12, objective_tolerance: 0.0 };
    let out = descent::minimize(vec![init.0, init.1], eval, dot, &opts)?;
    Ok(ToyOptimum {
        x: out.x[0],
        y: out.x[1],
        objective: out.value,
        iterations: out.iterations,
        // running out of representable steps after a large gradient
        // reduction is convergence at rounding level
        converged: out.converged
            || (out.line_search_failed && out.gradient_norm <= 1e-6 * out.initial_gradient_norm),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSearchResult {
    pub x: f64,
    pub y: f64,
    pub objective: f64,
}

/// Exhaustive search over the square `[−half_width, half_width]²` with the
/// given step. Ties go to the first node in row-major order.
pub fn toy_grid_search(ensemble: &ToyEnsemble, half_width: f64, step: f64) -> Result<GridSearchResult> {
    if !(half_width > 0.0 && step > 0.0 && step <= half_width) {
        return Err(Error::invalid(format!("bad search box: half width {half_width}, step {step}")));
    }
    let m = ensemble.moments();
    let n = (2.0 * half_width / step).round() as usize;
    let coord = |k: usize| -half_width + k as f64 * step;
    let mut best = GridSearchResult { x: 0.0, y: 0.0, objective: f64::INFINITY };
    for i in 0..=n {
        let x = coord(i);
        for j in 0..=n {
            let y = coord(j);
            let v = m.objective(x, y);
            if v < best.objective {
                best = GridSearchResult { x, y, objective: v };
            }
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToyVerdict {
    pub rigid: (f64, f64),
    pub optimum: (f64, f64),
    /// Euclidean distance from the rigid point to the optimum.
    pub drift: f64,
    pub residual_at_rigid: f64,
    pub residual_at_optimum: f64,
    pub label: StabilityLabel,
    pub kappa: f64,
    pub converged: bool,
}

/// Optimize from the rigid point `(x, y)` and label it by its drift.
pub fn toy_classify(rigid: (f64, f64), ensemble: &ToyEnsemble, kappa: f64) -> Result<ToyVerdict> {
    if !(kappa.is_finite() && kappa > 0.0) {
        return Err(Error::invalid(format!("kappa must be positive, got {kappa}")));
    }
    let opt = toy_optimize(ensemble, rigid)?;
    let drift = (opt.x - rigid.0).hypot(opt.y - rigid.1);
    Ok(ToyVerdict {
        rigid,
        optimum: (opt.x, opt.y),
        drift,
        residual_at_rigid: ensemble.objective(rigid.0, rigid.1).sqrt(),
        residual_at_optimum: opt.objective.sqrt(),
        label: label_for(drift, ensemble.amplitude(), kappa),
        kappa,
        converged: opt.converged,
    })
}

/// `g(x) = (x + δx)² − (x + δy)²`, the residual along the diagonal `y = x`.
pub fn toy_g_profile(xs: &[f64], dx: f64, dy: f64) -> Vec<(f64, f64)> {
    xs.iter().map(|&x| (x, toy_residual(x, x, dx, dy))).collect()
}
