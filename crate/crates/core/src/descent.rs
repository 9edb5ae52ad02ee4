//! Gradient descent with Barzilai-Borwein trial steps and Armijo backtracking.
//!
//! Accepted steps always satisfy the Armijo condition, so the objective is
//! non-increasing along the returned trace.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub(crate) struct DescentOptions {
    pub max_iterations: usize,
    /// Stop when the gradient norm falls below this value.
    pub gradient_tolerance: f64,
    /// Stop when the gradient norm falls below this fraction of its initial value.
    pub relative_tolerance: f64,
    /// Stop when the objective fell by less than this fraction of its value
    /// over the last `STALL_WINDOW` steps. Zero disables the test.
    pub objective_tolerance: f64,
}

pub(crate) const STALL_WINDOW: usize = 10;

#[derive(Debug, Clone)]
pub(crate) struct DescentOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub gradient_norm: f64,
    pub initial_gradient_norm: f64,
    pub iterations: usize,
    /// The last line search found no representable decrease.
    pub line_search_failed: bool,
    pub converged: bool,
    /// Objective after every accepted step, starting with the initial value.
    pub trace: Vec<f64>,
}

const ARMIJO: f64 = 1e-4;
const MIN_STEP: f64 = 1e-300;

/// Minimize `eval`, which returns the value and the gradient in the geometry
/// defined by `dot` (the gradient is the Riesz representer of the derivative).
pub(crate) fn minimize<E, D>(x0: Vec<f64>, eval: E, dot: D, opts: &DescentOptions) -> Result<DescentOutcome>
where
    E: Fn(&[f64]) -> (f64, Vec<f64>),
    D: Fn(&[f64], &[f64]) -> f64,
{
    let mut x = x0;
    let (mut f, mut g) = eval(&x);
    if !f.is_finite() {
        return Err(Error::NonFinite(format!("objective is {f} at the starting point")));
    }
    let mut gnorm = dot(&g, &g).sqrt();
    let g0 = gnorm;
    let mut trace = vec![f];
    let mut step = if gnorm > 0.0 { 1.0 / gnorm.max(1.0) } else { 1.0 };
    let mut iterations = 0;

    let done = |gnorm: f64| gnorm <= opts.gradient_tolerance || gnorm <= opts.relative_tolerance * g0;
    let stalled = |trace: &[f64]| {
        trace.len() > STALL_WINDOW
            && trace[trace.len() - 1 - STALL_WINDOW] - trace[trace.len() - 1]
                <= opts.objective_tolerance * trace[trace.len() - 1].abs()
    };
    let mut stall = false;
    let mut line_search_failed = false;

    while !done(gnorm) && !stall && iterations < opts.max_iterations {
        let mut t = step;
        let accepted = loop {
            let trial: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a - t * b).collect();
            let (ft, gt) = eval(&trial);
            if ft.is_finite() && ft <= f - ARMIJO * t * gnorm * gnorm {
                break Some((trial, ft, gt, t));
            }
            t *= 0.5;
            if t < MIN_STEP || t * gnorm <= f64::EPSILON * dot(&x, &x).sqrt().max(f64::MIN_POSITIVE) {
                break None;
            }
        };
        let Some((xn, fn_, gn, t)) = accepted else {
            line_search_failed = true;
            break;
        };
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        step = if sy > 0.0 { dot(&s, &s) / sy } else { 2.0 * t };
        x = xn;
        f = fn_;
        g = gn;
        gnorm = dot(&g, &g).sqrt();
        trace.push(f);
        iterations += 1;
        stall = opts.objective_tolerance > 0.0 && stalled(&trace);
    }

    Ok(DescentOutcome {
        converged: done(gnorm) || stall,
        x,
        value: f,
        gradient_norm: gnorm,
        initial_gradient_norm: g0,
        iterations,
        line_search_failed,
        trace,
    })
}
