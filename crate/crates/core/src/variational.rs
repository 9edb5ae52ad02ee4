//! Stationary points of `I(ψ, F)` under the equilibrium constraints.
//!
//! Stationarity of the Lagrangian
//!
//! ```text
//! I + λ1 (½∫|F′|² − ½∫ω²q²|ψ|²) + λ2 (∫|F|² − 1) + λ3 (∫|ψ|² − 1)
//! ```
//!
//! gives the two ODEs checked by [`stationarity_residual`]. `I` alone is
//! unbounded below on the constraint set (a wide `F` drives `-½∫ω²L²|F|²` to
//! −∞ while a narrow `ψ` keeps the second balance), so the solver does not
//! descend on `I` directly. With `λ1 = -1` fixed, as in
//! [`crate::spectrum::multipliers_for`], the Lagrangian separates into
//! `E_q(ψ) − E_L(F)` plus the two normalization terms; the stationary points
//! of the `F` block are unchanged by flipping its sign. The solver therefore
//! runs an augmented-Lagrangian method on
//!
//! ```text
//! minimize  E_q(ψ) + E_L(F)   subject to  ∫|ψ|² = 1,  ∫|F|² = 1
//! ```
//!
//! with gradient descent (Barzilai-Borwein steps, Armijo backtracking) as the
//! inner loop. `λ3` and `λ2` are read off the normalization multipliers. The
//! two energy balances are not penalized; they are checked at the end and a
//! result only counts as converged when they hold.
//!
//! In paired mode `F` is eliminated as the inverse transform of `ψ`, and only
//! the normalization of `ψ` is enforced.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::descent::{self, DescentOptions};
use crate::eec::{self, EecResidual, EecState, OscillatorConfig};
use crate::error::{Error, Result};
use crate::grid::{Direction, FourierKernel, Grid, SampledFunction};
use crate::spectrum::{hermite_state, Multipliers};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveOptions {
    /// Outer (multiplier update) iterations.
    pub max_iterations: usize,
    /// Gradient steps allowed per outer iteration.
    pub max_inner_iterations: usize,
    pub gradient_tolerance: f64,
    pub constraint_tolerance: f64,
    pub penalty_growth: f64,
    pub initial_penalty: f64,
    pub paired_mode: bool,
    pub seed: u64,
    /// Weights of `[balance_q, balance_l, norm_f, norm_psi]` in the
    /// overdetermined least-squares objective of [`crate::stability`].
    pub residual_weights: [f64; 4],
    /// Stall test of the overdetermined least-squares descent: stop when the
    /// objective fell by less than this fraction over the last ten steps.
    pub objective_tolerance: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            max_iterations: 60,
            max_inner_iterations: 20_000,
            gradient_tolerance: 1e-3,
            constraint_tolerance: 1e-3,
            penalty_growth: 10.0,
            initial_penalty: 10.0,
            paired_mode: false,
            seed: 0,
            residual_weights: [1.0; 4],
            objective_tolerance: 1e-4,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 || self.max_inner_iterations == 0 {
            return Err(Error::invalid("iteration limits must be at least 1"));
        }
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.gradient_tolerance) || !positive(self.constraint_tolerance) {
            return Err(Error::invalid("tolerances must be positive"));
        }
        if !(self.objective_tolerance.is_finite() && self.objective_tolerance >= 0.0) {
            return Err(Error::invalid("objective_tolerance must be finite and nonnegative"));
        }
        if !(self.penalty_growth.is_finite() && self.penalty_growth > 1.0) {
            return Err(Error::invalid(format!("penalty_growth must exceed 1, got {}", self.penalty_growth)));
        }
        if !positive(self.initial_penalty) {
            return Err(Error::invalid("initial_penalty must be positive"));
        }
        if self.residual_weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::invalid("residual weights must be finite and nonnegative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub outer: usize,
    pub step: usize,
    pub augmented: f64,
}

#[derive(Debug, Clone)]
pub struct VariationalResult {
    pub state: EecState,
    pub multipliers: Multipliers,
    pub objective: f64,
    pub constraint_residuals: EecResidual,
    pub stationarity_residual: (f64, f64),
    /// Outer iterations performed.
    pub iterations: usize,
    pub inner_iterations: usize,
    pub converged: bool,
    pub trace: Vec<TraceEntry>,
}

/// L² norms, over interior nodes, of
///
/// ```text
/// -½ψ'' − λ1 ½ω²q²ψ + λ3ψ
/// -(λ1/2)F'' − ½ω²L²F + λ2F
/// ```
///
/// with three-point second differences.
pub fn stationarity_residual(state: &EecState, m: &Multipliers) -> (f64, f64) {
    let w2 = state.omega() * state.omega();
    let r1 = ode_residual(state.psi(), -0.5, -0.5 * m.lambda1 * w2, m.lambda3);
    let r2 = ode_residual(state.f(), -0.5 * m.lambda1, -0.5 * w2, m.lambda2);
    (r1, r2)
}

// ‖a f'' + b x² f + c f‖ over the interior
fn ode_residual(f: &SampledFunction, a: f64, b: f64, c: f64) -> f64 {
    let g = f.grid();
    let v = f.values();
    let h = g.spacing();
    let inv_h2 = 1.0 / (h * h);
    let sum: f64 = (1..v.len() - 1)
        .map(|j| {
            let x = g.point(j);
            let d2 = (v[j + 1] - 2.0 * v[j] + v[j - 1]) * inv_h2;
            (a * d2 + (b * x * x + c) * v[j]).norm_sqr()
        })
        .sum();
    (h * sum).sqrt()
}

pub(crate) fn flatten(values: &[Complex64]) -> Vec<f64> {
    values.iter().flat_map(|v| [v.re, v.im]).collect()
}

pub(crate) fn unflatten(x: &[f64]) -> Vec<Complex64> {
    x.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect()
}

/// Quadrature weights per real component, for the L² geometry.
pub(crate) fn component_weights(g: &Grid) -> Vec<f64> {
    (0..g.n_points()).flat_map(|j| [g.weight(j); 2]).collect()
}

/// `E(f) = ½∫|f′|² + ½∫ω²x²|f|²` and `∫|f|²` with their coefficient gradients
/// accumulated into `grad` as `e_scale·∇E + n_scale·∇N`.
fn energy_and_norm(
    f: &[Complex64],
    g: &Grid,
    omega: f64,
    e_scale: f64,
    n_scale: f64,
    grad: &mut [Complex64],
) -> (f64, f64) {
    let s = SampledFunction::from_parts(*g, f.to_vec());
    let e = eec::kinetic_energy(&s) + eec::potential_energy(&s, omega);
    let n = s.norm_squared();
    eec::kinetic_gradient(f, g.spacing(), grad, e_scale);
    eec::potential_gradient(f, g, omega, grad, e_scale);
    eec::norm_gradient(f, g, grad, n_scale);
    (e, n)
}

struct Layout {
    q: Grid,
    l: Grid,
    omega: f64,
    // q → L kernel, present in paired mode
    pairing: Option<FourierKernel>,
}

impl Layout {
    fn split<'a>(&self, x: &'a [f64]) -> (&'a [f64], &'a [f64]) {
        x.split_at(2 * self.q.n_points())
    }

    fn weights(&self) -> Vec<f64> {
        let mut w = component_weights(&self.q);
        if self.pairing.is_none() {
            w.extend(component_weights(&self.l));
        }
        w
    }

    fn psi_and_f(&self, x: &[f64]) -> (Vec<Complex64>, Vec<Complex64>) {
        match &self.pairing {
            Some(k) => {
                let psi = unflatten(x);
                let f = k.apply_values(&psi);
                (psi, f)
            }
            None => {
                let (a, b) = self.split(x);
                (unflatten(a), unflatten(b))
            }
        }
    }

    fn state(&self, x: &[f64], config: OscillatorConfig) -> EecState {
        let (psi, f) = self.psi_and_f(x);
        EecState::new(
            SampledFunction::from_parts(self.q, psi),
            SampledFunction::from_parts(self.l, f),
            config,
        )
        .expect("grids validated at entry")
    }

    /// Normalization constraints: `[ψ]` in paired mode, `[ψ, F]` otherwise.
    fn constraints(&self, x: &[f64]) -> Vec<f64> {
        let (psi, f) = self.psi_and_f(x);
        let mut c = vec![SampledFunction::from_parts(self.q, psi).norm_squared() - 1.0];
        if self.pairing.is_none() {
            c.push(SampledFunction::from_parts(self.l, f).norm_squared() - 1.0);
        }
        c
    }

    /// Augmented Lagrangian and its L² gradient.
    fn augmented(&self, x: &[f64], mu: &[f64], rho: f64, weights: &[f64]) -> (f64, Vec<f64>) {
        let (psi, f) = self.psi_and_f(x);
        let zero = Complex64::new(0.0, 0.0);
        let mut g_psi = vec![zero; psi.len()];
        let mut g_f = vec![zero; f.len()];

        // the norm gradient scale needs c, so evaluate the values first
        let n_psi = SampledFunction::from_parts(self.q, psi.clone()).norm_squared();
        let n_f = SampledFunction::from_parts(self.l, f.clone()).norm_squared();
        let c_psi = n_psi - 1.0;
        let c_f = n_f - 1.0;

        let (e_psi, _) = energy_and_norm(&psi, &self.q, self.omega, 1.0, mu[0] + rho * c_psi, &mut g_psi);
        let mut value = e_psi + mu[0] * c_psi + 0.5 * rho * c_psi * c_psi;

        let grad_flat = match &self.pairing {
            Some(k) => {
                let (e_f, _) = energy_and_norm(&f, &self.l, self.omega, 1.0, 0.0, &mut g_f);
                value += e_f;
                let back = k.apply_adjoint_values(&g_f);
                g_psi.iter_mut().zip(back).for_each(|(a, b)| *a += b);
                flatten(&g_psi)
            }
            None => {
                let (e_f, _) = energy_and_norm(&f, &self.l, self.omega, 1.0, mu[1] + rho * c_f, &mut g_f);
                value += e_f + mu[1] * c_f + 0.5 * rho * c_f * c_f;
                let mut v = flatten(&g_psi);
                v.extend(flatten(&g_f));
                v
            }
        };
        let grad = grad_flat.iter().zip(weights).map(|(g, w)| g / w).collect();
        (value, grad)
    }

    fn multipliers(&self, mu: &[f64]) -> Multipliers {
        match self.pairing {
            Some(_) => Multipliers { lambda1: -1.0, lambda2: -0.5 * mu[0], lambda3: 0.5 * mu[0] },
            None => Multipliers { lambda1: -1.0, lambda2: -mu[1], lambda3: mu[0] },
        }
    }
}

fn weighted_dot(w: &[f64]) -> impl Fn(&[f64], &[f64]) -> f64 + '_ {
    move |a, b| a.iter().zip(b).zip(w).map(|((x, y), w)| w * x * y).sum()
}

/// Augmented-Lagrangian search for a stationary point near `init`.
pub fn solve(init: &EecState, options: &SolveOptions) -> Result<VariationalResult> {
    options.validate()?;
    let config = init.config();
    let omega = config.omega;
    let q = *init.psi().grid();
    let l = *init.f().grid();

    let psi_norm = init.psi().norm_squared();
    if psi_norm.is_nan() || psi_norm <= 1e-12 {
        return Err(Error::DegenerateInit("psi has zero norm".into()));
    }
    let layout = if options.paired_mode {
        Layout { q, l: q, omega, pairing: Some(FourierKernel::new(&q, &q, omega, Direction::Inverse)?) }
    } else {
        let f_norm = init.f().norm_squared();
        if f_norm.is_nan() || f_norm <= 1e-12 {
            return Err(Error::DegenerateInit("F has zero norm".into()));
        }
        Layout { q, l, omega, pairing: None }
    };

    // project onto the normalization sphere
    let mut x = flatten(init.psi().scale_real(psi_norm.sqrt().recip()).values());
    if layout.pairing.is_none() {
        let f_norm = init.f().norm_squared();
        x.extend(flatten(init.f().scale_real(f_norm.sqrt().recip()).values()));
    }
    let weights = layout.weights();
    let dot = weighted_dot(&weights);

    // first-order multiplier estimates: μ = -E/N for each block
    let mut mu: Vec<f64> = {
        let (psi, f) = layout.psi_and_f(&x);
        let mut scratch = vec![Complex64::new(0.0, 0.0); psi.len()];
        let (e_psi, n_psi) = energy_and_norm(&psi, &q, omega, 1.0, 0.0, &mut scratch);
        let mut scratch = vec![Complex64::new(0.0, 0.0); f.len()];
        let (e_f, n_f) = energy_and_norm(&f, &layout.l, omega, 1.0, 0.0, &mut scratch);
        match layout.pairing {
            Some(_) => vec![-(e_psi + e_f) / n_psi],
            None => vec![-e_psi / n_psi, -e_f / n_f],
        }
    };
    let mut rho = options.initial_penalty;

    let check = |x: &[f64], mu: &[f64]| {
        let state = layout.state(x, config);
        let m = layout.multipliers(mu);
        let stat = stationarity_residual(&state, &m);
        let eecr = eec::evaluate_eec(&state);
        let ok = stat.0 <= options.gradient_tolerance
            && stat.1 <= options.gradient_tolerance
            && eecr.max_equality() <= options.constraint_tolerance;
        (state, m, stat, eecr, ok)
    };

    let mut trace = Vec::new();
    let mut inner_total = 0;
    let mut outer = 0;
    let (mut state, mut m, mut stat, mut eecr, mut ok) = check(&x, &mu);
    let mut prev_violation = f64::INFINITY;

    while !ok && outer < options.max_iterations {
        outer += 1;
        let inner_opts = DescentOptions {
            max_iterations: options.max_inner_iterations,
            gradient_tolerance: options.gradient_tolerance,
            relative_tolerance: 0.0,
            objective_tolerance: 0.0,
        };
        let mu_now = mu.clone();
        let out = descent::minimize(x, |y| layout.augmented(y, &mu_now, rho, &weights), &dot, &inner_opts)?;
        if !out.value.is_finite() {
            return Err(Error::NonFinite(format!("augmented objective at outer iteration {outer}")));
        }
        inner_total += out.iterations;
        trace.extend(
            out.trace.iter().enumerate().map(|(step, &augmented)| TraceEntry { outer, step, augmented }),
        );
        x = out.x;

        let c = layout.constraints(&x);
        mu.iter_mut().zip(&c).for_each(|(m, c)| *m += rho * c);
        let violation = c.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        if violation > 0.25 * prev_violation {
            rho = (rho * options.penalty_growth).min(1e10);
        }
        prev_violation = violation;

        (state, m, stat, eecr, ok) = check(&x, &mu);
    }

    Ok(VariationalResult {
        objective: eec::functional_i(&state),
        state,
        multipliers: m,
        constraint_residuals: eecr,
        stationarity_residual: stat,
        iterations: outer,
        inner_iterations: inner_total,
        converged: ok,
        trace,
    })
}

/// Seeded random initial state: a Gaussian-coefficient mixture of the lowest
/// `basis_size` Hermite states (even only, odd only, or both, chosen by the
/// seed), normalized, with `F` equal to `ψ`.
pub fn random_init(grid: &Grid, omega: f64, seed: u64, basis_size: usize) -> Result<EecState> {
    if basis_size < 2 {
        return Err(Error::invalid("basis_size must be at least 2"));
    }
    let config = OscillatorConfig::new(omega)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let parity: u8 = rng.random_range(0..3);
    let mut psi = SampledFunction::zeros(*grid);
    for k in 0..basis_size {
        let coeff: f64 = rng.sample(StandardNormal);
        let keep = match parity {
            0 => k % 2 == 0,
            1 => k % 2 == 1,
            _ => true,
        };
        if keep {
            psi = psi.add_scaled(Complex64::new(coeff, 0.0), &hermite_state(k, omega, grid)?)?;
        }
    }
    let norm = psi.norm();
    if norm.is_nan() || norm <= 0.0 {
        return Err(Error::DegenerateInit("random mixture vanished".into()));
    }
    let psi = psi.scale_real(1.0 / norm);
    EecState::new(psi.clone(), psi, config)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantizationEntry {
    pub energy: f64,
    pub nearest_level: usize,
    pub defect: f64,
}

/// Nearest oscillator level `n = round(E/ω − ½)` and `|E − (n+½)ω|`.
pub fn quantize(energy: f64, omega: f64) -> QuantizationEntry {
    let level = (energy / omega - 0.5).round().max(0.0);
    QuantizationEntry {
        energy,
        nearest_level: level as usize,
        defect: (energy - (level + 0.5) * omega).abs(),
    }
}

pub fn quantization_report(results: &[VariationalResult]) -> Result<Vec<QuantizationEntry>> {
    results
        .iter()
        .enumerate()
        .map(|(i, r)| {
            if !r.converged {
                return Err(Error::invalid(format!("result {i} did not converge")));
            }
            let energy = eec::expected_energy(r.state.psi(), r.state.config())?;
            Ok(quantize(energy, r.state.omega()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{l2_distance, make_grid};
    use crate::spectrum::multipliers_for;

    fn grid() -> Grid {
        make_grid(8.0, 1025).unwrap()
    }

    fn cfg() -> OscillatorConfig {
        OscillatorConfig::new(1.0).unwrap()
    }

    fn hermite_pair(g: &Grid, n: usize) -> EecState {
        let h = hermite_state(n, 1.0, g).unwrap();
        EecState::new(h.clone(), h, cfg()).unwrap()
    }

    #[test]
    fn residual_at_hermite_states() {
        let g = grid();
        for n in 0..4 {
            let (a, b) = stationarity_residual(&hermite_pair(&g, n), &multipliers_for(n, 1.0).unwrap());
            assert!(a <= 5e-3 && b <= 5e-3, "n={n}: {a} {b}");
        }
    }

    #[test]
    fn residual_with_wrong_lambda2() {
        let g = grid();
        let m = Multipliers::new(-1.0, 1.5, -0.5).unwrap();
        let (a, b) = stationarity_residual(&hermite_pair(&g, 0), &m);
        assert!(a < 1e-3);
        assert!((b - 1.0).abs() < 1e-3, "{b}");
    }

    #[test]
    fn residual_of_zero_state() {
        let z = SampledFunction::zeros(grid());
        let s = EecState::new(z.clone(), z, cfg()).unwrap();
        assert_eq!(stationarity_residual(&s, &multipliers_for(2, 1.0).unwrap()), (0.0, 0.0));
    }

    #[test]
    fn converges_to_ground_state() {
        let g = grid();
        let psi = hermite_state(0, 1.0, &g).unwrap().add_scaled(Complex64::new(0.05, 0.0), &hermite_state(2, 1.0, &g).unwrap()).unwrap();
        let init = EecState::new(psi.clone(), psi, cfg()).unwrap();
        let r = solve(&init, &SolveOptions::default()).unwrap();
        assert!(r.converged, "{:?}", (r.stationarity_residual, r.constraint_residuals));
        let h0 = hermite_state(0, 1.0, &g).unwrap();
        let d = l2_distance(r.state.psi(), &h0).unwrap().min(l2_distance(r.state.psi(), &h0.scale_real(-1.0)).unwrap());
        assert!(d <= 1e-2, "{d}");
        let e = eec::expected_energy(r.state.psi(), cfg()).unwrap();
        assert!((e - 0.5).abs() <= 1e-2);
        let m = r.multipliers;
        assert_eq!(m.lambda1, -1.0);
        assert!((m.lambda2 - 0.5).abs() < 1e-2 && (m.lambda3 + 0.5).abs() < 1e-2, "{m:?}");
    }

    #[test]
    fn odd_init_lands_on_first_level() {
        let g = grid();
        let psi = hermite_state(1, 1.0, &g)
            .unwrap()
            .add_scaled(Complex64::new(0.3, 0.0), &hermite_state(3, 1.0, &g).unwrap())
            .unwrap()
            .add_scaled(Complex64::new(-0.2, 0.0), &hermite_state(5, 1.0, &g).unwrap())
            .unwrap();
        let init = EecState::new(psi.clone(), psi, cfg()).unwrap();
        let r = solve(&init, &SolveOptions::default()).unwrap();
        assert!(r.converged);
        let e = eec::expected_energy(r.state.psi(), cfg()).unwrap();
        assert!((e - 1.5).abs() <= 1e-2, "{e}");
    }

    #[test]
    fn exact_state_is_already_stationary() {
        let g = grid();
        let init = hermite_pair(&g, 0);
        let r = solve(&init, &SolveOptions::default()).unwrap();
        assert!(r.converged);
        assert!(r.iterations <= 2);
        assert!(l2_distance(r.state.psi(), init.psi()).unwrap() <= 1e-6);
        assert!(l2_distance(r.state.f(), init.f()).unwrap() <= 1e-6);
    }

    #[test]
    fn zero_init_rejected() {
        let g = grid();
        let z = SampledFunction::zeros(g);
        let h = hermite_state(0, 1.0, &g).unwrap();
        let s = EecState::new(z.clone(), h, cfg()).unwrap();
        assert!(matches!(solve(&s, &SolveOptions::default()), Err(Error::DegenerateInit(_))));
        let s = EecState::new(z.clone(), z, cfg()).unwrap();
        let paired = SolveOptions { paired_mode: true, ..SolveOptions::default() };
        assert!(matches!(solve(&s, &paired), Err(Error::DegenerateInit(_))));
    }

    #[test]
    fn inner_descent_is_monotone() {
        let init = random_init(&grid(), 1.0, 11, 6).unwrap();
        let r = solve(&init, &SolveOptions::default()).unwrap();
        assert!(r.converged);
        for w in r.trace.windows(2) {
            if w[0].outer == w[1].outer {
                assert!(w[1].augmented <= w[0].augmented + 1e-12);
            }
        }
    }

    #[test]
    fn phase_does_not_change_density() {
        let init = random_init(&grid(), 1.0, 5, 6).unwrap();
        let a = solve(&init, &SolveOptions::default()).unwrap();
        let b = solve(&init.with_phase(1.1), &SolveOptions::default()).unwrap();
        let da = a.state.psi().density();
        let db = b.state.psi().density();
        let diff = da.iter().zip(&db).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        // both runs stop at the same tolerance but not on the same iterate
        assert!(a.converged && b.converged);
        assert!(diff < 1e-4, "{diff}");
    }

    #[test]
    fn paired_mode_converges() {
        let g = make_grid(8.0, 257).unwrap();
        let psi = hermite_state(0, 1.0, &g).unwrap().add_scaled(Complex64::new(0.1, 0.0), &hermite_state(2, 1.0, &g).unwrap()).unwrap();
        let init = EecState::paired(psi, cfg()).unwrap();
        let opts = SolveOptions { paired_mode: true, gradient_tolerance: 1e-2, constraint_tolerance: 5e-3, ..SolveOptions::default() };
        let r = solve(&init, &opts).unwrap();
        assert!(r.converged, "{:?}", (r.stationarity_residual, r.constraint_residuals));
        let e = eec::expected_energy(r.state.psi(), cfg()).unwrap();
        assert!((e - 0.5).abs() < 1e-2, "{e}");
        assert!((r.multipliers.lambda3 + 0.5).abs() < 2e-2, "{:?}", r.multipliers);
    }

    #[test]
    fn quantize_arithmetic() {
        let a = quantize(0.501, 1.0);
        assert_eq!(a.nearest_level, 0);
        assert!((a.defect - 0.001).abs() < 1e-12);
        let b = quantize(1.497, 1.0);
        assert_eq!(b.nearest_level, 1);
        assert!((b.defect - 0.003).abs() < 1e-12);
        assert_eq!(quantize(0.5, 1.0).defect, 0.0);
        assert_eq!(quantize(7.0, 2.0).nearest_level, 3);
    }

    #[test]
    fn report_rejects_unconverged() {
        let init = hermite_pair(&grid(), 0);
        let mut r = solve(&init, &SolveOptions::default()).unwrap();
        r.converged = false;
        assert!(quantization_report(&[r]).is_err());
    }

    #[test]
    fn options_validation() {
        let bad = SolveOptions { penalty_growth: 1.0, ..SolveOptions::default() };
        assert!(bad.validate().is_err());
        let bad = SolveOptions { gradient_tolerance: 0.0, ..SolveOptions::default() };
        assert!(bad.validate().is_err());
        let bad = SolveOptions { max_iterations: 0, ..SolveOptions::default() };
        assert!(bad.validate().is_err());
    }
}
