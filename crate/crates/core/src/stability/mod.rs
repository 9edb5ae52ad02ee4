//! Perturbation stability of rigid solutions.
//!
//! A rigid solution `(ψ, F)` is perturbed by an ensemble `{δψ_i, δF_i}` and
//! the stacked equalities of every perturbed copy form an overdetermined
//! system in the unknowns `(ψ, F)`. Its least-squares optimum is found by
//! gradient descent started at the rigid solution, and the distance the
//! optimum drifts away from it decides the label: a solution is stable when
//! the drift stays within `κ·ε` for perturbation amplitude `ε`.
//!
//! The [`toy`] submodule runs the same experiment on `x² − y² = 0`.

pub mod toy;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::descent::{self, DescentOptions};
use crate::eec::{self, EecState, OscillatorConfig};
use crate::error::{Error, Result};
use crate::grid::{self, Direction, FourierKernel, Grid, SampledFunction};
use crate::spectrum::hermite_state;
use crate::variational::{component_weights, flatten, unflatten, SolveOptions};

/// Smallest ensemble accepted by [`generate_ensemble`].
pub const MIN_COUNT: usize = 10;

/// Default drift-to-amplitude threshold.
pub const DEFAULT_KAPPA: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PerturbationSpec {
    pub count: usize,
    /// L² norm of every `δψ_i` (and `δF_i` when `perturb_f`).
    pub amplitude: f64,
    pub seed: u64,
    /// Number of Hermite modes mixed into each perturbation.
    pub basis_size: usize,
    pub perturb_f: bool,
}

impl Default for PerturbationSpec {
    fn default() -> Self {
        PerturbationSpec { count: 20, amplitude: 1e-3, seed: 42, basis_size: 6, perturb_f: false }
    }
}

impl PerturbationSpec {
    pub fn validate(&self) -> Result<()> {
        if self.count < MIN_COUNT {
            return Err(Error::invalid(format!("count must be at least {MIN_COUNT}, got {}", self.count)));
        }
        if !self.count.is_multiple_of(2) {
            return Err(Error::invalid(format!("count must be even for ± pairs, got {}", self.count)));
        }
        if !(self.amplitude.is_finite() && self.amplitude > 0.0) {
            return Err(Error::invalid(format!("amplitude must be positive, got {}", self.amplitude)));
        }
        if self.basis_size < 2 {
            return Err(Error::invalid(format!("basis_size must be at least 2, got {}", self.basis_size)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationEnsemble {
    deltas_psi: Vec<SampledFunction>,
    deltas_f: Vec<SampledFunction>,
    spec: PerturbationSpec,
}

impl PerturbationEnsemble {
    /// Build an ensemble from explicit members. No size or norm checks are
    /// made beyond matching lengths and grids, so degenerate ensembles (a
    /// single member, zero amplitude) can be used in experiments.
    pub fn from_members(
        spec: PerturbationSpec,
        deltas_psi: Vec<SampledFunction>,
        deltas_f: Vec<SampledFunction>,
    ) -> Result<Self> {
        if deltas_psi.is_empty() || deltas_psi.len() != deltas_f.len() {
            return Err(Error::invalid(format!(
                "need matching nonempty member lists, got {} and {}",
                deltas_psi.len(),
                deltas_f.len()
            )));
        }
        for (a, b) in deltas_psi.iter().zip(&deltas_f) {
            grid::check_same_grid(deltas_psi[0].grid(), a.grid())?;
            grid::check_same_grid(deltas_f[0].grid(), b.grid())?;
        }
        Ok(PerturbationEnsemble { deltas_psi, deltas_f, spec })
    }

    /// `count` zero perturbations on `grid`.
    pub fn zeros(count: usize, grid: Grid) -> Result<Self> {
        let spec = PerturbationSpec { count, amplitude: 0.0, ..PerturbationSpec::default() };
        let z = vec![SampledFunction::zeros(grid); count];
        Self::from_members(spec, z.clone(), z)
    }

    pub fn deltas_psi(&self) -> &[SampledFunction] {
        &self.deltas_psi
    }

    pub fn deltas_f(&self) -> &[SampledFunction] {
        &self.deltas_f
    }

    pub fn spec(&self) -> &PerturbationSpec {
        &self.spec
    }

    pub fn len(&self) -> usize {
        self.deltas_psi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.deltas_psi.is_empty()
    }
}

/// Random Hermite mixtures in ± pairs, each rescaled to the spec amplitude.
pub fn generate_ensemble(spec: &PerturbationSpec, grid: &Grid, omega: f64) -> Result<PerturbationEnsemble> {
    spec.validate()?;
    OscillatorConfig::new(omega)?;
    let basis: Vec<SampledFunction> =
        (0..spec.basis_size).map(|k| hermite_state(k, omega, grid)).collect::<Result<_>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let draw = |rng: &mut ChaCha8Rng| -> Result<SampledFunction> {
        let mut d = SampledFunction::zeros(*grid);
        for b in &basis {
            let c: f64 = rng.sample(StandardNormal);
            d = d.add_scaled(Complex64::new(c, 0.0), b)?;
        }
        let norm = d.norm();
        if norm.is_nan() || norm <= 0.0 {
            return Err(Error::DegenerateInit("perturbation mixture vanished".into()));
        }
        Ok(d.scale_real(spec.amplitude / norm))
    };

    let pairs = spec.count / 2;
    let mut deltas_psi = Vec::with_capacity(spec.count);
    let mut deltas_f = Vec::with_capacity(spec.count);
    for _ in 0..pairs {
        let dp = draw(&mut rng)?;
        let df = if spec.perturb_f { draw(&mut rng)? } else { SampledFunction::zeros(*grid) };
        deltas_psi.push(dp.scale_real(-1.0));
        deltas_f.push(df.scale_real(-1.0));
        deltas_psi.push(dp);
        deltas_f.push(df);
    }
    Ok(PerturbationEnsemble { deltas_psi, deltas_f, spec: *spec })
}

/// Signed equalities `[balance_q, balance_l, N_F − 1, N_ψ − 1]` of every
/// perturbed copy `(ψ + δψ_i, F + δF_i)`, stacked member by member.
pub fn assemble_residuals(state: &EecState, ensemble: &PerturbationEnsemble) -> Result<Vec<f64>> {
    check_ensemble(state, ensemble)?;
    let omega = state.omega();
    let mut out = Vec::with_capacity(4 * ensemble.len());
    for (dp, df) in ensemble.deltas_psi.iter().zip(&ensemble.deltas_f) {
        let p = state.psi().add(dp)?;
        let f = state.f().add(df)?;
        out.extend(eec::equalities(&p, &f, omega));
    }
    Ok(out)
}

fn check_ensemble(state: &EecState, ensemble: &PerturbationEnsemble) -> Result<()> {
    grid::check_same_grid(state.psi().grid(), ensemble.deltas_psi[0].grid())?;
    grid::check_same_grid(state.f().grid(), ensemble.deltas_f[0].grid())
}

/// Outcome of [`optimize_overdetermined`]. Residuals are weighted L² norms of
/// the stacked vector, `sqrt(Σ w_k r_ik²)`.
#[derive(Debug, Clone)]
pub struct OverdeterminedOptimum {
    pub state: EecState,
    pub residual_at_init: f64,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

struct LeastSquares<'a> {
    q: Grid,
    l: Grid,
    omega: f64,
    weights: [f64; 4],
    ensemble: &'a PerturbationEnsemble,
    // q → L inverse transform in paired mode
    pairing: Option<FourierKernel>,
}

impl LeastSquares<'_> {
    fn psi_and_f(&self, x: &[f64]) -> (Vec<Complex64>, Vec<Complex64>) {
        match &self.pairing {
            Some(k) => {
                let psi = unflatten(x);
                let f = k.apply_values(&psi);
                (psi, f)
            }
            None => {
                let (a, b) = x.split_at(2 * self.q.n_points());
                (unflatten(a), unflatten(b))
            }
        }
    }

    fn state(&self, x: &[f64], config: OscillatorConfig) -> EecState {
        let (psi, f) = self.psi_and_f(x);
        EecState::new(SampledFunction::from_parts(self.q, psi), SampledFunction::from_parts(self.l, f), config)
            .expect("grids validated at entry")
    }

    /// Weighted sum of squares and its coefficient-space gradient.
    fn eval(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let (psi, f) = self.psi_and_f(x);
        let zero = Complex64::new(0.0, 0.0);
        let mut g_psi = vec![zero; psi.len()];
        let mut g_f = vec![zero; f.len()];
        let [w0, w1, w2, w3] = self.weights;
        let mut total = 0.0;
        for (dp, df) in self.ensemble.deltas_psi.iter().zip(&self.ensemble.deltas_f) {
            let pi: Vec<Complex64> = psi.iter().zip(dp.values()).map(|(a, b)| a + b).collect();
            let fi: Vec<Complex64> = f.iter().zip(df.values()).map(|(a, b)| a + b).collect();
            let ps = SampledFunction::from_parts(self.q, pi);
            let fs = SampledFunction::from_parts(self.l, fi);
            let [r0, r1, r2, r3] = eec::equalities(&ps, &fs, self.omega);
            total += w0 * r0 * r0 + w1 * r1 * r1 + w2 * r2 * r2 + w3 * r3 * r3;

            eec::kinetic_gradient(ps.values(), self.q.spacing(), &mut g_psi, 2.0 * w0 * r0);
            eec::potential_gradient(ps.values(), &self.q, self.omega, &mut g_psi, -2.0 * w1 * r1);
            eec::norm_gradient(ps.values(), &self.q, &mut g_psi, 2.0 * w3 * r3);

            eec::kinetic_gradient(fs.values(), self.l.spacing(), &mut g_f, 2.0 * w1 * r1);
            eec::potential_gradient(fs.values(), &self.l, self.omega, &mut g_f, -2.0 * w0 * r0);
            eec::norm_gradient(fs.values(), &self.l, &mut g_f, 2.0 * w2 * r2);
        }
        let grad = match &self.pairing {
            Some(k) => {
                let back = k.apply_adjoint_values(&g_f);
                g_psi.iter_mut().zip(back).for_each(|(a, b)| *a += b);
                flatten(&g_psi)
            }
            None => {
                let mut v = flatten(&g_psi);
                v.extend(flatten(&g_f));
                v
            }
        };
        (total, grad)
    }
}

/// Least-squares optimum of the perturbed overdetermined system, by gradient
/// descent from `init`.
///
/// The descent runs in the L² geometry of the unknowns and stops once the
/// gradient has dropped by the factor `options.gradient_tolerance` relative
/// to its value at `init`, once the objective stalls per
/// `options.objective_tolerance`, or after `options.max_inner_iterations`
/// steps. The objective keeps a slow downhill slide toward states with small
/// first-order sensitivity to the ensemble, so the drift reported for a
/// rigid solution depends on the stall tolerance; a tolerance of zero runs
/// the slide out to the iteration limit.
/// Accepted steps never increase the objective, so the returned residual is
/// at most the initial one. In paired mode `F` is tied to `ψ` by the inverse
/// transform and `init.f()` is ignored.
pub fn optimize_overdetermined(
    init: &EecState,
    ensemble: &PerturbationEnsemble,
    options: &SolveOptions,
) -> Result<OverdeterminedOptimum> {
    options.validate()?;
    check_ensemble(init, ensemble)?;
    let q = *init.psi().grid();
    let omega = init.omega();
    let (l, pairing) = if options.paired_mode {
        (q, Some(FourierKernel::new(&q, &q, omega, Direction::Inverse)?))
    } else {
        (*init.f().grid(), None)
    };
    let ls = LeastSquares { q, l, omega, weights: options.residual_weights, ensemble, pairing };

    let mut x0 = flatten(init.psi().values());
    let mut weights = component_weights(&q);
    if ls.pairing.is_none() {
        x0.extend(flatten(init.f().values()));
        weights.extend(component_weights(&l));
    }
    let eval = |x: &[f64]| {
        let (v, g) = ls.eval(x);
        (v, g.iter().zip(&weights).map(|(g, w)| g / w).collect())
    };
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).zip(&weights).map(|((x, y), w)| w * x * y).sum::<f64>();
    let opts = DescentOptions {
        max_iterations: options.max_inner_iterations,
        gradient_tolerance: 0.0,
        relative_tolerance: options.gradient_tolerance,
        objective_tolerance: options.objective_tolerance,
    };
    let out = descent::minimize(x0, eval, dot, &opts)?;
    let residual_at_init = out.trace[0].sqrt();
    let state = if options.paired_mode || out.iterations > 0 {
        ls.state(&out.x, init.config())
    } else {
        init.clone()
    };
    Ok(OverdeterminedOptimum {
        state,
        residual_at_init,
        residual: out.value.sqrt(),
        iterations: out.iterations,
        converged: out.converged,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StabilityLabel {
    Stable,
    Unstable,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityVerdict {
    /// `‖ψ* − ψ‖ + ‖F* − F‖` between the optimum and the rigid solution.
    pub drift: f64,
    pub residual_at_rigid: f64,
    pub residual_at_optimum: f64,
    pub label: StabilityLabel,
    pub amplitude: f64,
    pub kappa: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// `Stable` iff `drift ≤ kappa·amplitude`.
pub fn label_for(drift: f64, amplitude: f64, kappa: f64) -> StabilityLabel {
    if drift <= kappa * amplitude {
        StabilityLabel::Stable
    } else {
        StabilityLabel::Unstable
    }
}

pub fn classify(
    rigid: &EecState,
    ensemble: &PerturbationEnsemble,
    options: &SolveOptions,
    kappa: f64,
) -> Result<StabilityVerdict> {
    if !(kappa.is_finite() && kappa > 0.0) {
        return Err(Error::invalid(format!("kappa must be positive, got {kappa}")));
    }
    let opt = optimize_overdetermined(rigid, ensemble, options)?;
    let drift = grid::l2_distance(opt.state.psi(), rigid.psi())? + grid::l2_distance(opt.state.f(), rigid.f())?;
    let amplitude = ensemble.spec().amplitude;
    Ok(StabilityVerdict {
        drift,
        residual_at_rigid: opt.residual_at_init,
        residual_at_optimum: opt.residual,
        label: label_for(drift, amplitude, kappa),
        amplitude,
        kappa,
        iterations: opt.iterations,
        converged: opt.converged,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityComparison {
    pub x: Vec<f64>,
    pub ideal: Vec<f64>,
    pub real: Vec<f64>,
}

/// `|ψ|²` and `|ψ + δψ|²` on the grid of `ψ`.
pub fn density_comparison(state: &EecState, delta: &SampledFunction) -> Result<DensityComparison> {
    let perturbed = state.psi().add(delta)?;
    Ok(DensityComparison {
        x: state.psi().grid().points().collect(),
        ideal: state.psi().density(),
        real: perturbed.density(),
    })
}

/// A named state in a stability comparison.
#[derive(Debug, Clone)]
pub struct Candidate {
    pub name: String,
    pub state: EecState,
}

/// The default comparison set: `(h_0, h_0)`, `(h_1, h_1)`, a Gaussian of
/// width `2/√ω` and the mixture `(h_0 + h_1)/√2`. The last two are paired
/// with their inverse transforms.
pub fn comparison_set(grid: &Grid, omega: f64) -> Result<Vec<Candidate>> {
    let config = OscillatorConfig::new(omega)?;
    let h0 = hermite_state(0, omega, grid)?;
    let h1 = hermite_state(1, omega, grid)?;
    let sigma = 2.0 / omega.sqrt();
    let wide = SampledFunction::from_real_fn(*grid, |x| (-0.5 * (x / sigma).powi(2)).exp())?;
    let wide = wide.scale_real(wide.norm().recip());
    let mix = h0.add(&h1)?.scale_real(std::f64::consts::FRAC_1_SQRT_2);
    let paired = |psi: SampledFunction| -> Result<EecState> {
        let f = grid::transform_inverse(&psi, grid, omega)?;
        EecState::new(psi, f, config)
    };
    Ok(vec![
        Candidate { name: "h0".into(), state: EecState::new(h0.clone(), h0, config)? },
        Candidate { name: "h1".into(), state: EecState::new(h1.clone(), h1, config)? },
        Candidate { name: "squeezed_gaussian".into(), state: paired(wide)? },
        Candidate { name: "h0_h1_mix".into(), state: paired(mix)? },
    ])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub amplitude: f64,
    pub drift: f64,
    pub residual_at_rigid: f64,
    pub residual_at_optimum: f64,
    pub label: StabilityLabel,
}

/// Classify `rigid` at each amplitude, reusing every other field of `spec`
/// (the seed included, so the ensembles differ only in scale).
pub fn drift_sweep(
    rigid: &EecState,
    spec: &PerturbationSpec,
    amplitudes: &[f64],
    options: &SolveOptions,
    kappa: f64,
) -> Result<Vec<SweepPoint>> {
    amplitudes
        .iter()
        .map(|&amplitude| {
            let s = PerturbationSpec { amplitude, ..*spec };
            let ens = generate_ensemble(&s, rigid.psi().grid(), rigid.omega())?;
            let v = classify(rigid, &ens, options, kappa)?;
            Ok(SweepPoint {
                amplitude,
                drift: v.drift,
                residual_at_rigid: v.residual_at_rigid,
                residual_at_optimum: v.residual_at_optimum,
                label: v.label,
            })
        })
        .collect()
}
