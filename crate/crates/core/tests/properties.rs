use odho::eec::{expected_energy, EecState, OscillatorConfig};
use odho::grid::{integrate, make_grid, transform_forward, transform_inverse, Grid, SampledFunction};
use odho::io;
use odho::spectrum::hermite_state;
use odho::stability::toy::{toy_g_profile, toy_residual, ToyEnsemble};
use odho::stability::{
    density_comparison, generate_ensemble, optimize_overdetermined, PerturbationSpec,
};
use odho::variational::{quantize, SolveOptions};
use odho::Complex64;
use proptest::prelude::*;

fn grid() -> Grid {
    make_grid(8.0, 513).unwrap()
}

/// Complex mixture of the lowest Hermite states; decays far below 1e-10 at ±8.
fn mixture(coeffs: &[(f64, f64)]) -> SampledFunction {
    let g = grid();
    coeffs.iter().enumerate().fold(SampledFunction::zeros(g), |acc, (k, &(re, im))| {
        acc.add_scaled(Complex64::new(re, im), &hermite_state(k, 1.0, &g).unwrap()).unwrap()
    })
}

fn coeffs() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..6)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn parseval(c in coeffs()) {
        let f = mixture(&c);
        let t = transform_forward(&f, &grid(), 1.0).unwrap();
        prop_assert!((f.norm_squared() - t.norm_squared()).abs() <= 1e-6 * f.norm_squared().max(1.0));
    }

    #[test]
    fn transform_round_trip(c in coeffs()) {
        let f = mixture(&c);
        let back = transform_inverse(&transform_forward(&f, &grid(), 1.0).unwrap(), &grid(), 1.0).unwrap();
        prop_assert!(back.sub(&f).unwrap().max_abs() <= 1e-5);
    }

    #[test]
    fn trapezoid_exact_on_linear(a in -5.0..5.0f64, b in -5.0..5.0f64, lo in -4.0..0.0f64, len in 0.5..6.0f64, n in 16usize..200) {
        let g = Grid::new(lo, lo + len, n).unwrap();
        let f = SampledFunction::from_real_fn(g, |x| a + b * x).unwrap();
        let exact = a * len + 0.5 * b * ((lo + len).powi(2) - lo * lo);
        prop_assert!((integrate(&f).re - exact).abs() <= 1e-10 * (1.0 + exact.abs()));
    }

    #[test]
    fn energy_phase_invariant(c in coeffs(), theta in 0.0..std::f64::consts::TAU) {
        let f = mixture(&c);
        prop_assume!(f.norm() > 1e-3);
        let f = f.scale_real(1.0 / f.norm());
        let cfg = OscillatorConfig::new(1.0).unwrap();
        let e0 = expected_energy(&f, cfg).unwrap();
        let e1 = expected_energy(&f.scale(Complex64::from_polar(1.0, theta)), cfg).unwrap();
        prop_assert!((e0 - e1).abs() <= 1e-12 * e0.abs().max(1.0));
    }

    #[test]
    fn csv_round_trip(c in coeffs()) {
        let f = mixture(&c);
        let mut buf = Vec::new();
        io::write_csv(&f, &mut buf).unwrap();
        prop_assert_eq!(io::read_csv(buf.as_slice()).unwrap(), f.clone());
        prop_assert_eq!(io::from_json(&io::to_json(&f)).unwrap(), f);
    }

    #[test]
    fn ensemble_is_symmetric(seed in any::<u64>(), pairs in 5usize..12, basis in 2usize..8, perturb_f in any::<bool>()) {
        let spec = PerturbationSpec { count: 2 * pairs, amplitude: 0.01, seed, basis_size: basis, perturb_f };
        let e = generate_ensemble(&spec, &grid(), 1.0).unwrap();
        for list in [e.deltas_psi(), e.deltas_f()] {
            let sum = list.iter().fold(SampledFunction::zeros(grid()), |a, d| a.add(d).unwrap());
            prop_assert_eq!(sum.max_abs(), 0.0);
        }
        for d in e.deltas_psi() {
            prop_assert!((d.norm() - 0.01).abs() < 1e-10);
        }
    }

    #[test]
    fn toy_diagonal_expansion(x in -10.0..10.0f64, dx in -1.0..1.0f64, dy in -1.0..1.0f64) {
        let lhs = toy_residual(x, x, dx, dy);
        let rhs = (dx - dy) * (2.0 * x + dx + dy);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + x * x));
    }

    #[test]
    fn toy_profile_slope(dx in -0.5..0.5f64, dy in -0.5..0.5f64, x0 in -3.0..3.0f64) {
        let g = toy_g_profile(&[x0, x0 + 0.5], dx, dy);
        let slope = (g[1].1 - g[0].1) / 0.5;
        prop_assert!((slope - 2.0 * (dx - dy)).abs() <= 1e-10);
    }

    #[test]
    fn toy_moments_match_direct_sum(seed in any::<u64>(), amp in 1e-3..0.5f64, x in -2.0..2.0f64, y in -2.0..2.0f64) {
        let e = ToyEnsemble::generate(20, amp, seed).unwrap();
        let direct = e.objective(x, y);
        let fast = e.moments().objective(x, y);
        prop_assert!((direct - fast).abs() <= 1e-9 * (1.0 + direct));
    }

    #[test]
    fn toy_deltas_within_three_sigma(seed in any::<u64>(), amp in 1e-4..1.0f64) {
        let e = ToyEnsemble::generate(50, amp, seed).unwrap();
        prop_assert!(e.deltas().iter().all(|(a, b)| a.abs() <= 3.0 * amp && b.abs() <= 3.0 * amp));
    }

    #[test]
    fn densities_nonnegative(d in coeffs()) {
        let h0 = hermite_state(0, 1.0, &grid()).unwrap();
        let state = EecState::new(h0.clone(), h0, OscillatorConfig::new(1.0).unwrap()).unwrap();
        let cmp = density_comparison(&state, &mixture(&d).scale_real(0.1)).unwrap();
        prop_assert!(cmp.ideal.iter().chain(&cmp.real).all(|v| *v >= 0.0));
    }

    #[test]
    fn quantize_defect_bounded(e in 0.0..50.0f64, omega in 0.1..5.0f64) {
        let q = quantize(e, omega);
        prop_assert!(q.defect <= 0.5 * omega + 1e-12 || e < 0.5 * omega);
        prop_assert!((q.energy - e).abs() == 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn optimizer_never_worse(seed in any::<u64>(), n in 0usize..3, amp in 1e-3..3e-2f64) {
        let g = make_grid(8.0, 257).unwrap();
        let h = hermite_state(n, 1.0, &g).unwrap();
        let state = EecState::new(h.clone(), h, OscillatorConfig::new(1.0).unwrap()).unwrap();
        let spec = PerturbationSpec { count: 10, amplitude: amp, seed, basis_size: 4, perturb_f: true };
        let ens = generate_ensemble(&spec, &g, 1.0).unwrap();
        let out = optimize_overdetermined(&state, &ens, &SolveOptions::default()).unwrap();
        prop_assert!(out.residual <= out.residual_at_init);
    }
}
