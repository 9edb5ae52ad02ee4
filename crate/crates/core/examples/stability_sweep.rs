//! Drift of the least-squares optimum as the perturbation amplitude shrinks,
//! for the rigid ground state and the rest of the comparison set.

use odho::grid::make_grid;
use odho::stability::{self, PerturbationSpec, DEFAULT_KAPPA};
use odho::variational::SolveOptions;

fn main() -> odho::Result<()> {
    let grid = make_grid(8.0, 1025)?;
    let set = stability::comparison_set(&grid, 1.0)?;
    let spec = PerturbationSpec::default();
    let options = SolveOptions::default();
    let amplitudes = [1e-2, 5e-3, 1e-3, 5e-4, 1e-4];

    for c in &set {
        println!("{}", c.name);
        println!("  {:>8}  {:>11}  {:>11}  {:>11}  label", "eps", "drift", "r(rigid)", "r(opt)");
        for p in stability::drift_sweep(&c.state, &spec, &amplitudes, &options, DEFAULT_KAPPA)? {
            println!(
                "  {:>8.0e}  {:>11.3e}  {:>11.3e}  {:>11.3e}  {:?}",
                p.amplitude, p.drift, p.residual_at_rigid, p.residual_at_optimum, p.label
            );
        }
    }
    Ok(())
}
