//! Seeded random initial states relax to oscillator eigenstates; the
//! converged energies land on `(n + ½)ω`.

use odho::grid::make_grid;
use odho::variational::{quantization_report, random_init, solve, SolveOptions};

fn main() -> odho::Result<()> {
    let grid = make_grid(8.0, 1025)?;
    let options = SolveOptions::default();
    let mut results = Vec::new();
    for seed in 0..8 {
        let init = random_init(&grid, 1.0, seed, 6)?;
        let r = solve(&init, &options)?;
        println!(
            "seed {seed}: converged {} after {} outer / {} inner steps, lambda3 = {:.5}",
            r.converged, r.iterations, r.inner_iterations, r.multipliers.lambda3
        );
        results.push(r);
    }
    for (seed, q) in quantization_report(&results)?.iter().enumerate() {
        println!("seed {seed}: E = {:.6} -> level {} (defect {:.1e})", q.energy, q.nearest_level, q.defect);
    }
    Ok(())
}
