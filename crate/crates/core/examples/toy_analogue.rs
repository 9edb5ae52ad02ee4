//! `x² − y² = 0` under random perturbations: the origin holds, a point on
//! the cone away from it slides back.

use odho::stability::toy::{toy_classify, toy_grid_search, toy_optimize, ToyEnsemble};

fn main() -> odho::Result<()> {
    for amplitude in [1e-2, 1e-3] {
        let ensemble = ToyEnsemble::generate(100, amplitude, 7)?;
        let opt = toy_optimize(&ensemble, (1.0, 1.0))?;
        let oracle = toy_grid_search(&ensemble, 2.0, 1e-3)?;
        println!("eps = {amplitude:e}");
        println!("  descent from (1, 1): ({:+.5}, {:+.5}) in {} steps", opt.x, opt.y, opt.iterations);
        println!("  grid search oracle:  ({:+.5}, {:+.5})", oracle.x, oracle.y);
        for rigid in [(0.0, 0.0), (1.0, 1.0), (-0.5, 0.5)] {
            let v = toy_classify(rigid, &ensemble, 10.0)?;
            println!("  {rigid:?}: drift {:.3e} -> {:?}", v.drift, v.label);
        }
    }
    Ok(())
}
