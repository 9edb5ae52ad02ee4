//! Hermite functions are eigenfunctions of the ω-scaled transform with
//! eigenvalue `(−i)^n`; any pair `ψ = T F` satisfies Parseval.

use odho::grid::{make_grid, transform_forward, transform_inverse, SampledFunction};
use odho::spectrum::hermite_state;
use odho::Complex64;

fn main() -> odho::Result<()> {
    let omega: f64 = 1.5;
    let grid = make_grid(8.0 / omega.sqrt(), 513)?;
    let mut phase = Complex64::new(1.0, 0.0);
    for n in 0..6 {
        let h = hermite_state(n, omega, &grid)?;
        let t = transform_forward(&h, &grid, omega)?;
        let err = t.sub(&h.scale(phase))?.max_abs();
        println!("n = {n}: |T h_n - (-i)^n h_n|_inf = {err:.2e}");
        phase *= Complex64::new(0.0, -1.0);
    }

    let f = SampledFunction::from_fn(grid, |x| Complex64::new((-(x - 0.7).powi(2)).exp(), 0.3 * x * (-x * x).exp()))?;
    let psi = transform_forward(&f, &grid, omega)?;
    let back = transform_inverse(&psi, &grid, omega)?;
    println!("Parseval: |F|^2 = {:.12}, |T F|^2 = {:.12}", f.norm_squared(), psi.norm_squared());
    println!("round trip error {:.2e}", back.sub(&f)?.max_abs());
    Ok(())
}
