//! Lowest levels of the discretized oscillator operator against `(n + ½)ω`.
//!
//! ```text
//! cargo run --example quantized_spectrum -- 2.0
//! ```

use odho::grid::{default_half_width, make_grid};
use odho::spectrum::{hamiltonian, sign_changes, solve_spectrum};

fn main() -> odho::Result<()> {
    let omega: f64 = std::env::args().nth(1).map_or(Ok(1.0), |s| s.parse()).unwrap_or(1.0);
    let grid = make_grid(default_half_width(omega), 1025)?;
    let op = hamiltonian(&grid, omega, 1.0)?;
    let sol = solve_spectrum(&op, 8)?;

    println!("omega = {omega}, grid [{}, {}] with {} points", grid.x_min(), grid.x_max(), grid.n_points());
    println!("{:>3}  {:>14}  {:>10}  {:>10}  nodes", "n", "eigenvalue", "(n+1/2)w", "defect");
    for (n, (e, f)) in sol.eigenvalues.iter().zip(&sol.eigenfunctions).enumerate() {
        let exact = (n as f64 + 0.5) * omega;
        println!("{n:>3}  {e:>14.8}  {exact:>10.4}  {:>10.2e}  {}", (e - exact).abs(), sign_changes(f));
    }
    Ok(())
}
