//! Plot data for the ideal density `|h_0|²` next to the perturbed
//! `|h_0 + δψ|²`, and for `g(x)` along `y = x`.
//!
//! Writes `density.csv` and `g_profile.csv` into the directory given as the
//! first argument (default: the current directory).

use std::path::PathBuf;

use odho::eec::{EecState, OscillatorConfig};
use odho::grid::make_grid;
use odho::io::save_columns;
use odho::spectrum::hermite_state;
use odho::stability::{density_comparison, toy::toy_g_profile};

fn main() -> odho::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| ".".into()));
    std::fs::create_dir_all(&dir)?;
    let grid = make_grid(8.0, 1025)?;
    let h0 = hermite_state(0, 1.0, &grid)?;
    let state = EecState::new(h0.clone(), h0, OscillatorConfig::new(1.0)?)?;
    let delta = hermite_state(2, 1.0, &grid)?.scale_real(0.05);
    let d = density_comparison(&state, &delta)?;
    let rows: Vec<Vec<f64>> = (0..d.x.len()).map(|j| vec![d.x[j], d.ideal[j], d.real[j]]).collect();
    save_columns(&dir.join("density.csv"), &["x", "ideal", "real"], &rows)?;

    let xs: Vec<f64> = (0..=40).map(|k| -2.0 + 0.1 * k as f64).collect();
    let g: Vec<Vec<f64>> = toy_g_profile(&xs, 0.1, -0.1).into_iter().map(|(x, g)| vec![x, g]).collect();
    save_columns(&dir.join("g_profile.csv"), &["x", "g"], &g)?;

    let sup = d.ideal.iter().zip(&d.real).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    println!("wrote {} and {}", dir.join("density.csv").display(), dir.join("g_profile.csv").display());
    println!("largest density difference {sup:.4e}");
    Ok(())
}
