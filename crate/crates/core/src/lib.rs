//! Numerical toolkit for the one-dimensional harmonic oscillator density pair
//! `(ψ(q), F(L))`.
//!
//! The crate discretizes both amplitudes on uniform grids, evaluates the
//! normalization / decay / energy conditions and the six equilibrium
//! conditions (EECs), solves the stationarity ODEs of the constrained
//! functional, and runs the perturbation-based stability test on the EEC
//! system and on the scalar analogue `x² − y² = 0`.
//!
//! Modules, bottom-up:
//!
//! * [`grid`]: uniform grids, trapezoidal quadrature, finite differences and
//!   the ω-scaled Fourier transform coupling q-space and L-space.
//! * [`eec`]: condition and EEC residual evaluation, the functional `I`.
//! * [`spectrum`]: tridiagonal oscillator operators, eigen-solver, Hermite
//!   functions and multiplier triples.
//! * [`variational`]: augmented-Lagrangian search for stationary points.
//! * [`stability`]: perturbation ensembles, overdetermined least squares and
//!   stability verdicts, plus the scalar toy analogue.
//! * [`cli`]: batch experiments behind the `odho` binary.

pub mod cli;
mod descent;
pub mod eec;
mod error;
pub mod grid;
pub mod io;
pub mod spectrum;
pub mod stability;
pub mod variational;

pub use error::{Error, Result};
pub use num_complex::Complex64;
