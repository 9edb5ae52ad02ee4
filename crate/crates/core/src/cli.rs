//! Batch experiments behind the `odho` binary.
//!
//! Every subcommand reads an optional TOML config, applies flag overrides,
//! writes its outputs atomically into the output directory and returns an
//! exit code:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | a tolerance check failed |
//! | 2 | bad input (config, flags, files, output directory) |
//! | 3 | numerical failure or non-convergence |
//!
//! Outputs depend only on the config, so reruns are byte-identical.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::eec::{self, ConditionReport, EecResidual, EecState, OscillatorConfig};
use crate::error::{Error, Result};
use crate::grid::{default_half_width, make_grid, Grid, SampledFunction};
use crate::io;
use crate::spectrum::{self, hermite_state, Multipliers};
use crate::stability::toy::{self, GridSearchResult, ToyEnsemble, ToyOptimum, ToyVerdict};
use crate::stability::{self, PerturbationSpec, StabilityVerdict, SweepPoint};
use crate::variational::{self, QuantizationEntry, SolveOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_TOLERANCE: i32 = 1;
pub const EXIT_BAD_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "odho", version, about = "Oscillator density-pair experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Lowest levels of the stationarity operator and their eigenfunctions.
    Eigen,
    /// Conditions and EEC residuals of a (ψ, F) pair read from CSV or JSON.
    Check {
        psi: PathBuf,
        f: PathBuf,
    },
    /// Variational solve from the configured initial state.
    Solve,
    /// Stability verdicts for the comparison set and a drift sweep.
    Stability,
    /// The x² − y² = 0 analogue.
    Toy,
    /// Plot data for the density comparison and the toy profile.
    Figures,
}

#[derive(Debug, Default, Args)]
pub struct Overrides {
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub omega: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,
    #[arg(long, global = true)]
    pub count: Option<usize>,
    #[arg(long, global = true)]
    pub output_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    pub paired: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitKind {
    Random,
    Hermite,
    Zero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToyConfig {
    pub count: usize,
    pub amplitude: f64,
    pub seed: u64,
    pub init: [f64; 2],
    pub kappa: f64,
    /// Half width and step of the brute-force search square.
    pub search_half_width: f64,
    pub search_step: f64,
    /// Range, sample count and perturbation of the g(x) profile.
    pub x_min: f64,
    pub x_max: f64,
    pub profile_points: usize,
    pub dx: f64,
    pub dy: f64,
}

impl Default for ToyConfig {
    fn default() -> Self {
        ToyConfig {
            count: 100,
            amplitude: 0.01,
            seed: 7,
            init: [1.0, 1.0],
            kappa: stability::DEFAULT_KAPPA,
            search_half_width: 2.0,
            search_step: 1e-3,
            x_min: -2.0,
            x_max: 2.0,
            profile_points: 401,
            dx: 0.1,
            dy: -0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FigureConfig {
    /// The density perturbation is `delta_amplitude · h_{delta_mode}`.
    pub delta_mode: usize,
    pub delta_amplitude: f64,
}

impl Default for FigureConfig {
    fn default() -> Self {
        FigureConfig { delta_mode: 2, delta_amplitude: 0.05 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub omega: f64,
    /// Defaults to `8/√ω`.
    pub grid_half_width: Option<f64>,
    pub grid_points: usize,
    pub mode_index: usize,
    /// Levels reported by `eigen`.
    pub levels: usize,
    pub init: InitKind,
    /// Hermite modes mixed into a random initial state.
    pub init_basis: usize,
    /// Threshold of `check`.
    pub tol: f64,
    pub kappa: f64,
    /// Amplitudes of the drift sweep.
    pub sweep: Vec<f64>,
    pub output_dir: PathBuf,
    pub perturbation: PerturbationSpec,
    pub solver: SolveOptions,
    pub toy: ToyConfig,
    pub figures: FigureConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            omega: 1.0,
            grid_half_width: None,
            grid_points: 1025,
            mode_index: 0,
            levels: 6,
            init: InitKind::Random,
            init_basis: 6,
            tol: 1e-4,
            kappa: stability::DEFAULT_KAPPA,
            sweep: vec![1e-2, 1e-3, 1e-4],
            output_dir: PathBuf::from("out"),
            perturbation: PerturbationSpec::default(),
            solver: SolveOptions::default(),
            toy: ToyConfig::default(),
            figures: FigureConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Config file (if any) with the flag overrides applied; flags win.
    pub fn resolve(o: &Overrides) -> Result<Self> {
        let mut c = match &o.config {
            Some(p) => Self::from_toml(&std::fs::read_to_string(p)?)?,
            None => Self::default(),
        };
        if let Some(w) = o.omega {
            c.omega = w;
        }
        if let Some(s) = o.seed {
            c.solver.seed = s;
            c.perturbation.seed = s;
            c.toy.seed = s;
        }
        if let Some(t) = o.tol {
            c.tol = t;
        }
        if let Some(e) = o.epsilon {
            c.perturbation.amplitude = e;
            c.toy.amplitude = e;
        }
        if let Some(n) = o.count {
            c.perturbation.count = n;
            c.toy.count = n;
        }
        if let Some(d) = &o.output_dir {
            c.output_dir = d.clone();
        }
        if o.paired {
            c.solver.paired_mode = true;
        }
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        OscillatorConfig::new(self.omega)?;
        self.grid()?;
        self.solver.validate()?;
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.tol) || !positive(self.kappa) {
            return Err(Error::invalid("tol and kappa must be positive"));
        }
        if self.levels == 0 {
            return Err(Error::invalid("levels must be at least 1"));
        }
        if self.sweep.iter().any(|&e| !positive(e)) {
            return Err(Error::invalid("sweep amplitudes must be positive"));
        }
        if self.toy.profile_points < 2 || self.toy.x_max.partial_cmp(&self.toy.x_min) != Some(std::cmp::Ordering::Greater) {
            return Err(Error::invalid("toy profile needs x_max > x_min and at least 2 points"));
        }
        if !self.figures.delta_amplitude.is_finite() {
            return Err(Error::NonFinite("figures.delta_amplitude".into()));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid> {
        let half = match self.grid_half_width {
            Some(h) => h,
            None => default_half_width(self.omega),
        };
        make_grid(half, self.grid_points)
    }

    fn oscillator(&self) -> OscillatorConfig {
        OscillatorConfig::new(self.omega).expect("validated")
    }
}

/// Parse the process arguments and run.
pub fn run() -> i32 {
    run_from(std::env::args_os())
}

pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_BAD_INPUT } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("odho: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NonFinite(_) | Error::NoConvergence { .. } => EXIT_NUMERICAL,
        _ => EXIT_BAD_INPUT,
    }
}

pub fn execute(cli: &Cli) -> Result<i32> {
    let config = ExperimentConfig::resolve(&cli.overrides)?;
    std::fs::create_dir_all(&config.output_dir)?;
    let out = config.output_dir.as_path();
    match &cli.command {
        Command::Eigen => cmd_eigen(&config, out),
        Command::Check { psi, f } => cmd_check(&config, psi, f, out),
        Command::Solve => cmd_solve(&config, out),
        Command::Stability => cmd_stability(&config, out),
        Command::Toy => cmd_toy(&config, out),
        Command::Figures => cmd_figures(&config, out),
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Level {
    pub n: usize,
    pub eigenvalue: f64,
    pub expected: f64,
    pub defect: f64,
    pub file: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct EigenReport {
    pub omega: f64,
    pub grid: Grid,
    pub levels: Vec<Level>,
}

pub fn cmd_eigen(config: &ExperimentConfig, out: &Path) -> Result<i32> {
    let grid = config.grid()?;
    let op = spectrum::hamiltonian(&grid, config.omega, 1.0)?;
    let sol = spectrum::solve_spectrum(&op, config.levels)?;
    let mut levels = Vec::new();
    for (n, (e, f)) in sol.eigenvalues.iter().zip(&sol.eigenfunctions).enumerate() {
        let file = format!("eigenfunction_{n}.csv");
        io::save_csv(&out.join(&file), f)?;
        let expected = (n as f64 + 0.5) * config.omega;
        levels.push(Level { n, eigenvalue: *e, expected, defect: (e - expected).abs(), file });
    }
    io::save_pretty_json(&out.join("eigenvalues.json"), &EigenReport { omega: config.omega, grid, levels })?;
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CheckReport {
    pub omega: f64,
    pub tol: f64,
    pub conditions: ConditionReport,
    pub eec: EecResidual,
    pub max_magnitude: f64,
    pub pass: bool,
}

pub fn cmd_check(config: &ExperimentConfig, psi: &Path, f: &Path, out: &Path) -> Result<i32> {
    let state = EecState::new(io::load(psi)?, io::load(f)?, config.oscillator())?;
    let conditions = eec::evaluate_conditions(&state);
    let residual = eec::evaluate_eec(&state);
    let max_magnitude = residual.max_magnitude();
    let pass = max_magnitude <= config.tol;
    let report = CheckReport { omega: config.omega, tol: config.tol, conditions, eec: residual, max_magnitude, pass };
    io::save_pretty_json(&out.join("check.json"), &report)?;
    if pass {
        Ok(EXIT_OK)
    } else {
        eprintln!("odho: largest residual {max_magnitude:.3e} exceeds tolerance {:.3e}", config.tol);
        Ok(EXIT_TOLERANCE)
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SolveReport {
    pub omega: f64,
    pub init: InitKind,
    pub options: SolveOptions,
    pub converged: bool,
    pub iterations: usize,
    pub inner_iterations: usize,
    pub objective: f64,
    /// Absent when `ψ` is too far from normalized to define it.
    pub energy: Option<f64>,
    pub multipliers: Multipliers,
    pub constraint_residuals: EecResidual,
    pub stationarity_residual: (f64, f64),
    pub psi: String,
    pub f: String,
    pub trace: String,
}

pub fn initial_state(config: &ExperimentConfig) -> Result<EecState> {
    let grid = config.grid()?;
    match config.init {
        InitKind::Random => variational::random_init(&grid, config.omega, config.solver.seed, config.init_basis),
        InitKind::Hermite => {
            let h = hermite_state(config.mode_index, config.omega, &grid)?;
            EecState::new(h.clone(), h, config.oscillator())
        }
        InitKind::Zero => {
            let z = SampledFunction::zeros(grid);
            EecState::new(z.clone(), z, config.oscillator())
        }
    }
}

pub fn cmd_solve(config: &ExperimentConfig, out: &Path) -> Result<i32> {
    let init = initial_state(config)?;
    let r = variational::solve(&init, &config.solver)?;
    io::save_csv(&out.join("psi.csv"), r.state.psi())?;
    io::save_csv(&out.join("f.csv"), r.state.f())?;
    let rows: Vec<Vec<f64>> =
        r.trace.iter().map(|t| vec![t.outer as f64, t.step as f64, t.augmented]).collect();
    io::save_columns(&out.join("trace.csv"), &["outer", "step", "augmented"], &rows)?;

    let energy = eec::expected_energy(r.state.psi(), r.state.config()).ok();
    let report = SolveReport {
        omega: config.omega,
        init: config.init,
        options: config.solver,
        converged: r.converged,
        iterations: r.iterations,
        inner_iterations: r.inner_iterations,
        objective: r.objective,
        energy,
        multipliers: r.multipliers,
        constraint_residuals: r.constraint_residuals,
        stationarity_residual: r.stationarity_residual,
        psi: "psi.csv".into(),
        f: "f.csv".into(),
        trace: "trace.csv".into(),
    };
    io::save_pretty_json(&out.join("solve.json"), &report)?;
    if !r.converged {
        eprintln!("odho: solve did not converge after {} outer iterations", r.iterations);
        return Ok(EXIT_NUMERICAL);
    }
    let q: Vec<QuantizationEntry> = variational::quantization_report(std::slice::from_ref(&r))?;
    io::save_pretty_json(&out.join("quantization.json"), &q)?;
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize, Deserialize)]
pub struct StabilityRow {
    pub name: String,
    #[serde(flatten)]
    pub verdict: StabilityVerdict,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct StabilityTable {
    pub omega: f64,
    pub perturbation: PerturbationSpec,
    pub options: SolveOptions,
    pub rigid: StabilityRow,
    pub rows: Vec<StabilityRow>,
    pub sweep: Vec<SweepPoint>,
}

pub fn cmd_stability(config: &ExperimentConfig, out: &Path) -> Result<i32> {
    let grid = config.grid()?;
    let ensemble = stability::generate_ensemble(&config.perturbation, &grid, config.omega)?;
    let h = hermite_state(config.mode_index, config.omega, &grid)?;
    let rigid_state = EecState::new(h.clone(), h, config.oscillator())?;
    let rigid = StabilityRow {
        name: format!("h{}", config.mode_index),
        verdict: stability::classify(&rigid_state, &ensemble, &config.solver, config.kappa)?,
    };
    let rows = stability::comparison_set(&grid, config.omega)?
        .into_iter()
        .map(|c| {
            let verdict = stability::classify(&c.state, &ensemble, &config.solver, config.kappa)?;
            Ok(StabilityRow { name: c.name, verdict })
        })
        .collect::<Result<Vec<_>>>()?;
    let sweep = stability::drift_sweep(&rigid_state, &config.perturbation, &config.sweep, &config.solver, config.kappa)?;
    let csv_rows: Vec<Vec<f64>> = sweep
        .iter()
        .map(|p| vec![p.amplitude, p.drift, p.residual_at_rigid, p.residual_at_optimum])
        .collect();
    io::save_columns(
        &out.join("drift_sweep.csv"),
        &["epsilon", "drift", "residual_at_rigid", "residual_at_optimum"],
        &csv_rows,
    )?;
    let table = StabilityTable {
        omega: config.omega,
        perturbation: config.perturbation,
        options: config.solver,
        rigid,
        rows,
        sweep,
    };
    io::save_pretty_json(&out.join("stability.json"), &table)?;
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ToyReport {
    pub count: usize,
    pub amplitude: f64,
    pub seed: u64,
    pub optimum: ToyOptimum,
    pub oracle: GridSearchResult,
    pub distance_to_origin: f64,
    pub distance_to_oracle: f64,
    pub origin: ToyVerdict,
    pub init: ToyVerdict,
    pub profile: String,
}

fn toy_profile(config: &ExperimentConfig) -> Vec<(f64, f64)> {
    let t = &config.toy;
    let step = (t.x_max - t.x_min) / (t.profile_points - 1) as f64;
    let xs: Vec<f64> = (0..t.profile_points).map(|k| t.x_min + k as f64 * step).collect();
    toy::toy_g_profile(&xs, t.dx, t.dy)
}

fn save_profile(config: &ExperimentConfig, path: &Path) -> Result<()> {
    let rows: Vec<Vec<f64>> = toy_profile(config).into_iter().map(|(x, g)| vec![x, g]).collect();
    io::save_columns(path, &["x", "g"], &rows)
}

pub fn cmd_toy(config: &ExperimentConfig, out: &Path) -> Result<i32> {
    let t = &config.toy;
    let ensemble = ToyEnsemble::generate(t.count, t.amplitude, t.seed)?;
    let init = (t.init[0], t.init[1]);
    let optimum = toy::toy_optimize(&ensemble, init)?;
    let oracle = toy::toy_grid_search(&ensemble, t.search_half_width, t.search_step)?;
    save_profile(config, &out.join("g_profile.csv"))?;
    let report = ToyReport {
        count: t.count,
        amplitude: t.amplitude,
        seed: t.seed,
        distance_to_origin: optimum.x.hypot(optimum.y),
        distance_to_oracle: (optimum.x - oracle.x).hypot(optimum.y - oracle.y),
        optimum,
        oracle,
        origin: toy::toy_classify((0.0, 0.0), &ensemble, t.kappa)?,
        init: toy::toy_classify(init, &ensemble, t.kappa)?,
        profile: "g_profile.csv".into(),
    };
    io::save_pretty_json(&out.join("toy.json"), &report)?;
    Ok(EXIT_OK)
}

const GNUPLOT_SCRIPT: &str = "\
set datafile separator ','
set terminal pngcairo size 1200,450
set output 'figures.png'
set multiplot layout 1,2
set title 'ideal and real densities'
set xlabel 'q'
plot 'density.csv' using 1:2 skip 1 with lines title 'ideal', \\
     'density.csv' using 1:3 skip 1 with lines title 'real'
set title 'g(x) on y = x'
set xlabel 'x'
plot 'g_profile.csv' using 1:2 skip 1 with lines title 'g'
unset multiplot
";

pub fn cmd_figures(config: &ExperimentConfig, out: &Path) -> Result<i32> {
    let grid = config.grid()?;
    let h = hermite_state(config.mode_index, config.omega, &grid)?;
    let state = EecState::new(h.clone(), h, config.oscillator())?;
    let delta = hermite_state(config.figures.delta_mode, config.omega, &grid)?
        .scale_real(config.figures.delta_amplitude);
    let d = stability::density_comparison(&state, &delta)?;
    let rows: Vec<Vec<f64>> = (0..d.x.len()).map(|j| vec![d.x[j], d.ideal[j], d.real[j]]).collect();
    io::save_columns(&out.join("density.csv"), &["x", "ideal", "real"], &rows)?;
    save_profile(config, &out.join("g_profile.csv"))?;
    io::write_atomic(&out.join("figures.gp"), GNUPLOT_SCRIPT.as_bytes())?;
    Ok(EXIT_OK)
}
