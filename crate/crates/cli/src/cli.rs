//! Flag surface and the flat key=value config file that backs it. Values
//! given on the command line always win over config-file values.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::commands::CliError;

#[derive(Parser, Debug)]
#[command(
    name = "zzq",
    version,
    about = "Bayesian mean-square-error lower bounds for single-mode optical phase estimation",
    long_about = "Computes fidelity curves and Bayesian mean-square-error lower bounds \
                  (quadrature and closed-form Ziv-Zakai style bounds, information bounds, \
                  mean-energy and variance limits) for coherent, rectangle, and \
                  vacuum-plus-plateau photon-number spectra, and runs a self-verification \
                  suite. Output is CSV with 12 significant digits."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Tabulate the fidelity between phase-shifted copies of a state
    Fidelity(FidelityArgs),
    /// Tabulate MSE lower bounds over a grid of state sizes
    Bound(BoundArgs),
    /// Emit one of the six standard panels (a-f) as CSV
    Figure(FigureArgs),
    /// Run the self-verification suite and report each check
    Verify(VerifyArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum StateKind {
    Coherent,
    Rectangle,
    RivasLuis,
}

impl FromStr for StateKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        <Self as ValueEnum>::from_str(s, true)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Panel {
    A,
    B,
    C,
    D,
    E,
    F,
}

impl FromStr for Panel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        <Self as ValueEnum>::from_str(s, true)
    }
}

#[derive(Args, Debug, Default)]
pub struct FidelityArgs {
    /// State family
    #[arg(long, value_enum)]
    pub state: Option<StateKind>,
    /// Mean photon number (coherent)
    #[arg(long)]
    pub n_mean: Option<f64>,
    /// Top occupied number state (rectangle, rivas-luis)
    #[arg(long)]
    pub m: Option<u32>,
    /// Weight of the plateau component (rivas-luis)
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Number of independent copies; fidelity is raised to this power [default: 1]
    #[arg(long)]
    pub copies: Option<u32>,
    /// Lower end of the phase-difference grid [default: 0]
    #[arg(long)]
    pub tau_min: Option<f64>,
    /// Upper end of the phase-difference grid [default: 2 pi]
    #[arg(long)]
    pub tau_max: Option<f64>,
    /// Number of grid points [default: 201]
    #[arg(long)]
    pub points: Option<u32>,
    /// Output CSV path; stdout when omitted
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Flat key=value config file; explicit flags take precedence
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug, Default)]
pub struct BoundArgs {
    /// State family
    #[arg(long, value_enum)]
    pub state: Option<StateKind>,
    /// Comma-separated grid: mean photon numbers (coherent), top number
    /// states (rectangle), or copy counts (rivas-luis)
    #[arg(long)]
    pub n_grid: Option<String>,
    /// Top occupied number state of one copy (rivas-luis only) [default: 19]
    #[arg(long)]
    pub m: Option<u32>,
    /// Weight of the plateau component (rivas-luis only) [default: 0.1]
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Independent copies per grid point (coherent, rectangle) [default: 1]
    #[arg(long)]
    pub copies: Option<u32>,
    /// Prior window width in radians [default: 2 pi]
    #[arg(long)]
    pub window: Option<f64>,
    /// Absolute quadrature tolerance [default: 1e-10]
    #[arg(long)]
    pub abs_tol: Option<f64>,
    /// Relative quadrature tolerance [default: 1e-9]
    #[arg(long)]
    pub rel_tol: Option<f64>,
    /// Output CSV path; stdout when omitted
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Flat key=value config file; explicit flags take precedence
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug, Default)]
pub struct FigureArgs {
    /// Panel letter. Fidelity panels: (a) coherent with N in {1, 5, 25},
    /// (c) rectangle with m in {1, 5, 25}, (e) vacuum-plus-plateau
    /// (epsilon = 0.1, m = 19) with 1, 5, 25 copies. Bound panels:
    /// (b) coherent, (d) rectangle, (f) vacuum-plus-plateau vs copy count.
    #[arg(long, value_enum)]
    pub panel: Option<Panel>,
    /// Absolute quadrature tolerance [default: 1e-10]
    #[arg(long)]
    pub abs_tol: Option<f64>,
    /// Relative quadrature tolerance [default: 1e-9]
    #[arg(long)]
    pub rel_tol: Option<f64>,
    /// Output CSV path; stdout when omitted
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Flat key=value config file; explicit flags take precedence
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug, Default)]
pub struct VerifyArgs {
    /// Seed for the randomized checks [default: 20260818]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Flat key=value config file; explicit flags take precedence
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Parse a config file of `key = value` lines. Blank lines and lines
/// starting with '#' are skipped.
pub fn load_config(path: &std::path::Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
    let mut map = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Usage(format!(
                "config {} line {}: expected key=value, got '{line}'",
                path.display(),
                lineno + 1
            ))
        })?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

fn fill<T>(slot: &mut Option<T>, key: &str, raw: &str) -> Result<(), CliError>
where
    T: FromStr,
    T::Err: fmt::Display,
{
    if slot.is_none() {
        let parsed =
            raw.parse::<T>().map_err(|e| CliError::Usage(format!("config key '{key}': {e}")))?;
        *slot = Some(parsed);
    }
    Ok(())
}

macro_rules! merge_keys {
    ($args:ident, $map:ident, { $($key:literal => $field:ident),+ $(,)? }) => {
        for (key, value) in $map {
            match key.as_str() {
                $($key => fill(&mut $args.$field, $key, &value)?,)+
                other => {
                    return Err(CliError::Usage(format!("unknown config key '{other}'")));
                }
            }
        }
    };
}

impl FidelityArgs {
    pub fn merge_config(&mut self) -> Result<(), CliError> {
        let Some(path) = self.config.take() else { return Ok(()) };
        let map = load_config(&path)?;
        merge_keys!(self, map, {
            "state" => state,
            "n-mean" => n_mean,
            "m" => m,
            "epsilon" => epsilon,
            "copies" => copies,
            "tau-min" => tau_min,
            "tau-max" => tau_max,
            "points" => points,
            "out" => out,
        });
        Ok(())
    }
}

impl BoundArgs {
    pub fn merge_config(&mut self) -> Result<(), CliError> {
        let Some(path) = self.config.take() else { return Ok(()) };
        let map = load_config(&path)?;
        merge_keys!(self, map, {
            "state" => state,
            "n-grid" => n_grid,
            "m" => m,
            "epsilon" => epsilon,
            "copies" => copies,
            "window" => window,
            "abs-tol" => abs_tol,
            "rel-tol" => rel_tol,
            "out" => out,
        });
        Ok(())
    }
}

impl FigureArgs {
    pub fn merge_config(&mut self) -> Result<(), CliError> {
        let Some(path) = self.config.take() else { return Ok(()) };
        let map = load_config(&path)?;
        merge_keys!(self, map, {
            "panel" => panel,
            "abs-tol" => abs_tol,
            "rel-tol" => rel_tol,
            "out" => out,
        });
        Ok(())
    }
}

impl VerifyArgs {
    pub fn merge_config(&mut self) -> Result<(), CliError> {
        let Some(path) = self.config.take() else { return Ok(()) };
        let map = load_config(&path)?;
        merge_keys!(self, map, {
            "seed" => seed,
        });
        Ok(())
    }
}
