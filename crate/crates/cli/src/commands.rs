//! Subcommand execution. Grid rows are computed in parallel and written in
//! grid order, so output bytes do not depend on the thread count.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::process::ExitCode;

use rayon::prelude::*;

use zzq_core::bounds::{
    h_limit, qcrb, qzzb_coherent_closed, qzzb_numeric, qzzb_rectangle_closed,
    rivas_luis_floor_bound, PriorFisherInfo, PriorSpec,
};
use zzq_core::fidelity::FidelityModel;
use zzq_core::numerics::QuadratureConfig;
use zzq_core::spectra::{build_distribution, StateFamilySpec};
use zzq_core::verify::run_suite;

use crate::cli::{BoundArgs, Command, FidelityArgs, Panel, StateKind};
use crate::table::{format_sci, CsvTable};

pub const DEFAULT_SEED: u64 = 20260818;

const BOUND_HEADER: [&str; 8] = [
    "n_total",
    "qzzb_numeric",
    "qzzb_closed_or_floor",
    "qcrb",
    "h_limit",
    "h_limit_window_ok",
    "variance_limit",
    "variance_limit_window_ok",
];

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "usage error: {msg}"),
            CliError::Io(msg) => write!(f, "io error: {msg}"),
        }
    }
}

impl CliError {
    pub fn report(&self) -> ExitCode {
        eprintln!("zzq: {self}");
        match self {
            CliError::Usage(_) => ExitCode::from(2),
            CliError::Io(_) => ExitCode::from(3),
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

pub fn run(command: Command) -> Result<ExitCode, CliError> {
    match command {
        Command::Fidelity(mut args) => {
            args.merge_config()?;
            let table = fidelity_table(&args)?;
            write_table(&table, args.out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Bound(mut args) => {
            args.merge_config()?;
            let table = bound_table(&args)?;
            write_table(&table, args.out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Figure(mut args) => {
            args.merge_config()?;
            let panel = args.panel.ok_or_else(|| usage("--panel is required"))?;
            let table = figure_table(panel, &quadrature_config(args.abs_tol, args.rel_tol)?)?;
            write_table(&table, args.out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify(mut args) => {
            args.merge_config()?;
            Ok(run_verify(args.seed.unwrap_or(DEFAULT_SEED)))
        }
    }
}

fn write_table(table: &CsvTable, out: Option<&Path>) -> Result<(), CliError> {
    table.write(out).map_err(|e| {
        let target = out.map_or_else(|| "stdout".to_string(), |p| p.display().to_string());
        CliError::Io(format!("cannot write {target}: {e}"))
    })
}

fn quadrature_config(abs_tol: Option<f64>, rel_tol: Option<f64>) -> Result<QuadratureConfig, CliError> {
    let cfg = QuadratureConfig {
        abs_tol: abs_tol.unwrap_or(1e-10),
        rel_tol: rel_tol.unwrap_or(1e-9),
        ..QuadratureConfig::default()
    };
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    Ok(cfg)
}

/// One copy of the requested state as a fidelity model, validated.
fn single_copy_model(args: &FidelityArgs) -> Result<FidelityModel, CliError> {
    let state = args.state.ok_or_else(|| usage("--state is required"))?;
    let model = match state {
        StateKind::Coherent => {
            forbid(args.m.is_some(), "--m applies to rectangle or rivas-luis states")?;
            forbid(args.epsilon.is_some(), "--epsilon applies to rivas-luis states")?;
            let n_mean = args.n_mean.ok_or_else(|| usage("coherent states need --n-mean"))?;
            FidelityModel::CoherentClosed { n_mean }
        }
        StateKind::Rectangle => {
            forbid(args.n_mean.is_some(), "--n-mean applies to coherent states")?;
            forbid(args.epsilon.is_some(), "--epsilon applies to rivas-luis states")?;
            let m = args.m.ok_or_else(|| usage("rectangle states need --m"))?;
            FidelityModel::RectangleClosed { m }
        }
        StateKind::RivasLuis => {
            forbid(args.n_mean.is_some(), "--n-mean applies to coherent states")?;
            let epsilon = args.epsilon.ok_or_else(|| usage("rivas-luis states need --epsilon"))?;
            let m = args.m.ok_or_else(|| usage("rivas-luis states need --m"))?;
            FidelityModel::RivasLuisClosed { epsilon, m }
        }
    };
    model.validate().map_err(|e| usage(e.to_string()))?;
    Ok(model)
}

fn forbid(given: bool, msg: &str) -> Result<(), CliError> {
    if given {
        Err(usage(msg))
    } else {
        Ok(())
    }
}

fn replicate(model: FidelityModel, copies: u32) -> Result<FidelityModel, CliError> {
    match copies {
        0 => Err(usage("--copies must be at least 1")),
        1 => Ok(model),
        nu => Ok(FidelityModel::Product(vec![model; nu as usize])),
    }
}

fn fidelity_table(args: &FidelityArgs) -> Result<CsvTable, CliError> {
    let model = replicate(single_copy_model(args)?, args.copies.unwrap_or(1))?;
    let tau_min = args.tau_min.unwrap_or(0.0);
    let tau_max = args.tau_max.unwrap_or(2.0 * PI);
    let points = args.points.unwrap_or(201);
    if points == 0 {
        return Err(usage("--points must be at least 1"));
    }
    if !tau_min.is_finite() || !tau_max.is_finite() || tau_max < tau_min {
        return Err(usage("need finite --tau-min <= --tau-max"));
    }
    let grid = linspace(tau_min, tau_max, points);
    let rows: Vec<Vec<Option<f64>>> = grid
        .par_iter()
        .map(|&tau| vec![Some(tau), Some(model.eval(tau))])
        .collect();
    let mut table = CsvTable::new(vec!["tau", "fidelity"]);
    table.extend_rows(rows);
    Ok(table)
}

fn linspace(a: f64, b: f64, points: u32) -> Vec<f64> {
    if points == 1 {
        return vec![a];
    }
    let step = (b - a) / f64::from(points - 1);
    (0..points).map(|i| a + step * f64::from(i)).collect()
}

/// Shape of one grid entry in a bound sweep: the single-copy model, its
/// single-copy moments, the copy count, and the closed-form column.
struct BoundEntry {
    model: FidelityModel,
    copies: u32,
    mean_single: f64,
    var_single: f64,
    closed_or_floor: Option<f64>,
}

fn bound_table(args: &BoundArgs) -> Result<CsvTable, CliError> {
    let state = args.state.ok_or_else(|| usage("--state is required"))?;
    let grid_raw = args.n_grid.as_deref().ok_or_else(|| usage("--n-grid is required"))?;
    let grid = parse_grid(grid_raw)?;
    let w = args.window.unwrap_or(2.0 * PI);
    if !(w.is_finite() && w > 0.0) {
        return Err(usage("--window must be positive"));
    }
    let cfg = quadrature_config(args.abs_tol, args.rel_tol)?;
    let copies = args.copies.unwrap_or(1);
    if copies == 0 {
        return Err(usage("--copies must be at least 1"));
    }

    let entries: Result<Vec<BoundEntry>, CliError> = grid
        .iter()
        .map(|&x| bound_entry(state, x, copies, w, args))
        .collect();
    let entries = entries?;

    let rows: Vec<Vec<Option<f64>>> =
        entries.par_iter().map(|entry| bound_row(entry, w, &cfg)).collect::<Result<_, _>>()?;
    let mut table = CsvTable::new(BOUND_HEADER.to_vec());
    table.extend_rows(rows);
    Ok(table)
}

fn bound_entry(
    state: StateKind,
    x: f64,
    copies: u32,
    w: f64,
    args: &BoundArgs,
) -> Result<BoundEntry, CliError> {
    let at_full_circle = (w - 2.0 * PI).abs() < 1e-12;
    match state {
        StateKind::Coherent => {
            forbid(args.m.is_some(), "--m applies to rivas-luis states")?;
            forbid(args.epsilon.is_some(), "--epsilon applies to rivas-luis states")?;
            if !(x.is_finite() && x > 0.0) {
                return Err(usage(format!("coherent grid values must be positive, got {x}")));
            }
            let closed = (copies == 1 && at_full_circle)
                .then(|| qzzb_coherent_closed(x).map(|r| r.value))
                .transpose()
                .map_err(|e| usage(e.to_string()))?;
            Ok(BoundEntry {
                model: replicate(FidelityModel::CoherentClosed { n_mean: x }, copies)?,
                copies,
                mean_single: x,
                var_single: x,
                closed_or_floor: closed,
            })
        }
        StateKind::Rectangle => {
            forbid(args.m.is_some(), "--m applies to rivas-luis states; the grid sets m here")?;
            forbid(args.epsilon.is_some(), "--epsilon applies to rivas-luis states")?;
            let m = grid_integer(x, "rectangle grid")?;
            let mf = f64::from(m);
            let closed = (copies == 1 && at_full_circle)
                .then(|| qzzb_rectangle_closed(m).map(|r| r.value))
                .transpose()
                .map_err(|e| usage(e.to_string()))?;
            Ok(BoundEntry {
                model: replicate(FidelityModel::RectangleClosed { m }, copies)?,
                copies,
                mean_single: mf / 2.0,
                var_single: ((mf + 1.0) * (mf + 1.0) - 1.0) / 12.0,
                closed_or_floor: closed,
            })
        }
        StateKind::RivasLuis => {
            forbid(
                args.copies.is_some(),
                "the rivas-luis grid already sets the copy count; --copies does not apply",
            )?;
            let nu = grid_integer(x, "rivas-luis grid")?;
            if nu == 0 {
                return Err(usage("rivas-luis copy counts must be at least 1"));
            }
            let epsilon = args.epsilon.unwrap_or(0.1);
            let m = args.m.unwrap_or(19);
            let spec = StateFamilySpec::RivasLuis { epsilon, m };
            let dist = build_distribution(&spec, 1e-15).map_err(|e| usage(e.to_string()))?;
            let mo = dist.moments();
            let floor =
                rivas_luis_floor_bound(epsilon, nu, w).map_err(|e| usage(e.to_string()))?.value;
            Ok(BoundEntry {
                model: replicate(FidelityModel::RivasLuisClosed { epsilon, m }, nu)?,
                copies: nu,
                mean_single: mo.mean,
                var_single: mo.variance,
                closed_or_floor: Some(floor),
            })
        }
    }
}

fn grid_integer(x: f64, what: &str) -> Result<u32, CliError> {
    if x.is_finite() && x >= 0.0 && x.fract() == 0.0 && x <= f64::from(u32::MAX) {
        Ok(x as u32)
    } else {
        Err(usage(format!("{what} values must be non-negative integers, got {x}")))
    }
}

fn bound_row(entry: &BoundEntry, w: f64, cfg: &QuadratureConfig) -> Result<Vec<Option<f64>>, CliError> {
    let nu = f64::from(entry.copies);
    let mean_total = nu * entry.mean_single;
    let var_total = nu * entry.var_single;
    let prior = PriorSpec::UniformWindow { mu: 0.0, w };

    let numeric =
        qzzb_numeric(&prior, &entry.model, cfg).map_err(|e| usage(e.to_string()))?.value;
    let info = PriorFisherInfo::from_prior(&prior).map_err(|e| usage(e.to_string()))?;
    let cramer = qcrb(var_total, &info).map_err(|e| usage(e.to_string()))?.value;

    let (h_val, h_ok) = if mean_total > 0.0 {
        let r = h_limit(mean_total, w).map_err(|e| usage(e.to_string()))?;
        (Some(r.value), Some(f64::from(u8::from(r.window_ok))))
    } else {
        (None, None)
    };
    let (v_val, v_ok) = if var_total > 0.0 {
        let r = variance_limit_checked(var_total.sqrt(), w)?;
        (Some(r.0), Some(f64::from(u8::from(r.1))))
    } else {
        (None, None)
    };

    Ok(vec![
        Some(mean_total),
        Some(numeric),
        entry.closed_or_floor,
        Some(cramer),
        h_val,
        h_ok,
        v_val,
        v_ok,
    ])
}

fn variance_limit_checked(delta_h: f64, w: f64) -> Result<(f64, bool), CliError> {
    let r = zzq_core::bounds::variance_limit(delta_h, w).map_err(|e| usage(e.to_string()))?;
    Ok((r.value, r.window_ok))
}

fn parse_grid(raw: &str) -> Result<Vec<f64>, CliError> {
    let values: Result<Vec<f64>, _> =
        raw.split(',').map(|tok| tok.trim().parse::<f64>()).collect();
    let values = values.map_err(|e| usage(format!("bad --n-grid entry: {e}")))?;
    if values.is_empty() {
        return Err(usage("--n-grid must contain at least one value"));
    }
    Ok(values)
}

fn figure_table(panel: Panel, cfg: &QuadratureConfig) -> Result<CsvTable, CliError> {
    match panel {
        Panel::A => fidelity_panel(
            "n",
            &[1, 5, 25],
            |n| FidelityModel::CoherentClosed { n_mean: f64::from(n) },
        ),
        Panel::C => fidelity_panel("m", &[1, 5, 25], |m| FidelityModel::RectangleClosed { m }),
        Panel::E => fidelity_panel("nu", &[1, 5, 25], |nu| {
            let single = FidelityModel::RivasLuisClosed { epsilon: 0.1, m: 19 };
            if nu == 1 {
                single
            } else {
                FidelityModel::Product(vec![single; nu as usize])
            }
        }),
        Panel::B => {
            let grid: Vec<f64> = (0..10).map(|k| 0.25 * f64::powi(2.0, k)).collect();
            bound_panel(StateKind::Coherent, &grid, cfg)
        }
        Panel::D => {
            let grid: Vec<f64> = (0..9).map(|k| f64::powi(2.0, k)).collect();
            bound_panel(StateKind::Rectangle, &grid, cfg)
        }
        Panel::F => {
            let grid = [1.0, 2.0, 3.0, 5.0, 7.0, 10.0, 15.0, 20.0, 30.0, 50.0, 70.0, 100.0];
            bound_panel(StateKind::RivasLuis, &grid, cfg)
        }
    }
}

fn fidelity_panel(
    tag: &str,
    sizes: &[u32],
    make: impl Fn(u32) -> FidelityModel,
) -> Result<CsvTable, CliError> {
    let models: Vec<FidelityModel> = sizes.iter().map(|&s| make(s)).collect();
    for model in &models {
        model.validate().map_err(|e| usage(e.to_string()))?;
    }
    let grid = linspace(0.0, 2.0 * PI, 501);
    let rows: Vec<Vec<Option<f64>>> = grid
        .par_iter()
        .map(|&tau| {
            let mut row = Vec::with_capacity(models.len() + 1);
            row.push(Some(tau));
            row.extend(models.iter().map(|m| Some(m.eval(tau))));
            row
        })
        .collect();
    let mut header = vec!["tau".to_string()];
    header.extend(sizes.iter().map(|s| format!("fidelity_{tag}{s}")));
    let mut table = CsvTable::new(header);
    table.extend_rows(rows);
    Ok(table)
}

fn bound_panel(state: StateKind, grid: &[f64], cfg: &QuadratureConfig) -> Result<CsvTable, CliError> {
    let args = BoundArgs::default();
    let entries: Result<Vec<BoundEntry>, CliError> =
        grid.iter().map(|&x| bound_entry(state, x, 1, 2.0 * PI, &args)).collect();
    let entries = entries?;
    let rows: Vec<Vec<Option<f64>>> = entries
        .par_iter()
        .map(|entry| bound_row(entry, 2.0 * PI, cfg))
        .collect::<Result<_, _>>()?;
    let mut table = CsvTable::new(BOUND_HEADER.to_vec());
    table.extend_rows(rows);
    Ok(table)
}

fn run_verify(seed: u64) -> ExitCode {
    let results = run_suite(seed);
    let mut failed = 0_usize;
    for r in &results {
        let status = if r.pass { "PASS" } else { "FAIL" };
        if !r.pass {
            failed += 1;
        }
        println!(
            "{status} {name} measured={measured} tolerance={tolerance} :: {detail}",
            name = r.name,
            measured = format_sci(r.measured),
            tolerance = format_sci(r.tolerance),
            detail = r.detail,
        );
    }
    println!("{} checks, {} failed, seed {}", results.len(), failed, seed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
