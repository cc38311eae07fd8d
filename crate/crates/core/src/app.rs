//! File-level driver behind the `aggrekin` binary: runs and studies that
//! write CSV tables into an output directory.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::config::{RunConfig, SchemeKind};
use crate::diagnostics::{blowup_indicator, compare_ap, refinement_study, StepReport};
use crate::error::{Error, Result};
use crate::kinetic::run_kinetic;
use crate::macro_scheme::{run_macro, RunControl, Trajectory};

/// Environment variable overriding `output_dir`.
pub const OUTPUT_ENV: &str = "AGGREKIN_OUTPUT";

/// Study kinds of `aggrekin study`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StudyKind {
    Refinement,
    ApSweep,
}

/// What a finished run produced.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub output_dir: PathBuf,
    pub steps: usize,
    pub dt: f64,
    pub final_mass: f64,
    pub blowup_time: Option<f64>,
    /// Invariant failures tolerated under `keep_going`.
    pub failures: Vec<String>,
}

/// Shortest representation that parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if x != 0.0 && x.is_finite() && !(1e-4..1e15).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

/// Output directory after applying the environment override.
pub fn output_dir(cfg: &RunConfig) -> PathBuf {
    match std::env::var_os(OUTPUT_ENV) {
        Some(dir) if !dir.is_empty() => PathBuf::from(dir),
        _ => cfg.output_dir.clone(),
    }
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn write_snapshots(path_dir: &Path, traj: &Trajectory, x0: f64, dx: f64) -> Result<()> {
    let mut w = create(path_dir, "snapshots.csv")?;
    let nvel = traj.snapshots.first().and_then(|s| s.f.as_ref()).map_or(0, |f| f.first().map_or(0, Vec::len));
    write!(w, "t,x,rho")?;
    for j in 0..nvel {
        write!(w, ",f_{j}")?;
    }
    writeln!(w)?;
    for snap in &traj.snapshots {
        let t = fmt_f64(snap.t);
        for (i, r) in snap.rho.iter().enumerate() {
            write!(w, "{t},{},{}", fmt_f64(x0 + i as f64 * dx), fmt_f64(*r))?;
            if let Some(f) = &snap.f {
                for v in &f[i] {
                    write!(w, ",{}", fmt_f64(*v))?;
                }
            }
            writeln!(w)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn write_reports(dir: &Path, reports: &[StepReport]) -> Result<()> {
    let mut w = create(dir, "diagnostics.csv")?;
    writeln!(w, "{}", StepReport::HEADER)?;
    for r in reports {
        let row: Vec<String> = r.fields().iter().map(|v| fmt_f64(*v)).collect();
        writeln!(w, "{}", row.join(","))?;
    }
    w.flush()?;
    Ok(())
}

/// Runs the configured problem and writes `snapshots.csv`,
/// `diagnostics.csv` and `meta.txt`.
pub fn run(cfg: &RunConfig, keep_going: bool) -> Result<RunSummary> {
    let started = Instant::now();
    let problem = cfg.resolve_problem()?;
    let dir = output_dir(cfg);
    fs::create_dir_all(&dir)?;
    let control = RunControl { horizon: problem.horizon, snapshot_every: cfg.snapshot_every, keep_going };

    let mut meta = cfg.describe();
    meta.push_str(&format!("horizon = {}\n", fmt_f64(problem.horizon)));
    let (traj, grid, viscosity) = match cfg.scheme {
        SchemeKind::Macro => {
            let scheme = problem.macro_scheme(cfg.nx, cfg.velocity_mode, cfg.closure, cfg.dt_max)?;
            let rho0 = problem.initial_density(scheme.grid());
            meta.push_str(&format!("law = {}\n", scheme.law.name()));
            if !scheme.law.attractive {
                meta.push_str("note = non-attractive law: no convergence result applies, output is exploratory\n");
            }
            (run_macro(&scheme, rho0, &control)?, *scheme.grid(), scheme.c)
        }
        SchemeKind::KineticLie | SchemeKind::KineticStrang => {
            let spec = problem.kinetic.clone();
            let scheme = problem.kinetic_scheme(
                cfg.nx,
                spec.as_ref(),
                cfg.velocity_mode,
                cfg.scheme.splitting(),
                cfg.closure,
            )?;
            let rho0 = problem.initial_density(scheme.grid());
            meta.push_str(&format!("eps_resolved = {}\n", fmt_f64(scheme.eps)));
            (run_kinetic(&scheme, rho0, &control, cfg.dump_f)?, *scheme.grid(), scheme.vgrid.vmax())
        }
    };
    write_snapshots(&dir, &traj, grid.x0, grid.dx)?;
    write_reports(&dir, &traj.reports)?;

    let blowup_time =
        if traj.reports.len() >= 10 { blowup_indicator(&traj.reports, grid.dx, cfg.blowup_fraction)? } else { None };
    let final_mass = traj.reports.last().map_or(0.0, |r| r.mass);
    meta.push_str(&format!("dx = {}\n", fmt_f64(grid.dx)));
    meta.push_str(&format!("dt = {}\n", fmt_f64(grid.dt)));
    meta.push_str(&format!("lambda = {}\n", fmt_f64(grid.lambda)));
    meta.push_str(&format!("viscosity = {}\n", fmt_f64(viscosity)));
    meta.push_str(&format!("steps = {}\n", traj.steps));
    meta.push_str(&format!("final_mass = {}\n", fmt_f64(final_mass)));
    meta.push_str(&format!("blowup_time = {}\n", blowup_time.map_or_else(|| "none".to_string(), fmt_f64)));
    for f in &traj.failures {
        meta.push_str(&format!("failure = {f}\n"));
    }
    if !cfg.deterministic {
        meta.push_str(&format!("wall_seconds = {:.3}\n", started.elapsed().as_secs_f64()));
    }
    fs::write(dir.join("meta.txt"), meta)?;

    Ok(RunSummary { output_dir: dir, steps: traj.steps, dt: grid.dt, final_mass, blowup_time, failures: traj.failures })
}

/// Runs a study and writes its table; returns the table path.
pub fn study(cfg: &RunConfig, kind: StudyKind) -> Result<PathBuf> {
    let problem = cfg.resolve_problem()?;
    let dir = output_dir(cfg);
    fs::create_dir_all(&dir)?;
    match kind {
        StudyKind::Refinement => {
            if cfg.scheme.is_kinetic() {
                return Err(Error::Config("refinement studies use scheme = macro".into()));
            }
            let table = refinement_study(&problem, &cfg.grids, problem.horizon, cfg.velocity_mode, cfg.closure)?;
            let path = dir.join("refinement.csv");
            let mut w = BufWriter::new(File::create(&path)?);
            writeln!(w, "nx,dx,w1_error,reference_nx,fitted_order")?;
            let order = table.order.map_or_else(|| "nan".to_string(), fmt_f64);
            for r in &table.rows {
                writeln!(w, "{},{},{},{},{order}", r.nx, fmt_f64(r.dx), fmt_f64(r.error), table.reference_nx)?;
            }
            w.flush()?;
            Ok(path)
        }
        StudyKind::ApSweep => {
            let rows = compare_ap(&problem, &cfg.eps_list, cfg.nx, cfg.steps)?;
            let path = dir.join("ap_sweep.csv");
            let mut w = BufWriter::new(File::create(&path)?);
            writeln!(w, "eps,dt,max_gap")?;
            for r in &rows {
                writeln!(w, "{},{},{}", fmt_f64(r.eps), fmt_f64(r.dt), fmt_f64(r.gap))?;
            }
            w.flush()?;
            Ok(path)
        }
    }
}
