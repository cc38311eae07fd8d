//! Per-step invariant monitors, blow-up and clustering indicators, and the
//! refinement and asymptotic-preserving studies.

use std::fmt;

use crate::error::{Error, Result};
use crate::grid::{cumulative_mass, total_mass, wasserstein1_between, Grid1D};
use crate::kinetic::{KineticScheme, KineticState};
use crate::macro_scheme::{run_macro, MacroScheme, MacroState, RunControl, VelocityMode};
use crate::models::{KineticSpec, ProblemPreset};
use crate::potential::{boundary_mass, Closure, PotentialField};

/// Number of cells at each end counted as leaked mass.
pub const LEAK_CELLS: usize = 5;

/// Quantities monitored at every step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport {
    pub t: f64,
    pub mass: f64,
    pub min_rho: f64,
    pub max_rho: f64,
    pub max_abs_velocity: f64,
    /// `max_i (a_{i+1/2} - a_{i-1/2})/dx` over face pairs where neither
    /// velocity came from the literal equal-slope branch.
    pub osl_max: f64,
    /// `2 alpha max|nu|`.
    pub osl_bound: f64,
    /// Total variation of the cumulative mass.
    pub tv_cumulative: f64,
    /// Mass in the 5 end cells on each side.
    pub support_leak: f64,
}

impl StepReport {
    pub const HEADER: &'static str =
        "t,mass,min_rho,max_rho,max_abs_velocity,osl_max,osl_bound,tv_cumulative,support_leak";

    pub fn fields(&self) -> [f64; 9] {
        [
            self.t,
            self.mass,
            self.min_rho,
            self.max_rho,
            self.max_abs_velocity,
            self.osl_max,
            self.osl_bound,
            self.tv_cumulative,
            self.support_leak,
        ]
    }

    /// First broken invariant relative to the previous report, if any.
    /// `c` bounds the velocities; `check_osl` enables the one-sided
    /// Lipschitz bound (attractive laws with the chain-rule velocity).
    pub fn violation(&self, prev: &StepReport, c: f64, check_osl: bool) -> Option<String> {
        if self.fields().iter().any(|v| !v.is_finite()) {
            return Some("non-finite report field".into());
        }
        let scale = prev.mass.abs().max(f64::MIN_POSITIVE);
        if (self.mass - prev.mass).abs() > 1e-12 * scale + self.support_leak {
            return Some(format!("mass drift {:e} -> {:e}", prev.mass, self.mass));
        }
        if self.min_rho < -1e-14 * self.max_rho {
            return Some(format!("negative density {:e}", self.min_rho));
        }
        if self.max_abs_velocity > c + 1e-12 {
            return Some(format!("velocity {:e} exceeds c = {c:e}", self.max_abs_velocity));
        }
        if check_osl && self.osl_max > self.osl_bound + 1e-10 {
            return Some(format!("one-sided Lipschitz {:e} exceeds {:e}", self.osl_max, self.osl_bound));
        }
        if self.tv_cumulative > prev.tv_cumulative * (1.0 + 1e-12) + 1e-300 {
            return Some(format!("TV of cumulative mass grew {:e} -> {:e}", prev.tv_cumulative, self.tv_cumulative));
        }
        None
    }
}

impl fmt::Display for StepReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "t={} mass={:e} min_rho={:e} max_rho={:e} max|a|={:e} osl={:e} (bound {:e}) tv={:e} leak={:e}",
            self.t,
            self.mass,
            self.min_rho,
            self.max_rho,
            self.max_abs_velocity,
            self.osl_max,
            self.osl_bound,
            self.tv_cumulative,
            self.support_leak
        )
    }
}

fn density_stats(rho: &[f64], grid: &Grid1D) -> (f64, f64, f64, f64, f64) {
    let mass = total_mass(rho, grid.dx);
    let min = rho.iter().copied().fold(f64::INFINITY, f64::min);
    let max = rho.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let m = cumulative_mass(rho, grid);
    let tv = m.windows(2).map(|p| (p[1] - p[0]).abs()).sum::<f64>() + m[0].abs();
    (mass, min, max, tv, boundary_mass(rho, grid.dx, LEAK_CELLS))
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn osl_bound(alpha: f64, field: &PotentialField) -> f64 {
    2.0 * alpha * max_abs(&field.nu)
}

/// Report for a macroscopic state.
pub fn report(state: &MacroState, scheme: &MacroScheme) -> StepReport {
    let grid = scheme.grid();
    let (mass, min_rho, max_rho, tv, leak) = density_stats(&state.rho, grid);
    let faces = scheme.face_velocities(&state.field);
    let mut osl = f64::NEG_INFINITY;
    for i in 1..faces.a.len() {
        if !(faces.tied[i] || faces.tied[i - 1]) {
            osl = osl.max((faces.a[i] - faces.a[i - 1]) / grid.dx);
        }
    }
    StepReport {
        t: state.t,
        mass,
        min_rho,
        max_rho,
        max_abs_velocity: max_abs(&faces.a),
        osl_max: if osl.is_finite() { osl } else { 0.0 },
        osl_bound: osl_bound(scheme.law.alpha, &state.field),
        tv_cumulative: tv,
        support_leak: leak,
    }
}

/// Whether the one-sided Lipschitz bound applies to this scheme.
pub fn osl_applies(scheme: &MacroScheme) -> bool {
    scheme.law.attractive && scheme.mode != VelocityMode::Naive
}

/// Report for a kinetic state; the velocity column holds `max |a_hat|` and
/// the OSL columns are 0.
pub fn kinetic_report(state: &KineticState, scheme: &KineticScheme) -> StepReport {
    let (mass, min_rho, max_rho, tv, leak) = density_stats(&state.rho, scheme.grid());
    StepReport {
        t: state.t,
        mass,
        min_rho,
        max_rho,
        max_abs_velocity: max_abs(&scheme.ap_velocity(&state.field)),
        osl_max: 0.0,
        osl_bound: 0.0,
        tv_cumulative: tv,
        support_leak: leak,
    }
}

/// First report time at which one cell holds at least `k` times the total
/// mass (`max rho * dx >= k M`); `None` if never. Needs at least 10 reports.
pub fn blowup_indicator(reports: &[StepReport], dx: f64, k: f64) -> Result<Option<f64>> {
    if reports.len() < 10 {
        return Err(Error::Contract(format!("blow-up indicator needs >= 10 samples, got {}", reports.len())));
    }
    Ok(reports.iter().find(|r| r.mass > 0.0 && r.max_rho * dx >= k * r.mass).map(|r| r.t))
}

/// Default cell fraction of the blow-up indicator.
pub const BLOWUP_FRACTION: f64 = 0.1;

/// Largest fraction of the mass held by `width` contiguous cells.
pub fn cluster_fraction(rho: &[f64], width: usize) -> f64 {
    let total: f64 = rho.iter().sum();
    if total <= 0.0 || width == 0 {
        return 0.0;
    }
    let width = width.min(rho.len());
    let mut window: f64 = rho[..width].iter().sum();
    let mut best = window;
    for i in width..rho.len() {
        window += rho[i] - rho[i - width];
        best = best.max(window);
    }
    best / total
}

/// Number of local maxima above `rel * max rho` (plateaus count once).
pub fn count_peaks(rho: &[f64], rel: f64) -> usize {
    let top = rho.iter().copied().fold(0.0f64, f64::max);
    if top <= 0.0 {
        return 0;
    }
    let floor = rel * top;
    let mut peaks = 0;
    let mut i = 0;
    while i < rho.len() {
        let mut j = i;
        while j + 1 < rho.len() && rho[j + 1] == rho[i] {
            j += 1;
        }
        let left_lower = i == 0 || rho[i - 1] < rho[i];
        let right_lower = j + 1 == rho.len() || rho[j + 1] < rho[j];
        if left_lower && right_lower && rho[i] > floor {
            peaks += 1;
        }
        i = j + 1;
    }
    peaks
}

/// Mass centroid of the nodes in `range`.
pub fn centroid(rho: &[f64], grid: &Grid1D, range: std::ops::Range<usize>) -> f64 {
    let (mut m, mut q) = (0.0, 0.0);
    for i in range {
        m += rho[i];
        q += rho[i] * grid.x(i);
    }
    if m > 0.0 {
        q / m
    } else {
        f64::NAN
    }
}

/// One row of a refinement table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefinementRow {
    pub nx: usize,
    pub dx: f64,
    /// W1 distance to the finest solution.
    pub error: f64,
}

/// Errors against the finest grid and the least-squares slope of
/// `log error` against `log dx`.
#[derive(Debug, Clone, PartialEq)]
pub struct RefinementTable {
    pub horizon: f64,
    pub reference_nx: usize,
    pub rows: Vec<RefinementRow>,
    pub order: Option<f64>,
}

/// Least-squares slope of `log y` against `log x` over positive pairs.
pub fn fitted_order(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> =
        points.iter().filter(|(x, y)| *x > 0.0 && *y > 0.0).map(|(x, y)| (x.ln(), y.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx)
}

/// Runs `preset` on every grid to `horizon` and measures W1 errors against
/// the finest grid.
pub fn refinement_study(
    preset: &ProblemPreset,
    grids: &[usize],
    horizon: f64,
    mode: VelocityMode,
    closure: Closure,
) -> Result<RefinementTable> {
    if grids.len() < 3 {
        return Err(Error::Config(format!("refinement needs >= 3 grids, got {}", grids.len())));
    }
    let control = RunControl { horizon, snapshot_every: 0.0, keep_going: true };
    let finals: Vec<Result<(Grid1D, Vec<f64>)>> = std::thread::scope(|scope| {
        let handles: Vec<_> = grids
            .iter()
            .map(|&nx| {
                scope.spawn(move || {
                    let scheme = preset.macro_scheme(nx, mode, closure, f64::INFINITY)?;
                    let rho0 = preset.initial_density(scheme.grid());
                    let traj = run_macro(&scheme, rho0, &control)?;
                    let last = traj.snapshots.last().map(|s| s.rho.clone()).unwrap_or_default();
                    Ok((*scheme.grid(), last))
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("refinement worker panicked")).collect()
    });
    let finals = finals.into_iter().collect::<Result<Vec<_>>>()?;
    let fine = (0..grids.len()).max_by_key(|&k| grids[k]).unwrap_or(0);
    let (ref_grid, ref_rho) = &finals[fine];
    let mut rows = Vec::new();
    for (k, (g, rho)) in finals.iter().enumerate() {
        if k == fine {
            continue;
        }
        let error = wasserstein1_between(g, rho, ref_grid, ref_rho)?;
        rows.push(RefinementRow { nx: g.nx, dx: g.dx, error });
    }
    let order = fitted_order(&rows.iter().map(|r| (r.dx, r.error)).collect::<Vec<_>>());
    Ok(RefinementTable { horizon, reference_nx: grids[fine], rows, order })
}

/// Max-norm density gap between the kinetic scheme and its limit scheme
/// over `steps` steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApRow {
    pub eps: f64,
    pub dt: f64,
    pub gap: f64,
}

/// Runs the kinetic scheme of `preset` for each `eps` and compares with the
/// macroscopic limit scheme (viscosity `V_M`) on the same grid.
pub fn compare_ap(preset: &ProblemPreset, eps_list: &[f64], nx: usize, steps: usize) -> Result<Vec<ApRow>> {
    let spec = preset
        .kinetic
        .clone()
        .ok_or_else(|| Error::Config(format!("preset '{}' has no kinetic model", preset.name)))?;
    let base =
        preset.kinetic_scheme(nx, Some(&spec), VelocityMode::VolpertLiteral, Default::default(), Closure::FarField)?;
    let rho0 = preset.initial_density(base.grid());
    let reference = base.run_limit(rho0.clone(), steps)?;
    eps_list
        .iter()
        .map(|&eps| {
            let spec = KineticSpec { eps, ..spec.clone() };
            let scheme = preset.kinetic_scheme(
                nx,
                Some(&spec),
                VelocityMode::VolpertLiteral,
                Default::default(),
                Closure::FarField,
            )?;
            let mut state = scheme.isotropic_state(0.0, rho0.clone())?;
            let mut gap = 0.0f64;
            for r in reference.iter().skip(1) {
                state = scheme.step(&state)?;
                gap = gap.max(state.rho.iter().zip(r).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())));
            }
            Ok(ApRow { eps, dt: scheme.grid().dt, gap })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::law::VelocityLaw;
    use crate::models::preset;
    use crate::potential::{FieldSolver, PointyPotential};

    #[test]
    fn zero_state_report() {
        let p = preset("vpfp_one_bump").unwrap();
        let s = p.macro_scheme(40, VelocityMode::VolpertLiteral, Closure::FarField, 1.0).unwrap();
        let st = s.state(0.0, vec![0.0; 41]).unwrap();
        let r = report(&st, &s);
        assert_eq!((r.mass, r.min_rho, r.max_rho, r.max_abs_velocity), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn unit_mass_report() {
        let p = preset("chemo_two_bumps").unwrap();
        let s = p.macro_scheme(200, VelocityMode::VolpertLiteral, Closure::FarField, 1.0).unwrap();
        let mut rho = p.initial_density(s.grid());
        let m = total_mass(&rho, s.grid().dx);
        rho.iter_mut().for_each(|r| *r /= m);
        let r = report(&s.state(0.0, rho).unwrap(), &s);
        assert!((r.mass - 1.0).abs() < 1e-12);
        assert!(r.osl_max <= r.osl_bound);
    }

    #[test]
    fn osl_hand_case() {
        // Four interior cells, a = id, w = 0, far-field slopes.
        let g = Grid1D::new(0.0, 1.0, 5, 0.01).unwrap();
        let solver = FieldSolver::new(PointyPotential::zero(), g, Closure::FarField).unwrap();
        let s = MacroScheme::new(VelocityLaw::identity(), solver, VelocityMode::VolpertLiteral, 1.0);
        let rho = vec![0.0, 1.0, 2.0, 1.0, 1.0, 0.0];
        let st = s.state(0.0, rho.clone()).unwrap();
        let dx = g.dx;
        let m: f64 = rho.iter().sum::<f64>() * dx;
        let mut h = vec![0.5 * m];
        for r in &rho {
            h.push(h.last().unwrap() - dx * r);
        }
        let u: Vec<f64> = h.windows(2).map(|p| 0.5 * (p[0] + p[1])).collect();
        let a: Vec<f64> = u.windows(2).map(|p| 0.5 * (p[0] + p[1])).collect();
        let want = a.windows(2).map(|p| (p[1] - p[0]) / dx).fold(f64::NEG_INFINITY, f64::max);
        let r = report(&st, &s);
        assert!((r.osl_max - want).abs() < 1e-12);
        // For a = id the faces satisfy a_{i+1/2} - a_{i-1/2} = -dx (rho_{i-1} + 2 rho_i + rho_{i+1})/4.
        assert!((want + 0.75).abs() < 1e-12);
    }

    #[test]
    fn blowup_examples() {
        let g = Grid1D::new(-1.0, 1.0, 20, 0.01).unwrap();
        let mk = |t: f64, max_rho: f64| StepReport {
            t,
            mass: 1.0,
            min_rho: 0.0,
            max_rho,
            max_abs_velocity: 0.0,
            osl_max: 0.0,
            osl_bound: 0.0,
            tv_cumulative: 1.0,
            support_leak: 0.0,
        };
        let flat: Vec<_> = (0..12).map(|k| mk(k as f64, 1.0 - 0.01 * k as f64)).collect();
        assert_eq!(blowup_indicator(&flat, g.dx, 0.5).unwrap(), None);
        let dirac: Vec<_> = (0..12).map(|k| mk(k as f64, 1.0 / g.dx)).collect();
        assert_eq!(blowup_indicator(&dirac, g.dx, 0.5).unwrap(), Some(0.0));
        assert!(blowup_indicator(&dirac[..5], g.dx, 0.5).is_err());
    }

    #[test]
    fn peaks_and_clusters() {
        assert_eq!(count_peaks(&[0.0, 1.0, 0.0, 2.0, 2.0, 0.0], 1e-6), 2);
        assert_eq!(count_peaks(&[0.0, 1.0, 2.0, 1.0, 0.0], 1e-6), 1);
        assert!((cluster_fraction(&[0.0, 1.0, 1.0, 0.0, 2.0], 2) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn order_fit() {
        let pts: Vec<(f64, f64)> = [0.1, 0.05, 0.025].iter().map(|&h: &f64| (h, 3.0 * h * h)).collect();
        assert!((fitted_order(&pts).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(fitted_order(&[(0.1, 0.0), (0.05, 0.0)]), None);
    }

    #[test]
    fn refinement_needs_three_grids() {
        let p = preset("vpfp_one_bump").unwrap();
        assert!(matches!(
            refinement_study(&p, &[100], 0.1, VelocityMode::VolpertLiteral, Closure::FarField),
            Err(Error::Config(_))
        ));
        let t = refinement_study(&p, &[100, 100, 100], 0.1, VelocityMode::VolpertLiteral, Closure::FarField).unwrap();
        assert!(t.rows.iter().all(|r| r.error == 0.0));
        let t = refinement_study(&p, &[100, 200, 400], 0.2, VelocityMode::VolpertLiteral, Closure::FarField).unwrap();
        assert_eq!(t.rows.len(), 2);
        assert!(t.rows[0].error > t.rows[1].error);
        assert!(t.order.unwrap() > 0.0);
    }
}
