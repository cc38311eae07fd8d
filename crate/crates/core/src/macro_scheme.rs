//! Lax-Friedrichs finite-volume scheme for `d_t rho + d_x(a(d_x S) rho) = 0`
//! with the chain-rule (Vol'pert) face velocity.
//!
//! The update is the collapsed form
//!
//! ```text
//! rho_i' = rho_i (1 - l c + (l/4)(a_{i-1/2} - a_{i+1/2}))
//!        + (l/2)(c + a_{i-1/2}/2) rho_{i-1} + (l/2)(c - a_{i+1/2}/2) rho_{i+1}
//! ```
//!
//! with `l = dt/dx`. Note that the flux difference carries `l/2`, so one
//! step of size `dt` advances the transport part by `dt/2`: the time
//! recorded in [`MacroState::t`] is the scheme time `n*dt`, and the
//! continuous dynamics are reached at `t/2` (see the particle comparison in
//! [`crate::models`]).

use crate::diagnostics::{osl_applies, report, StepReport};
use crate::error::{Error, Result};
use crate::grid::{total_mass, Grid1D};
use crate::law::{sup_velocity_bound, VelocityLaw};
use crate::potential::{FieldSolver, PotentialField};

/// How the face velocity is built from the slopes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VelocityMode {
    /// Chord of `A` between the neighbouring centred slopes; exactly 0 when
    /// the two slopes are bitwise equal.
    #[default]
    VolpertLiteral,
    /// Chord of `A`, `a(u)` when the slopes are equal.
    VolpertSmooth,
    /// `a` of the half-face slope. Reproduces the wrong dynamics.
    Naive,
}

impl VelocityMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::VolpertLiteral => "volpert_literal",
            Self::VolpertSmooth => "volpert_smooth",
            Self::Naive => "naive",
        }
    }
}

/// Safety factor applied to the CFL bound.
pub const CFL_SAFETY: f64 = 0.95;

/// `0.95 * 2/(3c) * dx`, or `dt_max` when `c = 0`.
pub fn cfl_dt(c: f64, dx: f64, dt_max: f64) -> f64 {
    if c <= 0.0 {
        return dt_max;
    }
    let dt = CFL_SAFETY * 2.0 / (3.0 * c) * dx;
    dt.min(dt_max)
}

/// Face velocity from the two neighbouring centred slopes.
pub fn volpert_velocity(u1: f64, u2: f64, law: &VelocityLaw, mode: VelocityMode) -> f64 {
    if u1 == u2 {
        return match mode {
            VelocityMode::VolpertLiteral => 0.0,
            _ => law.a(u1),
        };
    }
    law.chord(u1, u2)
}

/// `a(u)`.
pub fn naive_velocity(u: f64, law: &VelocityLaw) -> f64 {
    law.a(u)
}

/// `J = a (rho_l + rho_r)/2`.
pub fn flux_halfface(a_half: f64, rho_l: f64, rho_r: f64) -> f64 {
    a_half * (rho_l + rho_r) / 2.0
}

/// One time level of the macroscopic scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct MacroState {
    pub t: f64,
    pub rho: Vec<f64>,
    pub field: PotentialField,
    pub mass: f64,
}

/// Face velocities `a_{i+1/2}`, `i = 0..nx-1`, and whether the literal
/// equal-slope branch produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceVelocities {
    pub a: Vec<f64>,
    pub tied: Vec<bool>,
}

/// The scheme bound to a law, a potential solver and a grid.
#[derive(Debug, Clone)]
pub struct MacroScheme {
    pub law: VelocityLaw,
    pub solver: FieldSolver,
    pub mode: VelocityMode,
    /// Viscosity constant `c`.
    pub c: f64,
}

impl MacroScheme {
    /// Scheme whose viscosity is the sup bound of `a` for data of mass `mass`.
    pub fn new(law: VelocityLaw, solver: FieldSolver, mode: VelocityMode, mass: f64) -> Self {
        let c = sup_velocity_bound(&law, mass, solver.w0());
        Self { law, solver, mode, c }
    }

    pub fn grid(&self) -> &Grid1D {
        &self.solver.grid
    }

    /// CFL-limited time step for this scheme.
    pub fn stable_dt(&self, dt_max: f64) -> f64 {
        cfl_dt(self.c, self.grid().dx, dt_max)
    }

    /// Same scheme with time step `dt`.
    pub fn with_dt(&self, dt: f64) -> Result<Self> {
        let grid = self.grid().with_dt(dt)?;
        Ok(Self { solver: self.solver.regrid(grid)?, ..self.clone() })
    }

    pub fn state(&self, t: f64, rho: Vec<f64>) -> Result<MacroState> {
        let field = self.solver.solve(&rho)?;
        let mass = total_mass(&rho, self.grid().dx);
        Ok(MacroState { t, rho, field, mass })
    }

    pub fn face_velocities(&self, field: &PotentialField) -> FaceVelocities {
        let nx = self.grid().nx;
        let mut a = Vec::with_capacity(nx);
        let mut tied = Vec::with_capacity(nx);
        for i in 0..nx {
            let (v, t) = match self.mode {
                VelocityMode::Naive => (naive_velocity(field.half[i + 1], &self.law), false),
                mode => {
                    let (u1, u2) = (field.centered[i], field.centered[i + 1]);
                    (volpert_velocity(u1, u2, &self.law, mode), u1 == u2 && mode == VelocityMode::VolpertLiteral)
                }
            };
            a.push(v);
            tied.push(t);
        }
        FaceVelocities { a, tied }
    }

    fn check_cfl(&self, lambda: f64) -> Result<()> {
        let limit = if self.c > 0.0 { 2.0 / (3.0 * self.c) } else { f64::INFINITY };
        if lambda > limit * (1.0 + 1e-12) {
            return Err(Error::Cfl { lambda, limit });
        }
        Ok(())
    }

    /// Advances by the grid's `dt`.
    pub fn step(&self, state: &MacroState) -> Result<MacroState> {
        self.step_dt(state, self.grid().dt)
    }

    /// Advances by `dt` (at most the CFL bound).
    pub fn step_dt(&self, state: &MacroState, dt: f64) -> Result<MacroState> {
        let grid = self.grid();
        grid.check_len("rho", state.rho.len())?;
        let lambda = dt / grid.dx;
        self.check_cfl(lambda)?;
        let faces = self.face_velocities(&state.field);
        let rho = lf_update(&state.rho, &faces.a, lambda, self.c);
        let t = state.t + dt;
        check_positive(&rho, t)?;
        let field = self.solver.solve(&rho)?;
        let mass = total_mass(&rho, grid.dx);
        Ok(MacroState { t, rho, field, mass })
    }
}

/// The collapsed update on nodes `1..nx-1`; nodes `0` and `nx` stay empty.
pub(crate) fn lf_update(rho: &[f64], a: &[f64], lambda: f64, c: f64) -> Vec<f64> {
    let n = rho.len() - 1;
    let mut out = vec![0.0; n + 1];
    let (h, q) = (0.5 * lambda, 0.25 * lambda);
    for i in 1..n {
        let (am, ap) = (a[i - 1], a[i]);
        out[i] = rho[i] * (1.0 - lambda * c + q * (am - ap))
            + h * (c + 0.5 * am) * rho[i - 1]
            + h * (c - 0.5 * ap) * rho[i + 1];
    }
    out
}

pub(crate) fn check_positive(rho: &[f64], t: f64) -> Result<()> {
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for &r in rho {
        if !r.is_finite() {
            return Err(Error::Invariant { t, what: "non-finite density".into() });
        }
        lo = lo.min(r);
        hi = hi.max(r.abs());
    }
    if lo < -1e-14 * hi {
        return Err(Error::Invariant { t, what: format!("negative density {lo:e} (max {hi:e})") });
    }
    Ok(())
}

/// One step of the scheme for `law` and `solver` at the state's mass.
pub fn macro_step(
    state: &MacroState,
    law: &VelocityLaw,
    solver: &FieldSolver,
    mode: VelocityMode,
) -> Result<MacroState> {
    MacroScheme::new(law.clone(), solver.clone(), mode, state.mass).step(state)
}

/// Time-loop controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunControl {
    /// Final (scheme) time.
    pub horizon: f64,
    /// Snapshot spacing; 0 keeps only the first and last state.
    pub snapshot_every: f64,
    /// Continue past invariant failures, recording them.
    pub keep_going: bool,
}

/// Recorded snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub rho: Vec<f64>,
    /// Distribution `f[i][j]`, only for kinetic runs that ask for it.
    pub f: Option<Vec<Vec<f64>>>,
}

/// Output of a time loop.
#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub snapshots: Vec<Snapshot>,
    pub reports: Vec<StepReport>,
    pub steps: usize,
    /// Invariant failures met with `keep_going`.
    pub failures: Vec<String>,
}

impl Trajectory {
    pub fn last(&self) -> Option<&Snapshot> {
        self.snapshots.last()
    }
}

/// Snapshot schedule shared by the macro and kinetic loops.
pub(crate) struct SnapshotClock {
    every: f64,
    next: usize,
}

impl SnapshotClock {
    pub(crate) fn new(every: f64) -> Self {
        Self { every, next: 1 }
    }

    /// Whether a snapshot is due at `t`.
    pub(crate) fn due(&mut self, t: f64) -> bool {
        if self.every <= 0.0 {
            return false;
        }
        let mut hit = false;
        while self.next as f64 * self.every <= t * (1.0 + 1e-12) {
            self.next += 1;
            hit = true;
        }
        hit
    }
}

/// Step sizes that reach `horizon` exactly: full steps then one partial.
pub(crate) fn step_plan(horizon: f64, dt: f64) -> (usize, f64) {
    let full = (horizon / dt * (1.0 + 1e-12)).floor() as usize;
    let rest = horizon - full as f64 * dt;
    (full, if rest > 1e-12 * dt { rest } else { 0.0 })
}

/// Runs the macroscopic scheme from `rho0` to `control.horizon` with the
/// grid's time step, recording snapshots and one report per step.
pub fn run_macro(scheme: &MacroScheme, rho0: Vec<f64>, control: &RunControl) -> Result<Trajectory> {
    let dt = scheme.grid().dt;
    let mut state = scheme.state(0.0, rho0)?;
    let mut traj = Trajectory::default();
    traj.snapshots.push(Snapshot { t: 0.0, rho: state.rho.clone(), f: None });
    traj.reports.push(report(&state, scheme));
    let (full, rest) = step_plan(control.horizon, dt);
    let mut clock = SnapshotClock::new(control.snapshot_every);
    let total = full + usize::from(rest > 0.0);
    for n in 0..total {
        let h = if n < full { dt } else { rest };
        let mut next = scheme.step_dt(&state, h)?;
        next.t = if n + 1 == total { control.horizon } else { (n + 1) as f64 * dt };
        state = next;
        let rep = report(&state, scheme);
        if let Some(what) = rep.violation(&traj.reports[traj.reports.len() - 1], scheme.c, osl_applies(scheme)) {
            if !control.keep_going {
                return Err(Error::Invariant { t: state.t, what: format!("{what}; report: {rep}") });
            }
            traj.failures.push(format!("t = {}: {what}", state.t));
        }
        traj.reports.push(rep);
        traj.steps += 1;
        let last = n + 1 == total;
        if clock.due(state.t) || last {
            traj.snapshots.push(Snapshot { t: state.t, rho: state.rho.clone(), f: None });
        }
    }
    Ok(traj)
}
